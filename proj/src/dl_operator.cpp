#include "dllab/dl_operator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dllab {

DLOperator::DLOperator(std::shared_ptr<const HamiltonianSpec> h) : DLOperator(h, partition_layers(*h)) {}

DLOperator::DLOperator(std::shared_ptr<const HamiltonianSpec> h, LayerPartition partition)
    : h_(std::move(h)), partition_(std::move(partition)) {
    if(!h_) throw Error(ErrorCode::InvalidArgument, "null Hamiltonian");
    if(!layer_partition_valid(*h_, partition_)) throw Error(ErrorCode::InvalidArgument, "invalid layer partition");
    complements_.reserve(h_->m());
    for(std::size_t i = 0; i < h_->m(); ++i) {
        const auto &t = h_->terms()[i];
        if(!t.is_projector)
            throw Error(ErrorCode::InvalidArgument, "term " + std::to_string(i) + " is not a projector; projectorize first");
        complements_.push_back(Matrix::Identity(t.matrix.rows(), t.matrix.cols()) - t.matrix);
    }
}

void DLOperator::apply_projector(std::size_t term, Vector &psi) const {
    apply_local_inplace(complements_.at(term), h_->terms()[term].support, h_->sites(), psi);
}

void DLOperator::apply_layer(std::size_t layer, Vector &psi) const {
    for(auto t : partition_.layers.at(layer)) apply_projector(t, psi);
}

Vector DLOperator::apply(const Vector &psi, int power) const {
    if(static_cast<std::uint64_t>(psi.size()) != h_->sites().dim())
        throw Error(ErrorCode::DimensionMismatch, "state does not match the operator dimension");
    Vector v = psi;
    for(int p = 0; p < power; ++p)
        for(std::size_t j = 0; j < partition_.g(); ++j) apply_layer(j, v);
    return v;
}

Vector DLOperator::apply_adjoint(const Vector &psi, int power) const {
    if(static_cast<std::uint64_t>(psi.size()) != h_->sites().dim())
        throw Error(ErrorCode::DimensionMismatch, "state does not match the operator dimension");
    Vector v = psi;
    for(int p = 0; p < power; ++p)
        for(std::size_t j = partition_.g(); j-- > 0;) {
            const auto &layer = partition_.layers[j];
            for(auto it = layer.rbegin(); it != layer.rend(); ++it) apply_projector(*it, v);
        }
    return v;
}

LinearOperator DLOperator::as_operator(int power) const {
    LinearOperator op;
    op.dim           = h_->sites().dim();
    op.apply         = [this, power](const Vector &v) { return apply(v, power); };
    op.apply_adjoint = [this, power](const Vector &v) { return apply_adjoint(v, power); };
    return op;
}

double dl_bound(double epsilon, int k, int g, bool one_d) {
    if(!(epsilon > 0)) throw Error(ErrorCode::InvalidArgument, "gap must be positive");
    if(k < 1 || g < 1) throw Error(ErrorCode::InvalidArgument, "k and g must be >= 1");
    if(g == 1) return 0.0;
    const double f = one_d ? 2.0 : static_cast<double>(g - 1) * std::pow(static_cast<double>(k), g);
    return 1.0 / std::cbrt(epsilon / f + 1.0);
}

bool is_one_d_chain(const HamiltonianSpec &h, const LayerPartition &p) {
    if(!h.sites().is_open_chain() || p.g() != 2) return false;
    for(const auto &t : h.terms()) {
        if(t.k() != 2) return false;
        if(std::abs(t.support[0] - t.support[1]) != 1) return false;
    }
    return true;
}

double dl_bound_for(const DLOperator &a, double epsilon) {
    return dl_bound(epsilon, a.k(), static_cast<int>(a.g()), is_one_d_chain(a.hamiltonian(), a.partition()));
}

DLReport measure_shrinkage(const DLOperator &a, const GroundSpaceData &gs, NormMethod method) {
    DLReport r;
    r.epsilon           = gs.gap;
    const bool one_d    = is_one_d_chain(a.hamiltonian(), a.partition());
    const int g         = static_cast<int>(a.g());
    r.f_bound           = g == 1 ? 0.0 : (one_d ? 2.0 : (g - 1) * std::pow(static_cast<double>(a.k()), g));
    r.theoretical_bound = dl_bound(gs.gap, a.k(), g, one_d);
    r.measured_shrinkage = restricted_norm(a.as_operator(), gs, method);
    r.pass               = r.measured_shrinkage <= r.theoretical_bound + kInequalityTol;
    return r;
}

namespace {

    // Bond position of a nearest-neighbour chain term: its left site.
    struct ChainTerms {
        std::vector<std::optional<std::size_t>> at_bond; // bond b joins sites b, b+1
    };

    ChainTerms index_chain(const DLOperator &a) {
        const auto &h = a.hamiltonian();
        if(!is_one_d_chain(h, a.partition()))
            throw Error(ErrorCode::Geometry, "pyramid decomposition needs a two-layer nearest-neighbour open chain");
        ChainTerms ct;
        ct.at_bond.assign(static_cast<std::size_t>(h.sites().n() - 1), std::nullopt);
        for(std::size_t i = 0; i < h.m(); ++i) {
            const auto b = static_cast<std::size_t>(h.terms()[i].leftmost());
            if(ct.at_bond[b]) throw Error(ErrorCode::Geometry, "two terms on the same bond");
            ct.at_bond[b] = i;
        }
        return ct;
    }

} // namespace

PyramidDecomposition pyramid_decompose(const DLOperator &a, PyramidVariant variant) {
    const ChainTerms ct = index_chain(a);
    const auto &first   = a.partition().layers[0];
    std::set<std::size_t> first_layer(first.begin(), first.end());

    // Bonds carrying first-layer terms, ascending.
    std::vector<std::size_t> top_bonds;
    for(std::size_t b = 0; b < ct.at_bond.size(); ++b)
        if(ct.at_bond[b] && first_layer.count(*ct.at_bond[b])) top_bonds.push_back(b);

    PyramidDecomposition p;
    p.variant = variant;
    if(top_bonds.empty()) return p;
    const std::size_t anchor = top_bonds.front() + (variant == PyramidVariant::Shifted ? 2 : 0);

    std::set<std::size_t> used;
    for(auto b : top_bonds) {
        const bool is_top = b >= anchor && (b - anchor) % 4 == 0;
        if(!is_top) {
            p.remainder.push_back(*ct.at_bond[b]);
            continue;
        }
        Pyramid pyr;
        pyr.top = *ct.at_bond[b];
        if(b >= 1 && ct.at_bond[b - 1]) pyr.left = ct.at_bond[b - 1];
        if(b + 1 < ct.at_bond.size() && ct.at_bond[b + 1]) pyr.right = ct.at_bond[b + 1];
        if(pyr.left) used.insert(*pyr.left);
        if(pyr.right) used.insert(*pyr.right);
        p.pyramids.push_back(pyr);
    }
    for(auto t : a.partition().layers[1])
        if(!used.count(t)) p.leading.push_back(t);
    return p;
}

Vector apply_pyramids(const DLOperator &a, const PyramidDecomposition &p, const Vector &psi) {
    Vector v = psi;
    for(auto t : p.remainder) a.apply_projector(t, v);
    for(auto it = p.pyramids.rbegin(); it != p.pyramids.rend(); ++it) {
        a.apply_projector(it->top, v);
        if(it->right) a.apply_projector(*it->right, v);
        if(it->left) a.apply_projector(*it->left, v);
    }
    for(auto t : p.leading) a.apply_projector(t, v);
    return v;
}

NormEnergy norm_energy_check(const Matrix &x_proj, const Matrix &y_proj, const Vector &v) {
    const auto n = v.size();
    if(x_proj.rows() != n || y_proj.rows() != n || x_proj.cols() != n || y_proj.cols() != n)
        throw Error(ErrorCode::DimensionMismatch, "projector and vector dimensions differ");
    for(const Matrix *p : {&x_proj, &y_proj}) {
        const double scale = std::max(1.0, p->norm());
        if((*p * *p - *p).norm() > 1e-10 * scale || (*p - p->adjoint()).norm() > 1e-10 * scale)
            throw Error(ErrorCode::InvalidArgument, "norm-energy check needs orthogonal projectors");
    }
    if(std::abs(v.norm() - 1.0) > 1e-10) throw Error(ErrorCode::InvalidArgument, "norm-energy check needs a unit vector");
    const Vector yv  = y_proj * v;
    const Vector xyv = x_proj * yv;
    NormEnergy r;
    r.epsilon = 1.0 - xyv.squaredNorm();
    r.lhs     = (xyv - y_proj * xyv).squaredNorm();
    r.rhs     = r.epsilon * (1.0 - r.epsilon);
    return r;
}

std::vector<double> converge(const DLOperator &a, const GroundSpaceData &gs, const Vector &psi, int l_max) {
    if(l_max < 1) throw Error(ErrorCode::InvalidArgument, "l_max must be >= 1");
    if(static_cast<std::uint64_t>(psi.size()) != gs.dim()) throw Error(ErrorCode::DimensionMismatch, "state does not match ground space");
    const Vector target = gs.project(psi);
    std::vector<double> trace;
    trace.reserve(l_max);
    Vector v = psi;
    for(int l = 1; l <= l_max; ++l) {
        v = a.apply(v);
        trace.push_back((v - target).norm());
    }
    return trace;
}

double root_inequality_gap(double x, int m) {
    if(!(x > 0) || x > 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "root inequality needs x in (0,1], m >= 1");
    const double lhs = m * (1.0 - std::pow(x, 1.0 / m));
    const double rhs = (1.0 - x) / std::sqrt(x);
    return rhs - lhs;
}

} // namespace dllab
