#include "dllab/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dllab {

ObservableSpec ObservableSpec::make(std::vector<int> support, Matrix matrix, const SiteSpace &sites) {
    if(support.empty()) throw Error(ErrorCode::InvalidArgument, "observable support is empty");
    std::set<int> uniq(support.begin(), support.end());
    if(uniq.size() != support.size()) throw Error(ErrorCode::InvalidArgument, "observable support has repeated sites");
    for(int s : support)
        if(s < 0 || s >= sites.n()) throw Error(ErrorCode::InvalidArgument, "observable support out of range");
    const auto dim = static_cast<Eigen::Index>(checked_pow(static_cast<std::uint64_t>(sites.d()), static_cast<int>(support.size())));
    if(matrix.rows() != dim || matrix.cols() != dim) throw Error(ErrorCode::DimensionMismatch, "observable matrix has the wrong size");
    if((matrix - matrix.adjoint()).norm() > 1e-12 * std::max(1.0, matrix.norm()))
        throw Error(ErrorCode::NotHermitian, "observable is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
    ObservableSpec o;
    o.support = std::move(support);
    o.matrix  = std::move(matrix);
    o.norm    = es.eigenvalues().cwiseAbs().maxCoeff();
    return o;
}

std::size_t CausalityCone::inside_count() const {
    return static_cast<std::size_t>(std::count_if(occurrences.begin(), occurrences.end(), [](const auto &o) { return o.inside; }));
}

CausalityCone causality_cone(const HamiltonianSpec &h, const LayerPartition &part, std::vector<int> seed, int l) {
    if(seed.empty()) throw Error(ErrorCode::InvalidArgument, "cone seed is empty");
    if(l < 1) throw Error(ErrorCode::InvalidArgument, "cone needs l >= 1");
    const int n = h.sites().n();
    std::vector<bool> reach(n, false);
    for(int s : seed) {
        if(s < 0 || s >= n) throw Error(ErrorCode::InvalidArgument, "cone seed out of range");
        reach[s] = true;
    }
    CausalityCone cone;
    cone.seed   = std::move(seed);
    cone.rounds = l;
    for(int r = 0; r < l; ++r) {
        for(std::size_t j = 0; j < part.g(); ++j) {
            std::vector<std::size_t> members;
            for(auto t : part.layers[j]) {
                const auto &sup = h.terms()[t].support;
                const bool in   = std::any_of(sup.begin(), sup.end(), [&](int s) { return reach[s]; });
                cone.occurrences.push_back({r, j, t, in});
                if(in) members.push_back(t);
            }
            for(auto t : members)
                for(int s : h.terms()[t].support) reach[s] = true;
            cone.step_members.push_back(std::move(members));
        }
    }
    for(int s = 0; s < n; ++s)
        if(reach[s]) cone.reach.push_back(s);
    return cone;
}

Vector apply_cone(const DLOperator &a, const CausalityCone &cone, const Vector &psi, bool inside) {
    Vector v = psi;
    for(const auto &o : cone.occurrences)
        if(o.inside == inside) a.apply_projector(o.term, v);
    return v;
}

namespace {

    void require_compatible(const DLOperator &a, const GroundSpaceData &gs) {
        if(gs.dim() != a.hamiltonian().sites().dim()) throw Error(ErrorCode::DimensionMismatch, "ground space does not match the operator");
    }

    const Vector &unique_ground(const GroundSpaceData &gs, Vector &storage) {
        if(gs.degeneracy() != 1) throw Error(ErrorCode::DegenerateGround, "a unique ground state is required");
        storage = gs.ground_basis.col(0);
        return storage;
    }

} // namespace

double cone_absorption_check(const DLOperator &a, const GroundSpaceData &gs, const ObservableSpec &b, int l) {
    require_compatible(a, gs);
    const auto &sites = a.hamiltonian().sites();
    const auto cone   = causality_cone(a.hamiltonian(), a.partition(), b.support, l);
    double worst      = 0.0;
    for(Eigen::Index c = 0; c < gs.ground_basis.cols(); ++c) {
        const Vector bo = apply_local(b.as_term(), sites, gs.ground_basis.col(c));
        worst           = std::max(worst, (a.apply(bo, l) - apply_cone(a, cone, bo, true)).norm());
    }
    return worst;
}

double cone_factorization_check(const DLOperator &a, const GroundSpaceData &gs, const ObservableSpec &b, int l) {
    require_compatible(a, gs);
    const auto &sites = a.hamiltonian().sites();
    const auto cone   = causality_cone(a.hamiltonian(), a.partition(), b.support, l);
    double worst      = 0.0;
    for(Eigen::Index c = 0; c < gs.ground_basis.cols(); ++c) {
        const Vector bo       = apply_local(b.as_term(), sites, gs.ground_basis.col(c));
        const Vector factored = apply_cone(a, cone, apply_cone(a, cone, bo, false), true);
        worst                 = std::max(worst, (factored - a.apply(bo, l)).norm());
    }
    return worst;
}

double cone_commutation_check(const DLOperator &a, const ObservableSpec &b, int l, int samples, std::mt19937_64 &rng) {
    const auto &sites = a.hamiltonian().sites();
    const auto cone   = causality_cone(a.hamiltonian(), a.partition(), b.support, l);
    std::set<std::size_t> outside;
    for(const auto &o : cone.occurrences)
        if(!o.inside) outside.insert(o.term);
    double worst = 0.0;
    for(int s = 0; s < samples; ++s) {
        const Vector psi = random_state(sites, rng);
        const Vector bp  = apply_local(b.as_term(), sites, psi);
        for(auto t : outside) {
            Vector pb = bp;
            a.apply_projector(t, pb);
            Vector p = psi;
            a.apply_projector(t, p);
            worst = std::max(worst, (pb - apply_local(b.as_term(), sites, p)).norm());
        }
    }
    return worst;
}

Correlation connected_correlation(const GroundSpaceData &gs, const SiteSpace &sites, const ObservableSpec &x, const ObservableSpec &y) {
    Vector store;
    const Vector &omega = unique_ground(gs, store);
    if(static_cast<std::uint64_t>(omega.size()) != sites.dim()) throw Error(ErrorCode::DimensionMismatch, "ground state does not match sites");
    const Vector xo = apply_local(x.as_term(), sites, omega);
    const Vector yo = apply_local(y.as_term(), sites, omega);
    Correlation c;
    c.xy      = xo.dot(yo);
    c.x_mean  = omega.dot(xo).real();
    c.y_mean  = omega.dot(yo).real();
    c.value   = c.xy - c.x_mean * c.y_mean;
    c.modulus = std::abs(c.value);
    c.real    = c.value.real();
    return c;
}

int cone_separation_rounds(const HamiltonianSpec &h, const LayerPartition &part, const std::vector<int> &seed,
                           const std::vector<int> &target, int cap) {
    const std::set<int> tgt(target.begin(), target.end());
    for(int l = 1; l <= cap; ++l) {
        const auto cone = causality_cone(h, part, seed, l);
        for(int s : cone.reach)
            if(tgt.count(s)) return l - 1;
    }
    return cap;
}

DecayProfile decay_profile(const DLOperator &a, const GroundSpaceData &gs, const ObservableSpec &x, const std::vector<ObservableSpec> &ys) {
    require_compatible(a, gs);
    const auto &h     = a.hamiltonian();
    const auto &sites = h.sites();
    Vector store;
    const Vector &omega = unique_ground(gs, store);
    const Vector xo     = apply_local(x.as_term(), sites, omega);

    DecayProfile p;
    p.rate     = dl_bound_for(a, gs.gap);
    int last_m = -1;
    std::vector<double> ms, logs;
    for(const auto &y : ys) {
        DecayRow row;
        row.m = sites.distance(x.support, y.support);
        if(row.m <= last_m) throw Error(ErrorCode::InvalidArgument, "observable distances must be strictly increasing");
        last_m = row.m;

        const auto c       = connected_correlation(gs, sites, x, y);
        const double scale = x.norm * y.norm;
        row.corr           = c.real;
        row.normalized     = scale > 0 ? c.modulus / scale : 0.0;
        row.bound_r_pow_m  = std::pow(p.rate, row.m);
        if(row.normalized > 1e-13) {
            ms.push_back(row.m);
            logs.push_back(std::log(row.normalized));
            const double need  = row.bound_r_pow_m > 0 ? row.normalized / row.bound_r_pow_m : std::numeric_limits<double>::infinity();
            p.prefactor_needed = std::max(p.prefactor_needed, need);
        }

        // <Ω|X A^ℓ Y|Ω> for every ℓ whose cone around Y misses X.
        row.identity_l = cone_separation_rounds(h, a.partition(), y.support, x.support);
        Vector v       = apply_local(y.as_term(), sites, omega);
        for(int l = 1; l <= row.identity_l; ++l) {
            v                      = a.apply(v);
            row.identity_deviation = std::max(row.identity_deviation, std::abs(xo.dot(v) - c.xy));
        }
        p.max_identity_deviation = std::max(p.max_identity_deviation, row.identity_deviation);
        p.rows.push_back(row);
    }

    if(ms.size() >= 2) {
        const double n  = static_cast<double>(ms.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for(std::size_t i = 0; i < ms.size(); ++i) {
            sx += ms[i];
            sy += logs[i];
            sxx += ms[i] * ms[i];
            sxy += ms[i] * logs[i];
        }
        const double den = n * sxx - sx * sx;
        if(den > 0) {
            p.slope     = (n * sxy - sx * sy) / den;
            p.intercept = (sy - *p.slope * sx) / n;
        }
    }
    return p;
}

double binary_divergence(double x1, double y1) {
    x1              = std::clamp(x1, 0.0, 1.0);
    y1              = std::clamp(y1, 1e-300, 1.0);
    const double x0 = 1.0 - x1;
    const double y0 = std::max(1.0 - y1, 1e-300);
    double s        = 0.0;
    if(x1 > 0) s += x1 * std::log(x1 / y1);
    if(x0 > 0) s += x0 * std::log(x0 / y0);
    return s;
}

namespace {

    Matrix kron(const Matrix &a, const Matrix &b) {
        Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
        for(Eigen::Index i = 0; i < a.rows(); ++i)
            for(Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    }

    std::vector<int> range_sites(int lo, int hi) {
        std::vector<int> s;
        for(int i = lo; i < hi; ++i) s.push_back(i);
        return s;
    }

    constexpr std::uint64_t kWindowDimLimit = 4096;

    // Projector onto the common zero space of the terms inside [lo, hi).
    Matrix window_ground_projector(const HamiltonianSpec &h, int lo, int hi, std::size_t &count) {
        const int width = hi - lo;
        const SiteSpace window(width, h.sites().d(), Geometry::custom({}));
        if(window.dim() > kWindowDimLimit) throw Error(ErrorCode::DimensionCap, "measurement window too large for a dense projector");
        std::vector<LocalTerm> terms;
        for(const auto &t : h.terms()) {
            if(std::all_of(t.support.begin(), t.support.end(), [&](int s) { return s >= lo && s < hi; })) {
                LocalTerm w = t;
                for(int &s : w.support) s -= lo;
                terms.push_back(std::move(w));
            }
        }
        count          = terms.size();
        const auto dim = static_cast<Eigen::Index>(window.dim());
        if(terms.empty()) return Matrix::Identity(dim, dim);
        const HamiltonianSpec wh(window, std::move(terms));
        Eigen::SelfAdjointEigenSolver<Matrix> es(dense_hamiltonian(wh));
        const double thr = ground_threshold(wh);
        Eigen::Index zeros = 0;
        while(zeros < dim && es.eigenvalues()(zeros) <= thr) ++zeros;
        const Matrix g = es.eigenvectors().leftCols(zeros);
        return g * g.adjoint();
    }

} // namespace

DistinguishingReport distinguishing_measurement(const DLOperator &a, const GroundSpaceData &gs, const CutSpec &cut, int l) {
    require_compatible(a, gs);
    const auto &h     = a.hamiltonian();
    const auto &sites = h.sites();
    if(!sites.is_chain()) throw Error(ErrorCode::Geometry, "distinguishing measurement needs a 1D chain");
    if(cut.kind != CutSpec::Kind::Contiguous) throw Error(ErrorCode::InvalidArgument, "distinguishing measurement needs a contiguous cut");
    cut.validate(sites);
    Vector store;
    const Vector &omega = unique_ground(gs, store);
    const int k         = cut.position;
    if(l < 1 || k - l < 0 || k + l > sites.n()) throw Error(ErrorCode::InvalidArgument, "measurement window exceeds the chain");

    DistinguishingReport r;
    r.l         = l;
    r.window_lo = k - l;
    r.window_hi = k + l;
    const Matrix pi = window_ground_projector(h, r.window_lo, r.window_hi, r.window_terms);

    const Matrix rho_w = reduced_density_matrix(omega, sites, range_sites(r.window_lo, r.window_hi));
    const Matrix rho_l = reduced_density_matrix(omega, sites, range_sites(r.window_lo, k));
    const Matrix rho_r = reduced_density_matrix(omega, sites, range_sites(k, r.window_hi));
    r.trace_window     = (pi * rho_w).trace().real();
    r.trace_product    = (pi * kron(rho_l, rho_r)).trace().real();
    r.s_window         = von_neumann_entropy(rho_w);
    r.s_left           = von_neumann_entropy(rho_l);
    r.s_right          = von_neumann_entropy(rho_r);

    r.delta             = area_law_delta(a, gs.gap);
    r.overlap           = max_product_overlap(omega, sites, cut).alpha1;
    r.overlap_threshold = std::pow(1.0 - r.delta, l / 4.0);
    r.bound             = 2.0 * std::pow(1.0 - r.delta, l / 2.0);
    // The argument applies A exactly ℓ/2 times.
    r.hypothesis_met = l % 2 == 0 && r.overlap <= r.overlap_threshold;
    if(r.hypothesis_met) r.bound_status = status_of(r.trace_product <= r.bound + kInequalityTol);

    if(l % 2 == 0 && is_one_d_chain(h, a.partition())) {
        const Matrix m = cut_matrix(omega, sites, CutSpec::contiguous(k).left_sites(sites));
        Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const RealVec lam = svd.singularValues().array().square();
        const Matrix vr   = svd.matrixV().conjugate();
        std::vector<int> window_support = range_sites(r.window_lo, r.window_hi);
        double lhs = 0.0, rhs = 0.0;
        for(Eigen::Index i = 0; i < lam.size(); ++i) {
            for(Eigen::Index j = 0; j < lam.size(); ++j) {
                const double w = lam(i) * lam(j);
                if(w <= 1e-14) continue;
                // |L_i> ⊗ |R_j> with the left block as the leading index
                Vector phi(m.rows() * m.cols());
                for(Eigen::Index p = 0; p < m.rows(); ++p) phi.segment(p * m.cols(), m.cols()) = svd.matrixU()(p, i) * vr.col(j);
                Vector pphi = phi;
                apply_local_inplace(pi, window_support, sites, pphi);
                lhs += w * pphi.dot(a.apply(phi, l / 2)).real();
                rhs += w * pphi.dot(phi).real();
            }
        }
        r.identity_lhs    = lhs;
        r.identity_rhs    = rhs;
        r.identity_status = status_of(std::abs(lhs - rhs) <= 1e-10 && std::abs(rhs - r.trace_product) <= 1e-10);
    }
    return r;
}

EntropyGapReport entropy_gap_check(const DLOperator &a, const GroundSpaceData &gs, const CutSpec &cut, int l) {
    EntropyGapReport e;
    e.measurement        = distinguishing_measurement(a, gs, cut, l);
    const auto &m        = e.measurement;
    e.mutual_information = m.s_left + m.s_right - m.s_window;
    e.divergence         = binary_divergence(m.trace_window, m.trace_product);
    e.threshold          = 0.5 * m.delta * l - 1.0;
    e.premise_met        = m.trace_product <= m.bound;
    if(e.premise_met) e.threshold_status = status_of(e.mutual_information >= e.threshold - kInequalityTol);
    e.recursion_lhs = m.s_window;
    e.recursion_rhs = m.s_left + m.s_right - 0.5 * m.delta * l + 1.0;
    return e;
}

} // namespace dllab
