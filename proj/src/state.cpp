#include "dllab/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <sstream>

namespace dllab {

namespace {

    EngineLimits &limits_storage() {
        static EngineLimits limits = EngineLimits::from_env();
        return limits;
    }

    std::uint64_t env_u64(const char *name, std::uint64_t fallback) {
        const char *v = std::getenv(name);
        if(v == nullptr || *v == '\0') return fallback;
        char *end = nullptr;
        auto parsed = std::strtoull(v, &end, 10);
        if(end == v || parsed == 0) return fallback;
        return parsed;
    }

    std::vector<std::uint64_t> strides(const SiteSpace &sites) {
        std::vector<std::uint64_t> st(sites.n());
        std::uint64_t s = 1;
        for(int i = sites.n() - 1; i >= 0; --i) {
            st[i] = s;
            s *= static_cast<std::uint64_t>(sites.d());
        }
        return st;
    }

    // Orthogonalize v against the first `cols` columns of V (two passes).
    double orthogonalize(Vector &v, const Matrix &V, Eigen::Index cols, const Matrix *deflate) {
        for(int pass = 0; pass < 2; ++pass) {
            if(deflate != nullptr && deflate->cols() > 0) v.noalias() -= (*deflate) * (deflate->adjoint() * v);
            if(cols > 0) v.noalias() -= V.leftCols(cols) * (V.leftCols(cols).adjoint() * v);
        }
        return v.norm();
    }

} // namespace

EngineLimits EngineLimits::from_env() {
    EngineLimits l;
    l.dense_limit = env_u64("DLLAB_DENSE_LIMIT", l.dense_limit);
    l.hard_cap    = env_u64("DLLAB_DIM_CAP", l.hard_cap);
    return l;
}

const EngineLimits &engine_limits() { return limits_storage(); }
void set_engine_limits(const EngineLimits &limits) { limits_storage() = limits; }

void check_dimension(const SiteSpace &sites) {
    if(sites.dim() > engine_limits().hard_cap)
        throw Error(ErrorCode::DimensionCap, "dimension " + std::to_string(sites.dim()) + " exceeds the hard cap " +
                                                 std::to_string(engine_limits().hard_cap) + " (set DLLAB_DIM_CAP to override)");
}

void apply_local_inplace(const Matrix &m, std::span<const int> support, const SiteSpace &sites, Vector &psi) {
    const auto dim = sites.dim();
    if(static_cast<std::uint64_t>(psi.size()) != dim) throw Error(ErrorCode::DimensionMismatch, "state length does not match d^n");
    const int k         = static_cast<int>(support.size());
    const std::uint64_t d = static_cast<std::uint64_t>(sites.d());
    const auto dk       = checked_pow(d, k);
    if(static_cast<std::uint64_t>(m.rows()) != dk || m.rows() != m.cols())
        throw Error(ErrorCode::DimensionMismatch, "local matrix does not match support size");
    for(int s : support)
        if(s < 0 || s >= sites.n()) throw Error(ErrorCode::InvalidArgument, "support index out of range");

    const auto st = strides(sites);
    std::vector<std::uint64_t> offsets(dk, 0);
    for(std::uint64_t a = 0; a < dk; ++a) {
        std::uint64_t rem = a, off = 0;
        for(int j = k - 1; j >= 0; --j) {
            off += (rem % d) * st[support[j]];
            rem /= d;
        }
        offsets[a] = off;
    }
    std::vector<std::uint64_t> sorted;
    sorted.reserve(k);
    for(int s : support) sorted.push_back(st[s]);
    std::sort(sorted.begin(), sorted.end());

    Vector in(static_cast<Eigen::Index>(dk)), out(static_cast<Eigen::Index>(dk));
    const std::uint64_t count = dim / dk;
    for(std::uint64_t idx = 0; idx < count; ++idx) {
        std::uint64_t base = idx;
        for(auto s : sorted) base = (base / s) * s * d + base % s;
        for(std::uint64_t a = 0; a < dk; ++a) in(static_cast<Eigen::Index>(a)) = psi(static_cast<Eigen::Index>(base + offsets[a]));
        out.noalias() = m * in;
        for(std::uint64_t a = 0; a < dk; ++a) psi(static_cast<Eigen::Index>(base + offsets[a])) = out(static_cast<Eigen::Index>(a));
    }
}

Vector apply_local(const LocalTerm &term, const SiteSpace &sites, const Vector &psi) {
    Vector out = psi;
    apply_local_inplace(term.matrix, term.support, sites, out);
    return out;
}

Vector apply_hamiltonian(const HamiltonianSpec &h, const Vector &psi) {
    Vector acc = Vector::Zero(psi.size());
    for(const auto &t : h.terms()) acc += apply_local(t, h.sites(), psi);
    return acc;
}

Matrix dense_hamiltonian(const HamiltonianSpec &h) {
    const auto &sites = h.sites();
    check_dimension(sites);
    const auto dim = static_cast<Eigen::Index>(sites.dim());
    Matrix H       = Matrix::Zero(dim, dim);
    const auto st  = strides(sites);
    const auto d   = static_cast<std::uint64_t>(sites.d());
    for(const auto &term : h.terms()) {
        const int k   = term.k();
        const auto dk = checked_pow(d, k);
        std::vector<std::uint64_t> offsets(dk, 0);
        for(std::uint64_t a = 0; a < dk; ++a) {
            std::uint64_t rem = a, off = 0;
            for(int j = k - 1; j >= 0; --j) {
                off += (rem % d) * st[term.support[j]];
                rem /= d;
            }
            offsets[a] = off;
        }
        std::vector<std::uint64_t> sorted;
        for(int s : term.support) sorted.push_back(st[s]);
        std::sort(sorted.begin(), sorted.end());
        const std::uint64_t count = sites.dim() / dk;
        for(std::uint64_t idx = 0; idx < count; ++idx) {
            std::uint64_t base = idx;
            for(auto s : sorted) base = (base / s) * s * d + base % s;
            for(std::uint64_t a = 0; a < dk; ++a)
                for(std::uint64_t b = 0; b < dk; ++b) {
                    const Complex v = term.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                    if(v != Complex(0.0, 0.0))
                        H(static_cast<Eigen::Index>(base + offsets[a]), static_cast<Eigen::Index>(base + offsets[b])) += v;
                }
        }
    }
    return H;
}

Vector random_state(const SiteSpace &sites, std::mt19937_64 &rng) {
    check_dimension(sites);
    std::normal_distribution<double> nd(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(sites.dim()));
    for(Eigen::Index i = 0; i < v.size(); ++i) {
        const double re = nd(rng);
        const double im = nd(rng);
        v(i)            = Complex(re, im);
    }
    return v / v.norm();
}

Vector basis_state(const SiteSpace &sites, const std::vector<int> &digits) {
    check_dimension(sites);
    if(static_cast<int>(digits.size()) != sites.n()) throw Error(ErrorCode::DimensionMismatch, "basis state needs n digits");
    std::uint64_t idx = 0;
    for(int x : digits) {
        if(x < 0 || x >= sites.d()) throw Error(ErrorCode::InvalidArgument, "basis digit out of range");
        idx = idx * static_cast<std::uint64_t>(sites.d()) + static_cast<std::uint64_t>(x);
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(sites.dim()));
    v(static_cast<Eigen::Index>(idx)) = 1.0;
    return v;
}

Vector product_state(const SiteSpace &sites, const std::vector<Vector> &local) {
    check_dimension(sites);
    if(static_cast<int>(local.size()) != sites.n()) throw Error(ErrorCode::DimensionMismatch, "product state needs n factors");
    Vector v = Vector::Ones(1);
    for(const auto &f : local) {
        if(f.size() != sites.d()) throw Error(ErrorCode::DimensionMismatch, "product factor must have length d");
        Vector next(v.size() * f.size());
        for(Eigen::Index i = 0; i < v.size(); ++i) next.segment(i * f.size(), f.size()) = v(i) * f;
        v = std::move(next);
    }
    const double nrm = v.norm();
    if(nrm == 0.0) throw Error(ErrorCode::InvalidArgument, "product state has zero norm");
    return v / nrm;
}

Eigenpairs lowest_eigenpairs(const std::function<Vector(const Vector &)> &op, std::uint64_t dim, int count, double tol,
                             const Matrix *deflate, std::uint64_t seed) {
    const Eigen::Index n     = static_cast<Eigen::Index>(dim);
    const Eigen::Index ndefl = deflate != nullptr ? deflate->cols() : 0;
    const Eigen::Index avail = n - ndefl;
    if(count < 1 || count > avail) throw Error(ErrorCode::InvalidArgument, "requested eigenpair count out of range");

    // Krylov basis size bounded by a ~512 MiB budget for the V and W blocks.
    const double budget     = 512.0 * 1024 * 1024;
    const auto by_memory    = static_cast<Eigen::Index>(budget / (2.0 * 16.0 * static_cast<double>(n)));
    Eigen::Index m_max      = std::clamp<Eigen::Index>(by_memory, std::max<Eigen::Index>(2 * count + 10, 24), 120);
    m_max                   = std::min(m_max, avail);
    const Eigen::Index keep = std::min<Eigen::Index>(m_max - 1, count + std::max<Eigen::Index>(count, 8));

    Matrix V(n, m_max), W(n, m_max);
    Eigen::Index cols = 0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    auto random_vector = [&] {
        Vector v(n);
        for(Eigen::Index i = 0; i < n; ++i) {
            const double re = nd(rng);
            const double im = nd(rng);
            v(i)            = Complex(re, im);
        }
        return v;
    };
    auto projected_op = [&](const Vector &v) {
        Vector w = op(v);
        if(ndefl > 0) w.noalias() -= (*deflate) * (deflate->adjoint() * w);
        return w;
    };

    Vector next = random_vector();
    Eigenpairs result;
    const int max_restarts = 4000;
    for(int restart = 0; restart < max_restarts; ++restart) {
        while(cols < m_max) {
            double nrm = orthogonalize(next, V, cols, deflate);
            int tries  = 0;
            while(nrm < 1e-10 && tries < 5) {
                next = random_vector();
                nrm  = orthogonalize(next, V, cols, deflate);
                ++tries;
            }
            if(nrm < 1e-10) break; // invariant subspace exhausted
            V.col(cols) = next / nrm;
            W.col(cols) = projected_op(V.col(cols));
            next        = W.col(cols);
            ++cols;
        }
        Matrix T = V.leftCols(cols).adjoint() * W.leftCols(cols);
        T        = 0.5 * (T + T.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es(T);
        const Eigen::Index nev = std::min<Eigen::Index>(count, cols);
        Matrix Y               = es.eigenvectors();
        Matrix X               = V.leftCols(cols) * Y.leftCols(nev);
        Matrix HX              = W.leftCols(cols) * Y.leftCols(nev);
        std::vector<double> res(nev);
        Eigen::Index first_bad = -1;
        for(Eigen::Index j = 0; j < nev; ++j) {
            res[j] = (HX.col(j) - es.eigenvalues()(j) * X.col(j)).norm();
            if(res[j] > tol && first_bad < 0) first_bad = j;
        }
        if(first_bad < 0 || cols == avail) {
            if(nev < count) throw Error(ErrorCode::NotConverged, "Krylov space exhausted before reaching requested count");
            result.values  = es.eigenvalues().head(nev);
            result.vectors = X;
            result.residuals.assign(res.begin(), res.end());
            // Residuals against the true operator.
            for(Eigen::Index j = 0; j < nev; ++j)
                result.residuals[j] = (op(X.col(j)) - result.values(j) * X.col(j)).norm();
            return result;
        }
        const Eigen::Index p = std::min(keep, cols - 1);
        Matrix Vk            = V.leftCols(cols) * Y.leftCols(p);
        Matrix Wk            = W.leftCols(cols) * Y.leftCols(p);
        V.leftCols(p)        = Vk;
        W.leftCols(p)        = Wk;
        cols                 = p;
        next                 = HX.col(first_bad) - es.eigenvalues()(first_bad) * X.col(first_bad);
    }
    std::ostringstream os;
    os << "restarted Krylov eigensolver did not reach residual " << tol;
    throw Error(ErrorCode::NotConverged, os.str());
}

Eigenpairs full_spectrum(const HamiltonianSpec &h) {
    check_dimension(h.sites());
    if(h.sites().dim() > engine_limits().dense_limit)
        throw Error(ErrorCode::DimensionCap, "full spectrum requires dimension <= dense limit " +
                                                 std::to_string(engine_limits().dense_limit));
    const Matrix H = dense_hamiltonian(h);
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    Eigenpairs out;
    out.values  = es.eigenvalues();
    out.vectors = es.eigenvectors();
    out.dense   = true;
    out.residuals.resize(out.values.size());
    for(Eigen::Index j = 0; j < out.values.size(); ++j)
        out.residuals[j] = (H * out.vectors.col(j) - out.values(j) * out.vectors.col(j)).norm();
    return out;
}

Eigenpairs spectrum(const HamiltonianSpec &h, int count) {
    check_dimension(h.sites());
    const auto dim = h.sites().dim();
    if(count < 1 || static_cast<std::uint64_t>(count) > dim) throw Error(ErrorCode::InvalidArgument, "eigenpair count out of range");
    Eigenpairs out;
    if(dim <= engine_limits().dense_limit) {
        Eigenpairs full = full_spectrum(h);
        out.values      = full.values.head(count);
        out.vectors     = full.vectors.leftCols(count);
        out.residuals.assign(full.residuals.begin(), full.residuals.begin() + count);
        out.dense = true;
    } else {
        const double tol = 1e-10 * std::max(1.0, h.norm_estimate());
        out = lowest_eigenpairs([&](const Vector &v) { return apply_hamiltonian(h, v); }, dim, count, tol);
    }
    for(std::size_t j = 0; j < out.residuals.size(); ++j)
        if(out.residuals[j] > 1e-8)
            throw Error(ErrorCode::NotConverged, "eigenpair " + std::to_string(j) + " residual " + std::to_string(out.residuals[j]) +
                                                     " exceeds 1e-8");
    return out;
}

Vector GroundSpaceData::project(const Vector &psi) const { return ground_basis * (ground_basis.adjoint() * psi); }

Vector GroundSpaceData::project_complement(const Vector &psi) const { return psi - project(psi); }

double ground_threshold(const HamiltonianSpec &h) { return 1e-10 * (1.0 + h.norm_estimate()); }

namespace {

    // Sweeps of Π_i P_i pull approximate zero-energy vectors back onto the
    // common kernel; the sweep fixes the kernel and contracts its complement.
    void polish_ground_basis(const HamiltonianSpec &h, Matrix &basis) {
        std::vector<Matrix> comps;
        comps.reserve(h.m());
        for(const auto &t : h.terms()) comps.push_back(Matrix::Identity(t.matrix.rows(), t.matrix.cols()) - t.matrix);
        if(!h.all_projectors()) return;
        for(Eigen::Index c = 0; c < basis.cols(); ++c) {
            Vector v = basis.col(c);
            for(int sweep = 0; sweep < 60; ++sweep) {
                Vector w = v;
                for(std::size_t i = 0; i < h.m(); ++i) apply_local_inplace(comps[i], h.terms()[i].support, h.sites(), w);
                const double change = (w - v).norm();
                if(w.norm() < 1.0 - 1e-6) return; // not a zero-energy vector; leave untouched
                v = w / w.norm();
                if(change < 1e-15) break;
            }
            basis.col(c) = v;
        }
        Eigen::HouseholderQR<Matrix> qr(basis);
        Matrix q = qr.householderQ() * Matrix::Identity(basis.rows(), basis.cols());
        basis    = q;
    }

} // namespace

GroundSpaceData ground_space(const HamiltonianSpec &h) {
    check_dimension(h.sites());
    const double thr = ground_threshold(h);
    const auto dim   = h.sites().dim();
    Eigenpairs ep;
    if(dim <= engine_limits().dense_limit) {
        ep = full_spectrum(h);
    } else {
        int count = 2;
        while(true) {
            ep = spectrum(h, count);
            if(ep.values(count - 1) > thr || static_cast<std::uint64_t>(count) >= dim) break;
            if(count >= 256) throw Error(ErrorCode::NotConverged, "ground space degeneracy exceeds 255 in the iterative regime");
            count *= 2;
        }
    }
    if(ep.values(0) > thr) {
        std::ostringstream os;
        os << "not frustration-free: ground energy " << ep.values(0) << " exceeds threshold " << thr;
        throw Error(ErrorCode::NotFrustrationFree, os.str());
    }
    Eigen::Index deg = 0;
    while(deg < ep.values.size() && ep.values(deg) <= thr) ++deg;
    if(deg == ep.values.size()) throw Error(ErrorCode::InvalidArgument, "no excited level found above the ground space");
    GroundSpaceData gs;
    gs.ground_energy = ep.values(0);
    gs.gap           = ep.values(deg);
    gs.ground_basis  = ep.vectors.leftCols(deg);
    polish_ground_basis(h, gs.ground_basis);
    return gs;
}

FrustrationReport validate_frustration_free(const HamiltonianSpec &h, const GroundSpaceData &gs, double tol) {
    if(gs.dim() != h.sites().dim()) throw Error(ErrorCode::DimensionMismatch, "ground space does not match Hamiltonian dimension");
    FrustrationReport rep;
    for(std::size_t i = 0; i < h.m(); ++i)
        for(int c = 0; c < gs.degeneracy(); ++c) {
            const double v = apply_local(h.terms()[i], h.sites(), gs.ground_basis.col(c)).norm();
            rep.max_violation = std::max(rep.max_violation, v);
            if(v > tol) {
                rep.frustration_free = false;
                rep.violations.emplace_back(i, c);
            }
        }
    return rep;
}

Vector gaussian_filter(const Eigenpairs &full, double q, const Vector &psi) {
    if(q < 0) throw Error(ErrorCode::InvalidArgument, "filter parameter q must be >= 0");
    if(psi.size() != full.vectors.rows()) throw Error(ErrorCode::DimensionMismatch, "state does not match spectrum");
    Vector coeff = full.vectors.adjoint() * psi;
    for(Eigen::Index j = 0; j < coeff.size(); ++j) coeff(j) *= std::exp(-q * full.values(j) * full.values(j) / 2.0);
    return full.vectors * coeff;
}

Vector gaussian_filter(const HamiltonianSpec &h, double q, const Vector &psi) {
    if(q < 0) throw Error(ErrorCode::InvalidArgument, "filter parameter q must be >= 0");
    return gaussian_filter(full_spectrum(h), q, psi);
}

double gaussian_filter_error(const Eigenpairs &full, double q, double threshold) {
    double worst = 0.0;
    for(Eigen::Index j = 0; j < full.values.size(); ++j) {
        const double E    = full.values(j);
        const double f    = std::exp(-q * E * E / 2.0);
        const double want = E <= threshold ? 1.0 : 0.0;
        worst             = std::max(worst, std::abs(f - want));
    }
    return worst;
}

Matrix materialize(const LinearOperator &op) {
    const auto n = static_cast<Eigen::Index>(op.dim);
    Matrix M(n, n);
    Vector e = Vector::Zero(n);
    for(Eigen::Index j = 0; j < n; ++j) {
        e(j)     = 1.0;
        M.col(j) = op.apply(e);
        e(j)     = 0.0;
    }
    return M;
}

namespace {

    double restricted_norm_dense(const LinearOperator &op, const GroundSpaceData &gs) {
        const auto n        = static_cast<Eigen::Index>(op.dim);
        const Matrix comp   = Matrix::Identity(n, n) - gs.ground_basis * gs.ground_basis.adjoint();
        const Matrix M      = materialize(op) * comp;
        Eigen::BDCSVD<Matrix> svd(M);
        return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    }

    double restricted_norm_iterative(const LinearOperator &op, const GroundSpaceData &gs, double rel_tol) {
        auto gram = [&](const Vector &v) -> Vector {
            Vector x = gs.project_complement(v);
            Vector y = op.apply_adjoint(op.apply(x));
            return -gs.project_complement(y);
        };
        const Matrix *defl = gs.degeneracy() > 0 ? &gs.ground_basis : nullptr;
        const Eigenpairs ep = lowest_eigenpairs(gram, op.dim, 1, rel_tol, defl, 777);
        return std::sqrt(std::max(0.0, -ep.values(0)));
    }

} // namespace

double restricted_norm(const LinearOperator &op, const GroundSpaceData &gs, NormMethod method, double rel_tol) {
    if(op.dim != gs.dim()) throw Error(ErrorCode::DimensionMismatch, "operator dimension does not match ground space");
    if(static_cast<std::uint64_t>(gs.degeneracy()) == op.dim) return 0.0;
    if(method == NormMethod::Auto) method = op.dim <= 256 ? NormMethod::Dense : NormMethod::Iterative;
    if(method == NormMethod::Dense) {
        if(op.dim > engine_limits().dense_limit) throw Error(ErrorCode::DimensionCap, "dense restricted norm above the dense limit");
        return restricted_norm_dense(op, gs);
    }
    try {
        return restricted_norm_iterative(op, gs, rel_tol);
    } catch(const Error &e) {
        if(e.code() == ErrorCode::NotConverged && op.dim <= engine_limits().dense_limit) return restricted_norm_dense(op, gs);
        throw;
    }
}

} // namespace dllab
