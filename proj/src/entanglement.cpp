#include "dllab/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace dllab {

std::vector<int> CutSpec::left_sites(const SiteSpace &sites) const {
    validate(sites);
    if(kind == Kind::Contiguous) {
        std::vector<int> l(static_cast<std::size_t>(position));
        std::iota(l.begin(), l.end(), 0);
        return l;
    }
    std::vector<int> l = left;
    std::sort(l.begin(), l.end());
    return l;
}

void CutSpec::validate(const SiteSpace &sites) const {
    if(kind == Kind::Contiguous) {
        if(position < 1 || position > sites.n() - 1)
            throw Error(ErrorCode::InvalidArgument, "contiguous cut position must lie in [1, n-1]");
        return;
    }
    std::set<int> uniq(left.begin(), left.end());
    if(uniq.empty() || static_cast<int>(uniq.size()) >= sites.n() || uniq.size() != left.size())
        throw Error(ErrorCode::InvalidArgument, "subset cut must be a proper non-empty set of distinct sites");
    for(int s : uniq)
        if(s < 0 || s >= sites.n()) throw Error(ErrorCode::InvalidArgument, "subset cut site out of range");
}

namespace {

    struct BipartiteIndex {
        std::vector<std::uint64_t> row_of; // per site: stride within the left block (0 if right)
        std::vector<std::uint64_t> col_of;
        std::uint64_t rows = 1, cols = 1;
    };

    BipartiteIndex bipartite_index(const SiteSpace &sites, const std::vector<int> &left) {
        BipartiteIndex bi;
        const int n = sites.n();
        const auto d = static_cast<std::uint64_t>(sites.d());
        std::vector<bool> in_left(n, false);
        for(int s : left) in_left[s] = true;
        bi.row_of.assign(n, 0);
        bi.col_of.assign(n, 0);
        for(int s = n - 1; s >= 0; --s) {
            if(in_left[s]) {
                bi.row_of[s] = bi.rows;
                bi.rows *= d;
            } else {
                bi.col_of[s] = bi.cols;
                bi.cols *= d;
            }
        }
        return bi;
    }

    bool is_prefix(const std::vector<int> &left) {
        for(std::size_t i = 0; i < left.size(); ++i)
            if(left[i] != static_cast<int>(i)) return false;
        return true;
    }

    // Inverse of cut_matrix.
    Vector embed_bipartite(const Matrix &M, const SiteSpace &sites, const std::vector<int> &left) {
        const auto bi  = bipartite_index(sites, left);
        const auto dim = sites.dim();
        Vector out(static_cast<Eigen::Index>(dim));
        const auto d = static_cast<std::uint64_t>(sites.d());
        for(std::uint64_t idx = 0; idx < dim; ++idx) {
            std::uint64_t rem = idx, r = 0, c = 0;
            for(int s = sites.n() - 1; s >= 0; --s) {
                const auto digit = rem % d;
                rem /= d;
                r += digit * bi.row_of[s];
                c += digit * bi.col_of[s];
            }
            out(static_cast<Eigen::Index>(idx)) = M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
        return out;
    }

    std::uint64_t saturating_pow(std::uint64_t base, int exp) {
        std::uint64_t r = 1;
        for(int i = 0; i < exp; ++i) {
            if(r > std::numeric_limits<std::uint64_t>::max() / base) return std::numeric_limits<std::uint64_t>::max();
            r *= base;
        }
        return r;
    }

    void require_normalized(const Vector &psi) {
        if(std::abs(psi.norm() - 1.0) > 1e-10) throw Error(ErrorCode::InvalidArgument, "state must be normalized to 1e-10");
    }

} // namespace

Matrix cut_matrix(const Vector &psi, const SiteSpace &sites, const std::vector<int> &left) {
    if(static_cast<std::uint64_t>(psi.size()) != sites.dim()) throw Error(ErrorCode::DimensionMismatch, "state does not match site space");
    const auto bi = bipartite_index(sites, left);
    const auto rows = static_cast<Eigen::Index>(bi.rows), cols = static_cast<Eigen::Index>(bi.cols);
    if(is_prefix(left)) {
        // row-major reshape of the amplitude array
        return Eigen::Map<const Matrix>(psi.data(), cols, rows).transpose();
    }
    Matrix M(rows, cols);
    const auto d = static_cast<std::uint64_t>(sites.d());
    for(std::uint64_t idx = 0; idx < sites.dim(); ++idx) {
        std::uint64_t rem = idx, r = 0, c = 0;
        for(int s = sites.n() - 1; s >= 0; --s) {
            const auto digit = rem % d;
            rem /= d;
            r += digit * bi.row_of[s];
            c += digit * bi.col_of[s];
        }
        M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = psi(static_cast<Eigen::Index>(idx));
    }
    return M;
}

double SchmidtData::best_rank_overlap(int r) const {
    if(r < 1) return 0.0;
    const auto take = std::min<Eigen::Index>(r, eigenvalues.size());
    return std::sqrt(std::max(0.0, eigenvalues.head(take).sum()));
}

double entropy_of(const RealVec &p) {
    double s = 0.0;
    for(Eigen::Index i = 0; i < p.size(); ++i)
        if(p(i) > 0) s -= p(i) * std::log(p(i));
    return s;
}

double von_neumann_entropy(const Matrix &rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return entropy_of(es.eigenvalues());
}

SchmidtData schmidt(const Vector &psi, const SiteSpace &sites, const CutSpec &cut, double tol) {
    require_normalized(psi);
    const Matrix M = cut_matrix(psi, sites, cut.left_sites(sites));
    Eigen::BDCSVD<Matrix> svd(M);
    SchmidtData sd;
    sd.coefficients = svd.singularValues();
    sd.eigenvalues  = sd.coefficients.array().square();
    const double top = sd.coefficients.size() > 0 ? sd.coefficients(0) : 0.0;
    sd.rank          = 0;
    for(Eigen::Index j = 0; j < sd.coefficients.size(); ++j)
        if(sd.coefficients(j) > tol * top) ++sd.rank;
    sd.entropy = entropy_of(sd.eigenvalues);
    return sd;
}

int schmidt_rank(const Vector &psi, const SiteSpace &sites, const CutSpec &cut, double tol) {
    const double nrm = psi.norm();
    if(nrm == 0.0) return 0;
    return schmidt(psi / nrm, sites, cut, tol).rank;
}

ProductOverlap max_product_overlap(const Vector &psi, const SiteSpace &sites, const CutSpec &cut) {
    require_normalized(psi);
    const auto left = cut.left_sites(sites);
    const Matrix M  = cut_matrix(psi, sites, left);
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ProductOverlap po;
    po.alpha1        = svd.singularValues()(0);
    po.left          = svd.matrixU().col(0);
    po.right         = svd.matrixV().col(0).conjugate();
    po.product_state = embed_bipartite(po.left * po.right.transpose(), sites, left);
    return po;
}

Matrix reduced_density_matrix(const Vector &psi, const SiteSpace &sites, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    for(int s : keep)
        if(s < 0 || s >= sites.n()) throw Error(ErrorCode::InvalidArgument, "reduced density matrix site out of range");
    const Matrix M = cut_matrix(psi, sites, keep);
    return M * M.adjoint();
}

std::uint64_t rank_growth_factor(const HamiltonianSpec &h, const CutSpec &cut) {
    const auto left = cut.left_sites(h.sites());
    std::set<int> L(left.begin(), left.end());
    const auto d        = static_cast<std::uint64_t>(h.sites().d());
    std::uint64_t factor = 1;
    for(const auto &t : h.terms()) {
        int a = 0, b = 0;
        for(int s : t.support) (L.count(s) ? a : b)++;
        if(a > 0 && b > 0) {
            const auto f = std::min(saturating_pow(d, 2 * a), saturating_pow(d, 2 * b));
            factor       = factor > std::numeric_limits<std::uint64_t>::max() / f ? std::numeric_limits<std::uint64_t>::max() : factor * f;
        }
    }
    return factor;
}

RankGrowth rank_growth(const DLOperator &a, const Vector &psi0, const CutSpec &cut, int l) {
    if(cut.kind != CutSpec::Kind::Contiguous) throw Error(ErrorCode::InvalidArgument, "rank growth needs a contiguous cut");
    if(l < 0) throw Error(ErrorCode::InvalidArgument, "step count must be >= 0");
    const auto &sites = a.hamiltonian().sites();
    if(schmidt_rank(psi0, sites, cut) != 1) throw Error(ErrorCode::InvalidArgument, "initial state must be a product across the cut");
    RankGrowth rg;
    rg.factor = rank_growth_factor(a.hamiltonian(), cut);
    rg.ranks.push_back(1);
    Vector v = psi0;
    for(int j = 1; j <= l; ++j) {
        v = a.apply(v);
        const int r = schmidt_rank(v, sites, cut);
        rg.ranks.push_back(r);
        if(static_cast<std::uint64_t>(r) > saturating_pow(rg.factor, j)) rg.pass = false;
    }
    return rg;
}

std::vector<TailRow> tail_bound_check(const Vector &gs_state, const SiteSpace &sites, const CutSpec &cut, double mu, double delta,
                                      int l_max, std::uint64_t factor) {
    if(!(mu > 0) || mu > 1 + 1e-12) throw Error(ErrorCode::InvalidArgument, "overlap mu must lie in (0, 1]");
    if(!(delta > 0) || delta > 1) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1]");
    if(factor < 1) throw Error(ErrorCode::InvalidArgument, "rank factor must be >= 1");
    const SchmidtData sd = schmidt(gs_state, sites, cut);
    const auto count     = static_cast<std::uint64_t>(sd.eigenvalues.size());
    std::vector<TailRow> rows;
    for(int l = 1; l <= l_max; ++l) {
        TailRow row;
        row.l            = l;
        const auto keep  = std::min(saturating_pow(factor, l), count);
        const double hd  = sd.eigenvalues.head(static_cast<Eigen::Index>(keep)).sum();
        const double sh  = std::pow(1.0 - delta, 2.0 * l);
        row.tail         = keep >= count ? 0.0 : sd.eigenvalues.tail(static_cast<Eigen::Index>(count - keep)).sum();
        row.bound        = sh / (mu * mu);
        row.head         = std::sqrt(std::max(0.0, hd));
        row.overlap      = mu / std::sqrt(mu * mu + sh);
        row.pass         = row.tail <= row.bound + kInequalityTol;
        rows.push_back(row);
    }
    return rows;
}

double saturating_step_entropy(int big_d, double big_k, double theta) {
    const double ln_d     = std::log(static_cast<double>(big_d));
    const double ln_dm1   = std::log(static_cast<double>(big_d - 1));
    const double ln_k     = std::log(big_k);
    const double ln_theta = std::log(theta);
    auto tail = [&](long l) { return std::min(1.0, std::exp(ln_k + static_cast<double>(l) * ln_theta)); };

    struct Pool {
        double mass;
        double log_size;
        [[nodiscard]] double log_weight() const { return mass > 0 ? std::log(mass) - log_size : -std::numeric_limits<double>::infinity(); }
    };
    auto log_add = [](double a, double b) {
        const double hi = std::max(a, b), lo = std::min(a, b);
        return hi + std::log1p(std::exp(lo - hi));
    };

    std::vector<Pool> pools;
    auto push = [&](Pool p) {
        pools.push_back(p);
        // Pool adjacent violators so that per-element weights never increase.
        while(pools.size() >= 2 && pools[pools.size() - 2].log_weight() < pools.back().log_weight()) {
            Pool top = pools.back();
            pools.pop_back();
            pools.back().mass += top.mass;
            pools.back().log_size = log_add(pools.back().log_size, top.log_size);
        }
    };

    push({1.0 - tail(1), ln_d});
    for(long l = 1; l < 1'000'000; ++l) {
        const double t_here = tail(l);
        const double t_next = tail(l + 1);
        push({t_here - t_next, static_cast<double>(l) * ln_d + ln_dm1});
        if(t_next < 1e-300) break;
    }
    double s = 0.0;
    for(const auto &p : pools)
        if(p.mass > 0) s += p.mass * (p.log_size - std::log(p.mass));
    return s;
}

StepEntropy step_entropy_bound(int big_d, double big_k, double theta) {
    if(big_d < 2) throw Error(ErrorCode::InvalidArgument, "D must be >= 2");
    if(!(big_k >= 1)) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
    if(!(theta > 0 && theta < 1)) throw Error(ErrorCode::InvalidArgument, "theta must lie in (0, 1)");
    StepEntropy se;
    se.bound = 3.0 * ((std::log(big_k / (1.0 - theta)) + 1.0) / std::log(1.0 / theta) + 2.0) * std::log(static_cast<double>(big_d));
    se.oracle_entropy = saturating_step_entropy(big_d, big_k, theta);
    const double cutoff = std::log((1.0 - theta) * theta / std::exp(1.0));
    int l               = 1;
    while(std::log(big_k) + l * std::log(theta) > cutoff) ++l;
    se.first_small_block = l;
    return se;
}

double area_law_delta(const DLOperator &a, double gap) {
    const double eps = std::min(gap, 1.0);
    return std::min(1.0 - dl_bound_for(a, eps), 1.0 / 6.0);
}

AreaLawCertificate area_law_certificate(const DLOperator &a, const GroundSpaceData &gs, const CutSpec &cut) {
    const auto &h     = a.hamiltonian();
    const auto &sites = h.sites();
    if(gs.degeneracy() != 1) throw Error(ErrorCode::DegenerateGround, "area-law certificate needs a unique ground state");
    if(!sites.is_chain()) throw Error(ErrorCode::Geometry, "area-law certificate needs a 1D chain");
    if(cut.kind != CutSpec::Kind::Contiguous) throw Error(ErrorCode::InvalidArgument, "area-law certificate needs a contiguous cut");

    const Vector omega = gs.ground_basis.col(0);
    AreaLawCertificate c;
    c.cut              = cut;
    c.mu_measured      = max_product_overlap(omega, sites, cut).alpha1;
    c.delta            = area_law_delta(a, gs.gap);
    c.entropy_measured = schmidt(omega, sites, cut).entropy;
    const auto factor  = rank_growth_factor(h, cut);
    c.effective_d      = std::max(static_cast<double>(sites.d()), std::sqrt(static_cast<double>(factor)));

    const double ln_d = std::log(c.effective_d);
    const double mu2  = c.mu_measured * c.mu_measured;
    c.overlap_entropy_bound    = (3.0 / c.delta) * (std::log(1.0 / (mu2 * c.delta)) + 2.0) * ln_d;
    c.overlap_entropy_pass     = c.entropy_measured <= c.overlap_entropy_bound + kInequalityTol;

    c.area_bound_log10 = std::log10(10.0 / c.delta) + (4.0 / c.delta) * std::log10(c.effective_d) + 2.0 * std::log10(ln_d);
    if(c.area_bound_log10 < 300.0) c.area_bound = std::pow(10.0, c.area_bound_log10);
    c.area_bound_pass = c.entropy_measured <= 0.0 || std::log10(c.entropy_measured) <= c.area_bound_log10 + 1e-12;

    c.log10_l0 = (4.0 / c.delta) * std::log10(c.effective_d);
    if(c.log10_l0 < 300.0) {
        const double l0   = std::pow(10.0, c.log10_l0);
        c.worst_case_log10_mu = -l0 * std::log10(c.effective_d) + (l0 / 4.0) * std::log10(1.0 - c.delta);
    }
    return c;
}

std::vector<ShiftRow> shifted_cut_check(const Vector &gs_state, const SiteSpace &sites, const CutSpec &cut, int l) {
    if(cut.kind != CutSpec::Kind::Contiguous) throw Error(ErrorCode::InvalidArgument, "shifted cuts need a contiguous cut");
    cut.validate(sites);
    const int k = cut.position;
    if(l < 0 || k - l < 1 || k + l > sites.n() - 1) throw Error(ErrorCode::InvalidArgument, "shifted cut out of range");
    const double base = max_product_overlap(gs_state, sites, cut).alpha1;
    std::vector<ShiftRow> rows;
    for(int j = -l; j <= l; ++j) {
        ShiftRow r;
        r.j             = j;
        r.alpha_shifted = j == 0 ? base : max_product_overlap(gs_state, sites, CutSpec::contiguous(k + j)).alpha1;
        r.bound         = base * std::pow(static_cast<double>(sites.d()), std::abs(j));
        r.pass          = r.alpha_shifted <= r.bound + 1e-10;
        rows.push_back(r);
    }
    return rows;
}

} // namespace dllab
