#include "dllab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dllab/entanglement.hpp"

namespace dllab {

std::int64_t ModelDescriptor::get(const std::string &key, std::int64_t fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::int64_t ModelDescriptor::require(const std::string &key) const {
    auto it = params.find(key);
    if(it == params.end()) throw Error(ErrorCode::InvalidArgument, "model '" + name + "' needs parameter '" + key + "'");
    return it->second;
}

std::array<Matrix, 3> spin_operators(int d) {
    if(d < 2) throw Error(ErrorCode::InvalidArgument, "spin operators need d >= 2");
    const double s = (d - 1) / 2.0;
    Matrix sp      = Matrix::Zero(d, d);
    Matrix sz      = Matrix::Zero(d, d);
    for(int i = 0; i < d; ++i) {
        const double m = s - i;
        sz(i, i)       = m;
        // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and |m+1> sits at index i-1
        if(i > 0) sp(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
    }
    const Matrix sm = sp.adjoint();
    const Matrix sx = 0.5 * (sp + sm);
    const Matrix sy = Complex(0, -0.5) * (sp - sm);
    return {sx, sy, sz};
}

Matrix two_site_dot(int d) {
    const auto s = spin_operators(d);
    Matrix out   = Matrix::Zero(d * d, d * d);
    for(const auto &a : s)
        for(int i = 0; i < d; ++i)
            for(int j = 0; j < d; ++j) out.block(i * d, j * d, d, d) += a(i, j) * a;
    return out;
}

Matrix singlet_projector() { return 0.25 * Matrix::Identity(4, 4) - two_site_dot(2); }

Matrix aklt_projector() {
    const Matrix ss = two_site_dot(3);
    return 0.5 * ss + ss * ss / 6.0 + Matrix::Identity(9, 9) / 3.0;
}

namespace {

    Model pinning(const ModelDescriptor &desc) {
        const int n = static_cast<int>(desc.require("n"));
        if(n < 1) throw Error(ErrorCode::InvalidArgument, "pinning needs n >= 1");
        Matrix one     = Matrix::Zero(2, 2);
        one(1, 1)      = 1.0;
        std::vector<LocalTerm> terms;
        for(int i = 0; i < n; ++i) terms.push_back({{i}, one, true});
        Model m;
        m.hamiltonian = std::make_shared<HamiltonianSpec>(SiteSpace(n, 2, Geometry::chain(false)), std::move(terms));
        m.expected    = {1, 1.0, "exact"};
        return m;
    }

    std::vector<LocalTerm> bond_terms(int n, bool periodic, const Matrix &q) {
        std::vector<LocalTerm> terms;
        for(int i = 0; i + 1 < n; ++i) terms.push_back({{i, i + 1}, q, true});
        // wrap bond keeps the (n-1, 0) order so the matrix needs no permutation
        if(periodic) terms.push_back({{n - 1, 0}, q, true});
        return terms;
    }

    Model heisenberg(const ModelDescriptor &desc) {
        const int n          = static_cast<int>(desc.require("n"));
        const bool periodic  = desc.get("periodic", 0) != 0;
        if(n < 2 || (periodic && n < 3)) throw Error(ErrorCode::InvalidArgument, "heisenberg-ferro needs n >= 2 (n >= 3 periodic)");
        Model m;
        m.hamiltonian = std::make_shared<HamiltonianSpec>(SiteSpace(n, 2, Geometry::chain(periodic)), bond_terms(n, periodic, singlet_projector()));
        // one-magnon band bottom: 1 - cos(π/n) open, 1 - cos(2π/n) periodic
        const double gap = 1.0 - std::cos((periodic ? 2.0 : 1.0) * std::numbers::pi / n);
        m.expected       = {n + 1, gap, "exact"};
        return m;
    }

    Model aklt(const ModelDescriptor &desc) {
        const int n         = static_cast<int>(desc.require("n"));
        const bool periodic = desc.get("periodic", 0) != 0;
        if(n < 2 || (periodic && n < 3)) throw Error(ErrorCode::InvalidArgument, "aklt needs n >= 2 (n >= 3 periodic)");
        Model m;
        m.hamiltonian = std::make_shared<HamiltonianSpec>(SiteSpace(n, 3, Geometry::chain(periodic)), bond_terms(n, periodic, aklt_projector()));
        m.expected    = {periodic ? 1 : 4, std::nullopt, "exact degeneracy"};
        return m;
    }

    Model toric(const ModelDescriptor &desc) {
        const int lx = static_cast<int>(desc.require("lx"));
        const int ly = static_cast<int>(desc.require("ly"));
        if(lx < 2 || ly < 2) throw Error(ErrorCode::InvalidArgument, "toric-code torus needs lx, ly >= 2");
        const Matrix x = (Matrix(2, 2) << 0, 1, 1, 0).finished();
        const Matrix z = (Matrix(2, 2) << 1, 0, 0, -1).finished();
        auto four      = [](const Matrix &p) {
            Matrix out = Matrix::Ones(1, 1);
            for(int i = 0; i < 4; ++i) {
                Matrix next(out.rows() * 2, out.cols() * 2);
                for(Eigen::Index a = 0; a < out.rows(); ++a)
                    for(Eigen::Index b = 0; b < out.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = out(a, b) * p;
                out = next;
            }
            return out;
        };
        const Matrix star  = 0.5 * (Matrix::Identity(16, 16) - four(x));
        const Matrix plaq  = 0.5 * (Matrix::Identity(16, 16) - four(z));
        std::vector<LocalTerm> terms;
        for(int y = 0; y < ly; ++y)
            for(int xx = 0; xx < lx; ++xx) {
                std::vector<int> s = {torus_h_edge(lx, ly, xx, y), torus_h_edge(lx, ly, xx - 1, y), torus_v_edge(lx, ly, xx, y),
                                      torus_v_edge(lx, ly, xx, y - 1)};
                std::sort(s.begin(), s.end());
                terms.push_back({s, star, true});
            }
        for(int y = 0; y < ly; ++y)
            for(int xx = 0; xx < lx; ++xx) {
                std::vector<int> s = {torus_h_edge(lx, ly, xx, y), torus_h_edge(lx, ly, xx, y + 1), torus_v_edge(lx, ly, xx, y),
                                      torus_v_edge(lx, ly, xx + 1, y)};
                std::sort(s.begin(), s.end());
                terms.push_back({s, plaq, true});
            }
        Model m;
        m.hamiltonian = std::make_shared<HamiltonianSpec>(SiteSpace(2 * lx * ly, 2, Geometry::torus(lx, ly)), std::move(terms));
        m.expected    = {4, 2.0, "exact"};
        return m;
    }

} // namespace

Model build_parent_random(int n, int d, int bond, std::uint64_t seed) {
    if(n < 3 || d < 2 || bond < 1 || bond > d)
        throw Error(ErrorCode::InvalidArgument, "random-parent needs n >= 3, d >= 2, 1 <= bond <= d");
    const SiteSpace sites(n, d, Geometry::chain(false));
    check_dimension(sites);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto bond_dim = [&](int b) -> Eigen::Index {
        if(b == 0 || b == n) return 1;
        const auto left  = checked_pow(static_cast<std::uint64_t>(d), b);
        const auto right = checked_pow(static_cast<std::uint64_t>(d), n - b);
        return static_cast<Eigen::Index>(std::min<std::uint64_t>({static_cast<std::uint64_t>(bond), left, right}));
    };

    // Sweep left to right; amplitudes are stored as (prefix, bond) row-major.
    Vector psi = Vector::Ones(1);
    Eigen::Index prefix = 1;
    for(int i = 0; i < n; ++i) {
        const Eigen::Index dl = bond_dim(i), dr = bond_dim(i + 1);
        std::vector<Matrix> tensor(d, Matrix(dl, dr));
        for(int s = 0; s < d; ++s)
            for(Eigen::Index a = 0; a < dl; ++a)
                for(Eigen::Index b = 0; b < dr; ++b) tensor[s](a, b) = Complex(normal(rng), normal(rng));
        Vector next = Vector::Zero(prefix * d * dr);
        for(Eigen::Index p = 0; p < prefix; ++p) {
            const Eigen::RowVectorXcd row = psi.segment(p * dl, dl).transpose();
            for(int s = 0; s < d; ++s) next.segment((p * d + s) * dr, dr) = (row * tensor[s]).transpose();
        }
        psi = std::move(next);
        prefix *= d;
    }
    psi.normalize();

    Model m;
    m.descriptor = {"random-parent", {{"n", n}, {"d", d}, {"bond", bond}, {"seed", static_cast<std::int64_t>(seed)}}};
    std::vector<LocalTerm> terms;
    const auto local = static_cast<Eigen::Index>(d * d);
    for(int i = 0; i + 1 < n; ++i) {
        const Matrix rho = reduced_density_matrix(psi, sites, {i, i + 1});
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
        const double top = es.eigenvalues().maxCoeff();
        Matrix q         = Matrix::Identity(local, local);
        for(Eigen::Index c = 0; c < local; ++c)
            if(es.eigenvalues()(c) > 1e-12 * top) q -= es.eigenvectors().col(c) * es.eigenvectors().col(c).adjoint();
        if(q.norm() < 1e-8) {
            m.warnings.push_back("bond (" + std::to_string(i) + "," + std::to_string(i + 1) + "): full-rank reduced state, term dropped");
            continue;
        }
        terms.push_back({{i, i + 1}, 0.5 * (q + q.adjoint()), true});
    }
    if(terms.empty()) throw Error(ErrorCode::ZeroTerm, "random-parent: every term vanished");
    m.hamiltonian  = std::make_shared<HamiltonianSpec>(sites, std::move(terms));
    m.target_state = psi;
    m.expected.source = "measured";
    return m;
}

Model build_model(const ModelDescriptor &desc) {
    Model m;
    if(desc.name == "pinning")
        m = pinning(desc);
    else if(desc.name == "heisenberg-ferro")
        m = heisenberg(desc);
    else if(desc.name == "aklt")
        m = aklt(desc);
    else if(desc.name == "toric-code")
        m = toric(desc);
    else if(desc.name == "random-parent")
        m = build_parent_random(static_cast<int>(desc.require("n")), static_cast<int>(desc.require("d")),
                                static_cast<int>(desc.require("bond")), static_cast<std::uint64_t>(desc.get("seed", 0)));
    else
        throw Error(ErrorCode::InvalidArgument, "unknown model '" + desc.name + "'");
    m.descriptor = desc;
    return m;
}

std::vector<ModelDescriptor> model_catalog() {
    return {
        {"pinning", {{"n", 4}}},
        {"heisenberg-ferro", {{"n", 8}, {"periodic", 0}}},
        {"aklt", {{"n", 6}, {"periodic", 1}}},
        {"toric-code", {{"lx", 2}, {"ly", 2}}},
        {"random-parent", {{"n", 6}, {"d", 3}, {"bond", 2}, {"seed", 7}}},
    };
}

FactCheck check_expected(const Model &model, const GroundSpaceData &gs, double gap_tol) {
    FactCheck f;
    if(model.expected.degeneracy) f.degeneracy_ok = gs.degeneracy() == *model.expected.degeneracy;
    if(model.expected.gap) f.gap_ok = std::abs(gs.gap - *model.expected.gap) <= gap_tol;
    if(model.target_state && gs.degeneracy() == 1) {
        f.target_overlap = std::abs(gs.ground_basis.col(0).dot(*model.target_state));
        f.target_ok      = *f.target_overlap >= 1.0 - 1e-9;
    }
    return f;
}

} // namespace dllab
