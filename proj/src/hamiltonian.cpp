#include "dllab/hamiltonian.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

namespace dllab {

const char *to_string(ErrorCode code) {
    switch(code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::DimensionMismatch: return "dimension mismatch";
        case ErrorCode::NotHermitian: return "non-Hermitian term";
        case ErrorCode::ZeroTerm: return "zero term";
        case ErrorCode::DimensionCap: return "dimension cap exceeded";
        case ErrorCode::NotConverged: return "eigensolver did not converge";
        case ErrorCode::NotFrustrationFree: return "not frustration-free";
        case ErrorCode::DegenerateGround: return "degenerate ground space";
        case ErrorCode::Geometry: return "geometry error";
        case ErrorCode::Parse: return "parse error";
        case ErrorCode::Io: return "i/o error";
    }
    return "unknown error";
}

const char *to_string(CheckStatus s) {
    switch(s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::HypothesisNotMet: return "hypothesis-not-met";
    }
    return "fail";
}

const char *to_string(GeometryKind kind) {
    switch(kind) {
        case GeometryKind::ChainOpen: return "chain-open";
        case GeometryKind::ChainPeriodic: return "chain-periodic";
        case GeometryKind::Torus2d: return "torus-2d";
        case GeometryKind::Custom: return "custom-adjacency";
    }
    return "chain-open";
}

GeometryKind geometry_kind_from_string(const std::string &s) {
    if(s == "chain-open") return GeometryKind::ChainOpen;
    if(s == "chain-periodic") return GeometryKind::ChainPeriodic;
    if(s == "torus-2d") return GeometryKind::Torus2d;
    if(s == "custom-adjacency") return GeometryKind::Custom;
    throw Error(ErrorCode::Parse, "unknown geometry kind '" + s + "'");
}

int torus_h_edge(int lx, int ly, int x, int y) {
    x = ((x % lx) + lx) % lx;
    y = ((y % ly) + ly) % ly;
    return 2 * (y * lx + x);
}

int torus_v_edge(int lx, int ly, int x, int y) { return torus_h_edge(lx, ly, x, y) + 1; }

std::uint64_t checked_pow(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for(int i = 0; i < exp; ++i) {
        if(r > std::numeric_limits<std::uint64_t>::max() / 4 / base)
            throw Error(ErrorCode::DimensionCap, "Hilbert dimension " + std::to_string(base) + "^" + std::to_string(exp) +
                                                     " overflows");
        r *= base;
    }
    return r;
}

namespace {

    void add_edge(std::vector<std::vector<int>> &adj, int a, int b) {
        if(a == b) return;
        if(std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end()) adj[a].push_back(b);
        if(std::find(adj[b].begin(), adj[b].end(), a) == adj[b].end()) adj[b].push_back(a);
    }

} // namespace

SiteSpace::SiteSpace(int n, int d, Geometry geometry) : n_(n), d_(d), dim_(0), geometry_(std::move(geometry)) {
    if(n < 1) throw Error(ErrorCode::InvalidArgument, "particle count must be >= 1");
    if(d < 2) throw Error(ErrorCode::InvalidArgument, "local dimension must be >= 2");
    dim_ = checked_pow(static_cast<std::uint64_t>(d), n);
    adjacency_.assign(n, {});
    switch(geometry_.kind) {
        case GeometryKind::ChainOpen:
            for(int i = 0; i + 1 < n; ++i) add_edge(adjacency_, i, i + 1);
            break;
        case GeometryKind::ChainPeriodic:
            for(int i = 0; i + 1 < n; ++i) add_edge(adjacency_, i, i + 1);
            if(n > 2) add_edge(adjacency_, n - 1, 0);
            break;
        case GeometryKind::Torus2d: {
            const int lx = geometry_.lx, ly = geometry_.ly;
            if(lx < 2 || ly < 2) throw Error(ErrorCode::Geometry, "torus too small (Lx and Ly must be >= 2)");
            if(n != 2 * lx * ly)
                throw Error(ErrorCode::Geometry, "torus-2d with edge qubits needs n = 2*Lx*Ly = " + std::to_string(2 * lx * ly));
            for(int y = 0; y < ly; ++y)
                for(int x = 0; x < lx; ++x) {
                    // edges meeting at vertex (x,y)
                    const int star[4] = {torus_h_edge(lx, ly, x, y), torus_h_edge(lx, ly, x - 1, y),
                                         torus_v_edge(lx, ly, x, y), torus_v_edge(lx, ly, x, y - 1)};
                    for(int a = 0; a < 4; ++a)
                        for(int b = a + 1; b < 4; ++b) add_edge(adjacency_, star[a], star[b]);
                }
            break;
        }
        case GeometryKind::Custom:
            for(auto [a, b] : geometry_.edges) {
                if(a < 0 || b < 0 || a >= n || b >= n)
                    throw Error(ErrorCode::Geometry, "custom adjacency edge out of range");
                add_edge(adjacency_, a, b);
            }
            break;
    }
    for(auto &row : adjacency_) std::sort(row.begin(), row.end());
}

bool SiteSpace::connected(const std::vector<int> &sites) const {
    if(sites.size() <= 1) return true;
    std::set<int> want(sites.begin(), sites.end());
    std::set<int> seen{sites.front()};
    std::deque<int> queue{sites.front()};
    while(!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for(int nb : adjacency_[s])
            if(want.count(nb) && seen.insert(nb).second) queue.push_back(nb);
    }
    return seen.size() == want.size();
}

int SiteSpace::distance(const std::vector<int> &a, const std::vector<int> &b) const {
    std::vector<int> dist(n_, -1);
    std::deque<int> queue;
    for(int s : a) {
        dist[s] = 0;
        queue.push_back(s);
    }
    while(!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for(int nb : adjacency_[s])
            if(dist[nb] < 0) {
                dist[nb] = dist[s] + 1;
                queue.push_back(nb);
            }
    }
    int best = std::numeric_limits<int>::max();
    for(int s : b)
        if(dist[s] >= 0) best = std::min(best, dist[s]);
    return best;
}

bool SiteSpace::operator==(const SiteSpace &other) const {
    return n_ == other.n_ && d_ == other.d_ && geometry_.kind == other.geometry_.kind && geometry_.lx == other.geometry_.lx &&
           geometry_.ly == other.geometry_.ly && adjacency_ == other.adjacency_;
}

int LocalTerm::leftmost() const { return support.empty() ? 0 : *std::min_element(support.begin(), support.end()); }

void validate_term(const LocalTerm &term, const SiteSpace &sites, std::size_t index) {
    const std::string where = "term " + std::to_string(index) + ": ";
    if(term.support.empty()) throw Error(ErrorCode::InvalidArgument, where + "empty support");
    std::set<int> uniq;
    for(int s : term.support) {
        if(s < 0 || s >= sites.n()) throw Error(ErrorCode::InvalidArgument, where + "support index out of range");
        if(!uniq.insert(s).second) throw Error(ErrorCode::InvalidArgument, where + "repeated support index");
    }
    const auto local = static_cast<Eigen::Index>(checked_pow(sites.d(), term.k()));
    if(term.matrix.rows() != local || term.matrix.cols() != local)
        throw Error(ErrorCode::DimensionMismatch, where + "matrix must be d^k x d^k");
    const double scale = std::max(1.0, term.matrix.norm());
    if((term.matrix - term.matrix.adjoint()).norm() > 1e-10 * scale)
        throw Error(ErrorCode::NotHermitian, where + "matrix is not Hermitian");
    if(term.is_projector && (term.matrix * term.matrix - term.matrix).norm() > 1e-10 * scale)
        throw Error(ErrorCode::InvalidArgument, where + "flagged as projector but M^2 != M");
}

HamiltonianSpec::HamiltonianSpec(SiteSpace sites, std::vector<LocalTerm> terms)
    : sites_(std::move(sites)), terms_(std::move(terms)) {
    if(terms_.empty()) throw Error(ErrorCode::InvalidArgument, "Hamiltonian needs at least one term");
    for(std::size_t i = 0; i < terms_.size(); ++i) {
        validate_term(terms_[i], sites_, i);
        if(sites_.geometry().kind != GeometryKind::Custom && !sites_.connected(terms_[i].support))
            throw Error(ErrorCode::Geometry,
                        "term " + std::to_string(i) + ": support is not local in the " + to_string(sites_.geometry().kind) + " geometry");
    }
}

int HamiltonianSpec::locality() const {
    int k = 0;
    for(const auto &t : terms_) k = std::max(k, t.k());
    return k;
}

bool HamiltonianSpec::all_projectors() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const LocalTerm &t) { return t.is_projector; });
}

double HamiltonianSpec::norm_estimate() const {
    double s = 0.0;
    for(const auto &t : terms_) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(t.matrix, Eigen::EigenvaluesOnly);
        s += es.eigenvalues().cwiseAbs().maxCoeff();
    }
    return s;
}

std::pair<HamiltonianSpec, GapScaleReport> projectorize(const HamiltonianSpec &h, double tol, std::optional<double> input_gap) {
    if(!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "projectorize tolerance must be positive");
    GapScaleReport report;
    std::vector<LocalTerm> out;
    out.reserve(h.m());
    for(std::size_t i = 0; i < h.m(); ++i) {
        const auto &term = h.terms()[i];
        Eigen::SelfAdjointEigenSolver<Matrix> es(term.matrix);
        const RealVec &ev   = es.eigenvalues();
        const double shift  = ev(0);
        const double top    = ev(ev.size() - 1) - shift;
        const double thresh = tol * std::max(top, 0.0);
        if(top <= tol) throw Error(ErrorCode::ZeroTerm, "term " + std::to_string(i) + " is indistinguishable from zero");
        report.term_shifts.push_back(shift);
        report.max_term_norm = std::max(report.max_term_norm, top);

        const auto dim = term.matrix.rows();
        Matrix q       = Matrix::Zero(dim, dim);
        for(Eigen::Index j = 0; j < dim; ++j) {
            if(ev(j) - shift > thresh) {
                const auto v = es.eigenvectors().col(j);
                q.noalias() += v * v.adjoint();
            }
        }
        q = 0.5 * (q + q.adjoint()).eval();
        out.push_back({term.support, std::move(q), true});
    }
    if(input_gap) {
        report.input_gap            = *input_gap;
        report.guaranteed_gap_bound = *input_gap / report.max_term_norm;
    }
    return {HamiltonianSpec(h.sites(), std::move(out)), report};
}

bool supports_intersect(const std::vector<int> &a, const std::vector<int> &b) {
    for(int x : a)
        if(std::find(b.begin(), b.end(), x) != b.end()) return true;
    return false;
}

LayerPartition partition_layers(const HamiltonianSpec &h) {
    LayerPartition p;
    std::vector<std::set<int>> occupied;
    for(std::size_t i = 0; i < h.m(); ++i) {
        const auto &sup = h.terms()[i].support;
        std::size_t layer = 0;
        for(; layer < occupied.size(); ++layer) {
            bool clash = std::any_of(sup.begin(), sup.end(), [&](int s) { return occupied[layer].count(s) > 0; });
            if(!clash) break;
        }
        if(layer == occupied.size()) {
            occupied.emplace_back();
            p.layers.emplace_back();
        }
        occupied[layer].insert(sup.begin(), sup.end());
        p.layers[layer].push_back(i);
    }
    for(auto &layer : p.layers)
        std::stable_sort(layer.begin(), layer.end(),
                         [&](std::size_t a, std::size_t b) { return h.terms()[a].leftmost() < h.terms()[b].leftmost(); });
    return p;
}

bool layer_partition_valid(const HamiltonianSpec &h, const LayerPartition &p) {
    std::vector<int> seen(h.m(), 0);
    for(const auto &layer : p.layers) {
        for(std::size_t a = 0; a < layer.size(); ++a) {
            if(layer[a] >= h.m()) return false;
            ++seen[layer[a]];
            for(std::size_t b = a + 1; b < layer.size(); ++b)
                if(supports_intersect(h.terms()[layer[a]].support, h.terms()[layer[b]].support)) return false;
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

} // namespace dllab
