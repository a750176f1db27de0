#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "dllab/types.hpp"

namespace dllab {

enum class GeometryKind { ChainOpen, ChainPeriodic, Torus2d, Custom };

const char *to_string(GeometryKind kind);
GeometryKind geometry_kind_from_string(const std::string &s);

struct Geometry {
    GeometryKind kind = GeometryKind::ChainOpen;
    int lx = 0; // torus only
    int ly = 0;
    std::vector<std::pair<int, int>> edges; // custom-adjacency only

    static Geometry chain(bool periodic) { return {periodic ? GeometryKind::ChainPeriodic : GeometryKind::ChainOpen, 0, 0, {}}; }
    static Geometry torus(int lx, int ly) { return {GeometryKind::Torus2d, lx, ly, {}}; }
    static Geometry custom(std::vector<std::pair<int, int>> edges) { return {GeometryKind::Custom, 0, 0, std::move(edges)}; }
};

// Torus qubits live on edges: horizontal edge (x,y) has index 2*(y*lx+x),
// vertical edge (x,y) has index 2*(y*lx+x)+1. Two edge qubits are adjacent when
// they share a lattice vertex.
int torus_h_edge(int lx, int ly, int x, int y);
int torus_v_edge(int lx, int ly, int x, int y);

/// n particles of uniform local dimension d arranged on a geometry.
class SiteSpace {
  public:
    SiteSpace(int n, int d, Geometry geometry);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int d() const noexcept { return d_; }
    [[nodiscard]] std::uint64_t dim() const noexcept { return dim_; }
    [[nodiscard]] const Geometry &geometry() const noexcept { return geometry_; }
    [[nodiscard]] const std::vector<std::vector<int>> &adjacency() const noexcept { return adjacency_; }
    [[nodiscard]] bool is_chain() const noexcept {
        return geometry_.kind == GeometryKind::ChainOpen || geometry_.kind == GeometryKind::ChainPeriodic;
    }
    [[nodiscard]] bool is_open_chain() const noexcept { return geometry_.kind == GeometryKind::ChainOpen; }

    // Sites that are connected through the adjacency graph.
    [[nodiscard]] bool connected(const std::vector<int> &sites) const;
    // Graph distance between two site sets (0 if they intersect).
    [[nodiscard]] int distance(const std::vector<int> &a, const std::vector<int> &b) const;

    bool operator==(const SiteSpace &other) const;

  private:
    int n_;
    int d_;
    std::uint64_t dim_;
    Geometry geometry_;
    std::vector<std::vector<int>> adjacency_;
};

std::uint64_t checked_pow(std::uint64_t base, int exp); // throws DimensionCap on overflow

/// A Hermitian operator acting on an ordered list of distinct sites.
struct LocalTerm {
    std::vector<int> support;
    Matrix matrix;
    bool is_projector = false;

    [[nodiscard]] int k() const { return static_cast<int>(support.size()); }
    [[nodiscard]] int leftmost() const;
};

// Validates shape, support range, Hermiticity and the projector flag.
void validate_term(const LocalTerm &term, const SiteSpace &sites, std::size_t index);

class HamiltonianSpec {
  public:
    HamiltonianSpec(SiteSpace sites, std::vector<LocalTerm> terms);

    [[nodiscard]] const SiteSpace &sites() const noexcept { return sites_; }
    [[nodiscard]] const std::vector<LocalTerm> &terms() const noexcept { return terms_; }
    [[nodiscard]] std::size_t m() const noexcept { return terms_.size(); }
    [[nodiscard]] int locality() const; // max support size k
    [[nodiscard]] bool all_projectors() const;
    [[nodiscard]] double norm_estimate() const; // sum of term operator norms

  private:
    SiteSpace sites_;
    std::vector<LocalTerm> terms_;
};

struct GapScaleReport {
    double max_term_norm = 0.0;                 // K
    std::optional<double> input_gap;            // tau
    std::optional<double> guaranteed_gap_bound; // tau / K
    std::vector<double> term_shifts;            // smallest eigenvalue removed per term
};

/// Replaces every term by the projector onto the strictly positive part of its
/// shifted spectrum. `tol` is relative to each term's largest shifted
/// eigenvalue; pass `input_gap` to get the rescaled gap guarantee.
std::pair<HamiltonianSpec, GapScaleReport> projectorize(const HamiltonianSpec &h, double tol = 1e-12,
                                                        std::optional<double> input_gap = std::nullopt);

struct LayerPartition {
    std::vector<std::vector<std::size_t>> layers;
    [[nodiscard]] std::size_t g() const noexcept { return layers.size(); }
};

bool supports_intersect(const std::vector<int> &a, const std::vector<int> &b);

/// Greedy coloring of the term-conflict graph in ascending term index.
/// Within each layer terms are ordered by ascending leftmost support site.
LayerPartition partition_layers(const HamiltonianSpec &h);

bool layer_partition_valid(const HamiltonianSpec &h, const LayerPartition &p);

} // namespace dllab
