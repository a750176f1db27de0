#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "dllab/state.hpp"

namespace dllab {

/// The layered alternating-projection operator A = Π_g ⋯ Π_1, where Π_j is the
/// product of the complements P_i = 1 - Q_i over the terms of layer j. Π_1 is
/// applied first.
class DLOperator {
  public:
    explicit DLOperator(std::shared_ptr<const HamiltonianSpec> h);
    DLOperator(std::shared_ptr<const HamiltonianSpec> h, LayerPartition partition);

    [[nodiscard]] const HamiltonianSpec &hamiltonian() const noexcept { return *h_; }
    [[nodiscard]] const LayerPartition &partition() const noexcept { return partition_; }
    [[nodiscard]] std::size_t g() const noexcept { return partition_.g(); }
    [[nodiscard]] int k() const { return h_->locality(); }
    [[nodiscard]] const Matrix &complement(std::size_t term) const { return complements_.at(term); }

    // One projector P_term applied in place.
    void apply_projector(std::size_t term, Vector &psi) const;
    // Π_layer applied in place.
    void apply_layer(std::size_t layer, Vector &psi) const;

    [[nodiscard]] Vector apply(const Vector &psi, int power = 1) const;
    [[nodiscard]] Vector apply_adjoint(const Vector &psi, int power = 1) const;
    [[nodiscard]] LinearOperator as_operator(int power = 1) const;

  private:
    std::shared_ptr<const HamiltonianSpec> h_;
    LayerPartition partition_;
    std::vector<Matrix> complements_;
};

inline Vector apply_dl(const DLOperator &a, const Vector &psi) { return a.apply(psi); }

/// Shrinkage bound on ||A restricted to the excited space||.
/// one_d: the two-layer nearest-neighbour open-chain bound (ε/2+1)^(-1/3).
/// Otherwise f = (g-1) k^g and the bound is (ε/f+1)^(-1/3). g = 1 gives 0.
double dl_bound(double epsilon, int k, int g, bool one_d);

/// Whether the two-layer chain bound applies to this Hamiltonian and partition.
bool is_one_d_chain(const HamiltonianSpec &h, const LayerPartition &p);

/// dl_bound evaluated for this operator and gap.
double dl_bound_for(const DLOperator &a, double epsilon);

struct DLReport {
    double epsilon            = 0.0;
    double f_bound            = 0.0; // f(k,g) used; 0 when g = 1
    double theoretical_bound  = 0.0;
    double measured_shrinkage = 0.0;
    std::vector<double> convergence_trace;
    bool pass = false;
};

constexpr double kInequalityTol = 1e-9;
constexpr double kIdentityTol   = 1e-12;

DLReport measure_shrinkage(const DLOperator &a, const GroundSpaceData &gs, NormMethod method = NormMethod::Auto);

enum class PyramidVariant { Primary, Shifted };

/// One pyramid: the top projector (applied first) and its two neighbours in
/// the second layer. Missing neighbours at chain ends are absent.
struct Pyramid {
    std::optional<std::size_t> left;
    std::optional<std::size_t> right;
    std::size_t top = 0;
};

struct PyramidDecomposition {
    PyramidVariant variant = PyramidVariant::Primary;
    std::vector<std::size_t> leading; // second-layer projectors not in any pyramid, applied last
    std::vector<Pyramid> pyramids;    // Δ_1 ... Δ_m in operator order
    std::vector<std::size_t> remainder; // R: first-layer projectors outside pyramids, applied first

    [[nodiscard]] std::size_t m() const noexcept { return pyramids.size(); }
};

/// Both coverings of a two-layer nearest-neighbour chain. The product
/// (leading)Δ_1⋯Δ_m R equals A as an operator.
PyramidDecomposition pyramid_decompose(const DLOperator &a, PyramidVariant variant);

Vector apply_pyramids(const DLOperator &a, const PyramidDecomposition &p, const Vector &psi);

struct NormEnergy {
    double lhs     = 0.0; // ||(1-Y) X Y v||²
    double rhs     = 0.0; // ε(1-ε)
    double epsilon = 0.0; // 1 - ||XYv||²
};

NormEnergy norm_energy_check(const Matrix &x_proj, const Matrix &y_proj, const Vector &v);

/// r_ℓ = ||A^ℓ ψ - Π_gs ψ|| for ℓ = 1..l_max.
std::vector<double> converge(const DLOperator &a, const GroundSpaceData &gs, const Vector &psi, int l_max);

/// The scalar inequality m[1 - x^(1/m)] <= (1-x)/sqrt(x).
double root_inequality_gap(double x, int m);

} // namespace dllab
