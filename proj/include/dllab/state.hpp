#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "dllab/hamiltonian.hpp"

namespace dllab {

// Basis convention: site 0 is the most significant digit, so the full space is
// the Kronecker product site0 ⊗ site1 ⊗ ... and a term's local index orders
// its support the same way.

struct EngineLimits {
    std::uint64_t dense_limit = 1024;      // dense eigendecomposition at or below
    std::uint64_t hard_cap    = 1ull << 24; // absolute dimension cap

    // DLLAB_DENSE_LIMIT and DLLAB_DIM_CAP override the defaults.
    static EngineLimits from_env();
};

const EngineLimits &engine_limits();
void set_engine_limits(const EngineLimits &limits);

void check_dimension(const SiteSpace &sites);

/// Applies (M ⊗ 1_rest) by contracting only over the support indices.
Vector apply_local(const LocalTerm &term, const SiteSpace &sites, const Vector &psi);
void apply_local_inplace(const Matrix &m, std::span<const int> support, const SiteSpace &sites, Vector &psi);

Vector apply_hamiltonian(const HamiltonianSpec &h, const Vector &psi);
Matrix dense_hamiltonian(const HamiltonianSpec &h);

Vector random_state(const SiteSpace &sites, std::mt19937_64 &rng); // normalized
Vector basis_state(const SiteSpace &sites, const std::vector<int> &digits);
Vector product_state(const SiteSpace &sites, const std::vector<Vector> &local); // normalized

/// A linear operator on the full space in apply form.
struct LinearOperator {
    std::uint64_t dim = 0;
    std::function<Vector(const Vector &)> apply;
    std::function<Vector(const Vector &)> apply_adjoint;
};

struct Eigenpairs {
    RealVec values;                // ascending
    Matrix vectors;                // columns
    std::vector<double> residuals; // ||Hv - λv||
    bool dense = false;
};

/// Lowest `count` eigenpairs of a Hermitian operator by restarted Krylov
/// iteration. `deflate` columns (orthonormal) are projected out.
Eigenpairs lowest_eigenpairs(const std::function<Vector(const Vector &)> &op, std::uint64_t dim, int count,
                             double tol, const Matrix *deflate = nullptr, std::uint64_t seed = 12345);

/// Lowest `count` eigenpairs of Σ Q_i, ascending, with residuals.
Eigenpairs spectrum(const HamiltonianSpec &h, int count);

struct GroundSpaceData {
    double ground_energy = 0.0;
    double gap           = 0.0;
    Matrix ground_basis; // orthonormal columns
    [[nodiscard]] int degeneracy() const { return static_cast<int>(ground_basis.cols()); }
    [[nodiscard]] std::uint64_t dim() const { return static_cast<std::uint64_t>(ground_basis.rows()); }

    Vector project(const Vector &psi) const;            // Π_gs ψ
    Vector project_complement(const Vector &psi) const; // (1 - Π_gs) ψ
};

double ground_threshold(const HamiltonianSpec &h);

/// Orthonormal basis of the zero-energy space and the gap above it.
GroundSpaceData ground_space(const HamiltonianSpec &h);

struct FrustrationReport {
    bool frustration_free = true;
    std::vector<std::pair<std::size_t, int>> violations; // (term, ground vector)
    double max_violation = 0.0;
};

/// ||Q_i v|| <= tol for every term and every ground-basis vector.
FrustrationReport validate_frustration_free(const HamiltonianSpec &h, const GroundSpaceData &gs, double tol = 1e-8);

/// Σ_E exp(-q E²/2) |E><E|ψ>; requires the dense regime.
Vector gaussian_filter(const HamiltonianSpec &h, double q, const Vector &psi);
Vector gaussian_filter(const Eigenpairs &full, double q, const Vector &psi);

/// Full dense spectrum (throws DimensionCap above the dense limit).
Eigenpairs full_spectrum(const HamiltonianSpec &h);

/// Measured ||P_q - Π_gs|| from the full spectrum.
double gaussian_filter_error(const Eigenpairs &full, double q, double threshold);

enum class NormMethod { Auto, Iterative, Dense };

/// σ_max(op ∘ Π') where Π' = 1 - Σ|b><b| over the ground basis.
double restricted_norm(const LinearOperator &op, const GroundSpaceData &gs, NormMethod method = NormMethod::Auto,
                       double rel_tol = 1e-10);

/// Dense matrix of an operator in apply form (columns = images of basis vectors).
Matrix materialize(const LinearOperator &op);

} // namespace dllab
