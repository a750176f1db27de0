#pragma once

#include <optional>
#include <vector>

#include "dllab/dl_operator.hpp"

namespace dllab {

/// A bipartition of the sites. Contiguous cuts at position i split the chain
/// into L = [0, i) and R = [i, n).
struct CutSpec {
    enum class Kind { Contiguous, Subset };
    Kind kind    = Kind::Contiguous;
    int position = 1;
    std::vector<int> left; // subset cuts only
    std::optional<int> window;

    static CutSpec contiguous(int position, std::optional<int> window = std::nullopt) {
        return {Kind::Contiguous, position, {}, window};
    }
    static CutSpec subset(std::vector<int> left) { return {Kind::Subset, 0, std::move(left), std::nullopt}; }

    [[nodiscard]] std::vector<int> left_sites(const SiteSpace &sites) const;
    void validate(const SiteSpace &sites) const;
};

/// Amplitudes reshaped as a (d^|L|) x (d^|R|) matrix; sites ascending on each side.
Matrix cut_matrix(const Vector &psi, const SiteSpace &sites, const std::vector<int> &left);

struct SchmidtData {
    RealVec coefficients; // α_j, non-increasing
    RealVec eigenvalues;  // λ_j = α_j²
    int rank       = 0;
    double entropy = 0.0; // natural log

    /// sqrt(Σ_{j<=r} λ_j): best overlap with a unit vector of Schmidt rank r.
    [[nodiscard]] double best_rank_overlap(int r) const;
};

constexpr double kRankThreshold = 1e-10;

double entropy_of(const RealVec &probabilities); // -Σ p ln p, 0 ln 0 = 0
double von_neumann_entropy(const Matrix &rho);

SchmidtData schmidt(const Vector &psi, const SiteSpace &sites, const CutSpec &cut, double tol = kRankThreshold);
int schmidt_rank(const Vector &psi, const SiteSpace &sites, const CutSpec &cut, double tol = kRankThreshold);

struct ProductOverlap {
    double alpha1 = 0.0;
    Vector left;          // |L_1>
    Vector right;         // |R_1>
    Vector product_state; // |L_1> ⊗ |R_1> in the full basis
};

ProductOverlap max_product_overlap(const Vector &psi, const SiteSpace &sites, const CutSpec &cut);

/// Reduced density matrix on `keep` (sites ascending).
Matrix reduced_density_matrix(const Vector &psi, const SiteSpace &sites, std::vector<int> keep);

/// Upper bound on the factor by which one application of A can multiply the
/// Schmidt rank across the cut: the product over crossing terms of
/// min(d^(2|S∩L|), d^(2|S∩R|)). Equals d² for an open chain cut.
std::uint64_t rank_growth_factor(const HamiltonianSpec &h, const CutSpec &cut);

struct RankGrowth {
    std::vector<int> ranks; // ranks[j] = rank(A^j ψ0), j = 0..l
    std::uint64_t factor = 1;
    bool pass            = true;
};

RankGrowth rank_growth(const DLOperator &a, const Vector &psi0, const CutSpec &cut, int l);

struct TailRow {
    int l           = 0;
    double tail     = 0.0; // Σ_{j > F^l} λ_j
    double bound    = 0.0; // μ^-2 (1-δ)^(2l)
    double head     = 0.0; // sqrt(Σ_{j <= F^l} λ_j)
    double overlap  = 0.0; // μ / sqrt(μ² + (1-δ)^(2l))
    bool pass       = true;
};

std::vector<TailRow> tail_bound_check(const Vector &gs_state, const SiteSpace &sites, const CutSpec &cut, double mu, double delta,
                                      int l_max, std::uint64_t factor);

struct StepEntropy {
    double bound          = 0.0;
    double oracle_entropy = 0.0;
    int first_small_block = 0; // first ℓ with Kθ^ℓ <= (1-θ)θ/e
};

/// Closed-form entropy bound for step distributions with tail masses
/// Σ_{j > D^ℓ} λ_j <= Kθ^ℓ, and the entropy of the saturating step distribution.
StepEntropy step_entropy_bound(int big_d, double big_k, double theta);

/// Entropy of a block-uniform distribution built from tail masses; the oracle
/// behind step_entropy_bound, exposed for testing.
double saturating_step_entropy(int big_d, double big_k, double theta);

/// δ used by the area-law pipeline: 1 - dl_bound with the gap clamped to 1 and
/// δ clamped to 1/6.
double area_law_delta(const DLOperator &a, double gap);

struct AreaLawCertificate {
    CutSpec cut;
    double mu_measured      = 0.0;
    double delta            = 0.0;
    double entropy_measured = 0.0;
    double effective_d      = 0.0; // sqrt(rank growth factor); d for open chains
    double overlap_entropy_bound     = 0.0;
    double area_bound_log10   = 0.0;
    std::optional<double> area_bound; // absent when it overflows double
    double log10_l0         = 0.0;
    std::optional<double> worst_case_log10_mu;
    bool overlap_entropy_pass   = false;
    bool area_bound_pass = false;
    [[nodiscard]] bool pass() const { return overlap_entropy_pass && area_bound_pass; }
};

AreaLawCertificate area_law_certificate(const DLOperator &a, const GroundSpaceData &gs, const CutSpec &cut);

struct ShiftRow {
    int j                = 0;
    double alpha_shifted = 0.0;
    double bound         = 0.0; // α1(k) d^|j|
    bool pass            = true;
};

std::vector<ShiftRow> shifted_cut_check(const Vector &gs_state, const SiteSpace &sites, const CutSpec &cut, int l);

} // namespace dllab
