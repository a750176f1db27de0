#pragma once

#include <optional>
#include <random>
#include <vector>

#include "dllab/entanglement.hpp"

namespace dllab {

/// A Hermitian observable on a few sites.
struct ObservableSpec {
    std::vector<int> support;
    Matrix matrix;
    double norm = 0.0; // operator norm

    static ObservableSpec make(std::vector<int> support, Matrix matrix, const SiteSpace &sites);
    [[nodiscard]] LocalTerm as_term() const { return {support, matrix, false}; }
};

/// One projector occurrence inside A^ℓ, in application order.
struct ConeOccurrence {
    int round         = 0; // 0-based copy of A
    std::size_t layer = 0;
    std::size_t term  = 0;
    bool inside       = false;
};

/// Occurrence-level causality cone of a seed support inside A^ℓ. An occurrence
/// is inside iff its support meets the seed or an inside occurrence applied at
/// an earlier layer step.
struct CausalityCone {
    std::vector<int> seed;
    int rounds = 0;
    std::vector<ConeOccurrence> occurrences;
    std::vector<std::vector<std::size_t>> step_members; // inside terms per layer step (g·ℓ steps)
    std::vector<int> reach;                             // seed ∪ supports of inside occurrences

    [[nodiscard]] std::size_t inside_count() const;
};

CausalityCone causality_cone(const HamiltonianSpec &h, const LayerPartition &part, std::vector<int> seed, int l);

/// Applies the inside (or outside) occurrences of the cone, in application order.
Vector apply_cone(const DLOperator &a, const CausalityCone &cone, const Vector &psi, bool inside);

/// max over ground vectors Ω of ||A^ℓ B Ω - Cone_ℓ(B) B Ω||.
double cone_absorption_check(const DLOperator &a, const GroundSpaceData &gs, const ObservableSpec &b, int l);

/// max over ground vectors of ||P_in P_out B Ω - A^ℓ B Ω||.
double cone_factorization_check(const DLOperator &a, const GroundSpaceData &gs, const ObservableSpec &b, int l);

/// max over outside occurrences and random states of ||[P_i, B] ψ||.
double cone_commutation_check(const DLOperator &a, const ObservableSpec &b, int l, int samples, std::mt19937_64 &rng);

struct Correlation {
    Complex value;       // <XY> - <X><Y>
    double modulus  = 0.0;
    double real     = 0.0;
    Complex xy;          // <XY>
    double x_mean   = 0.0;
    double y_mean   = 0.0;
};

Correlation connected_correlation(const GroundSpaceData &gs, const SiteSpace &sites, const ObservableSpec &x, const ObservableSpec &y);

struct DecayRow {
    int m                     = 0;
    double corr               = 0.0; // signed real part
    double normalized         = 0.0; // |corr| / (||X|| ||Y||)
    double bound_r_pow_m      = 0.0;
    int identity_l            = 0;   // largest ℓ tested for the decay identity
    double identity_deviation = 0.0; // max_ℓ |<XY> - <X A^ℓ Y>|
};

struct DecayProfile {
    std::vector<DecayRow> rows;
    double rate = 0.0; // dl_bound
    std::optional<double> slope;
    std::optional<double> intercept;
    double max_identity_deviation = 0.0;
    double prefactor_needed       = 0.0; // max_m normalized / r^m
    [[nodiscard]] bool fit_skipped() const { return !slope.has_value(); }
};

/// Connected correlations of X against a family Y_m at increasing distance,
/// with a log-linear fit and the exact cone identity.
DecayProfile decay_profile(const DLOperator &a, const GroundSpaceData &gs, const ObservableSpec &x,
                           const std::vector<ObservableSpec> &ys);

/// Largest ℓ (capped) whose cone around `seed` misses `target`; 0 if even ℓ = 1 reaches it.
int cone_separation_rounds(const HamiltonianSpec &h, const LayerPartition &part, const std::vector<int> &seed,
                           const std::vector<int> &target, int cap = 32);

struct DistinguishingReport {
    int l = 0;
    int window_lo = 0; // inclusive
    int window_hi = 0; // exclusive
    std::size_t window_terms = 0;
    double delta             = 0.0;
    double trace_window      = 0.0; // Tr(Π ρ^{2ℓ})
    double trace_product     = 0.0; // Tr(Π ρ_L^ℓ ⊗ ρ_R^ℓ)
    double overlap           = 0.0; // α_1 at the cut
    double overlap_threshold = 0.0; // (1-δ)^{ℓ/4}
    double bound             = 0.0; // 2(1-δ)^{ℓ/2}
    bool hypothesis_met      = false;
    CheckStatus bound_status = CheckStatus::HypothesisNotMet;
    // Tr(Π A^{ℓ/2} ρ_L⊗ρ_R) against Tr(Π ρ_L⊗ρ_R) with full half-chain states.
    std::optional<double> identity_lhs;
    std::optional<double> identity_rhs;
    CheckStatus identity_status = CheckStatus::HypothesisNotMet;
    double s_left = 0.0, s_right = 0.0, s_window = 0.0;
    [[nodiscard]] bool trace_window_pass() const { return std::abs(trace_window - 1.0) <= 1e-10; }
};

DistinguishingReport distinguishing_measurement(const DLOperator &a, const GroundSpaceData &gs, const CutSpec &cut, int l);

/// x ln(x/y) summed over a binary outcome; y clamped below by 1e-300.
double binary_divergence(double x1, double y1);

struct EntropyGapReport {
    DistinguishingReport measurement;
    double mutual_information = 0.0; // S_L + S_R - S_2ℓ
    double divergence         = 0.0; // S(X||Y)
    double threshold          = 0.0; // (δ/2)ℓ - 1
    bool premise_met          = false; // Tr(Π ρ_L⊗ρ_R) <= 2(1-δ)^{ℓ/2}
    CheckStatus threshold_status = CheckStatus::HypothesisNotMet;
    // reported only: S(2ℓ) against S_L + S_R - (δ/2)ℓ + 1
    double recursion_lhs = 0.0;
    double recursion_rhs = 0.0;
    [[nodiscard]] bool monotone_pass() const { return mutual_information >= divergence - kInequalityTol; }
    [[nodiscard]] bool nonnegative() const { return mutual_information >= -kInequalityTol && divergence >= -kInequalityTol; }
};

EntropyGapReport entropy_gap_check(const DLOperator &a, const GroundSpaceData &gs, const CutSpec &cut, int l);

} // namespace dllab
