#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dllab/state.hpp"

namespace dllab {

/// Model name plus integer parameters (n, d, bond, seed, periodic, lx, ly).
struct ModelDescriptor {
    std::string name;
    std::map<std::string, std::int64_t> params;

    [[nodiscard]] std::int64_t get(const std::string &key, std::int64_t fallback) const;
    [[nodiscard]] std::int64_t require(const std::string &key) const;
};

/// Known facts about a model's spectrum, checked against diagonalization.
struct ExpectedFacts {
    std::optional<int> degeneracy;
    std::optional<double> gap;
    std::string source; // "exact" for closed forms, "measured" otherwise
};

struct Model {
    ModelDescriptor descriptor;
    std::shared_ptr<const HamiltonianSpec> hamiltonian;
    ExpectedFacts expected;
    std::optional<Vector> target_state; // random-parent only
    std::vector<std::string> warnings;
};

/// pinning, heisenberg-ferro, aklt, toric-code, random-parent.
Model build_model(const ModelDescriptor &descriptor);

Model build_parent_random(int n, int d, int bond, std::uint64_t seed);

/// Descriptors with default parameters, one per model family.
std::vector<ModelDescriptor> model_catalog();

// Spin operators (S^x, S^y, S^z) for spin (d-1)/2 in the basis m = s, s-1, ..., -s.
std::array<Matrix, 3> spin_operators(int d);
Matrix two_site_dot(int d); // S_1 · S_2 on d² states
Matrix singlet_projector(); // 1/4 - S·S for two spin-1/2
Matrix aklt_projector();    // spin-2 projector of two spin-1

struct FactCheck {
    bool degeneracy_ok = true;
    bool gap_ok        = true;
    bool target_ok     = true;
    std::optional<double> target_overlap; // |<target|ground>| when the ground state is unique
    [[nodiscard]] bool pass() const { return degeneracy_ok && gap_ok && target_ok; }
};

/// Compares expected facts against a computed ground space.
FactCheck check_expected(const Model &model, const GroundSpaceData &gs, double gap_tol = 1e-8);

} // namespace dllab
