#pragma once

#include <memory>

#include "doctest.h"
#include "oracles.hpp"

#include "dllab/io.hpp"

namespace th {

using namespace dllab;

inline std::shared_ptr<const HamiltonianSpec> model(const std::string &name, std::map<std::string, std::int64_t> params) {
    return build_model({name, std::move(params)}).hamiltonian;
}

/// Σ Q_i assembled by the oracle from the term list.
inline oracle::Mat dense_oracle(const HamiltonianSpec &h) {
    const int n = h.sites().n(), d = h.sites().d();
    const long dim = oracle::ipow(d, n);
    oracle::Mat out = oracle::Mat::Zero(dim, dim);
    for(const auto &t : h.terms()) out += oracle::embed(t.matrix, t.support, n, d);
    return out;
}

/// A = Π_g ⋯ Π_1 assembled by the oracle.
inline oracle::Mat dense_dl(const DLOperator &a) {
    const auto &h = a.hamiltonian();
    const int n = h.sites().n(), d = h.sites().d();
    const long dim = oracle::ipow(d, n);
    oracle::Mat out = oracle::Mat::Identity(dim, dim);
    for(const auto &layer : a.partition().layers)
        for(auto t : layer) {
            const auto &term = h.terms()[t];
            const oracle::Mat p = oracle::Mat::Identity(term.matrix.rows(), term.matrix.cols()) - term.matrix;
            out = oracle::embed(p, term.support, n, d) * out;
        }
    return out;
}

inline LocalTerm term(std::vector<int> support, Matrix m, bool proj = true) { return {std::move(support), std::move(m), proj}; }

} // namespace th
