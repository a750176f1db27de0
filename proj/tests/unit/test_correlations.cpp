#include "helpers.hpp"

using namespace dllab;

namespace {

    ObservableSpec sz(const SiteSpace &s, int site) { return ObservableSpec::make({site}, spin_operators(s.d())[2], s); }

    oracle::Mat dense_pow(const oracle::Mat &a, int l) {
        oracle::Mat out = oracle::Mat::Identity(a.rows(), a.cols());
        for(int i = 0; i < l; ++i) out = a * out;
        return out;
    }

    // reduced density matrix on the contiguous window [lo, hi) by explicit summation
    oracle::Mat window_rho(const oracle::Vec &psi, int n, int d, int lo, int hi) {
        const long dw = oracle::ipow(d, hi - lo), dr = oracle::ipow(d, n - hi), dl = oracle::ipow(d, lo);
        oracle::Mat rho = oracle::Mat::Zero(dw, dw);
        for(long a = 0; a < dw; ++a)
            for(long b = 0; b < dw; ++b) {
                oracle::Complex s = 0;
                for(long x = 0; x < dl; ++x)
                    for(long y = 0; y < dr; ++y) s += psi((x * dw + a) * dr + y) * std::conj(psi((x * dw + b) * dr + y));
                rho(a, b) = s;
            }
        return rho;
    }

    double vn_entropy(const oracle::Mat &rho) { return oracle::entropy(oracle::eig(rho).values.cwiseMax(0.0)); }

} // namespace

TEST_CASE("causality cone examples") {
    SUBCASE("chain seed at site 4, one round") {
        const auto h    = th::model("heisenberg-ferro", {{"n", 10}});
        const auto part = partition_layers(*h);
        const auto cone = causality_cone(*h, part, {4}, 1);
        // layer 1 holds bonds (0,1),(2,3),...; bond (4,5) meets the seed, then (3,4) and (5,6) meet its support
        REQUIRE(cone.step_members.size() == 2);
        CHECK(cone.step_members[0] == std::vector<std::size_t>{4});
        CHECK(cone.step_members[1] == std::vector<std::size_t>{3, 5});
        CHECK(cone.reach == std::vector<int>{3, 4, 5, 6});
        CHECK(cone.inside_count() == 3);
        CHECK(cone.occurrences.size() == h->m());
    }
    SUBCASE("saturation") {
        const auto h    = th::model("heisenberg-ferro", {{"n", 8}});
        const auto cone = causality_cone(*h, partition_layers(*h), {0}, 8);
        // last round has every term inside
        std::size_t last = 0;
        for(const auto &o : cone.occurrences)
            if(o.round == 7 && o.inside) ++last;
        CHECK(last == h->m());
        CHECK(cone.reach.size() == 8);
    }
    SUBCASE("single layer does not spread") {
        const auto h    = th::model("pinning", {{"n", 5}});
        const auto cone = causality_cone(*h, partition_layers(*h), {2}, 4);
        for(const auto &o : cone.occurrences) CHECK(o.inside == (o.term == 2));
    }
    SUBCASE("width grows by at most (k-1)g per round") {
        const auto h    = th::model("aklt", {{"n", 12}});
        const auto part = partition_layers(*h);
        for(int l = 1; l <= 3; ++l) CHECK(causality_cone(*h, part, {6}, l).reach.size() <= 1 + 2u * l * (h->locality() - 1) * part.g());
    }
    CHECK_THROWS_AS(causality_cone(*th::model("pinning", {{"n", 3}}), partition_layers(*th::model("pinning", {{"n", 3}})), {}, 1), Error);
}

TEST_CASE("cone absorption against dense evaluation") {
    auto run = [](const std::shared_ptr<const HamiltonianSpec> &h, const ObservableSpec &b, int l) {
        const auto gs = ground_space(*h);
        const DLOperator a(h);
        CHECK(cone_absorption_check(a, gs, b, l) <= 1e-12);
        CHECK(cone_factorization_check(a, gs, b, l) <= 1e-12);
        std::mt19937_64 rng(1);
        CHECK(cone_commutation_check(a, b, l, 4, rng) <= 1e-12);
        // dense oracle: A^l B Ω against the product of inside occurrences
        const int n = h->sites().n(), d = h->sites().d();
        const auto cone     = causality_cone(*h, a.partition(), b.support, l);
        oracle::Mat inside  = oracle::Mat::Identity(gs.dim(), gs.dim());
        for(const auto &o : cone.occurrences)
            if(o.inside) {
                const auto &t = h->terms()[o.term];
                inside        = oracle::embed(oracle::Mat::Identity(t.matrix.rows(), t.matrix.cols()) - t.matrix, t.support, n, d) * inside;
            }
        const oracle::Mat al = dense_pow(th::dense_dl(a), l);
        const oracle::Mat bb = oracle::embed(b.matrix, b.support, n, d);
        for(Eigen::Index c = 0; c < gs.ground_basis.cols(); ++c) {
            const oracle::Vec bo = bb * gs.ground_basis.col(c);
            CHECK((al * bo - inside * bo).norm() <= 1e-12);
        }
    };
    SUBCASE("pinning, sigma x on site 2, l=2") {
        const auto h = th::model("pinning", {{"n", 4}});
        run(h, ObservableSpec::make({2}, oracle::pauli_x(), h->sites()), 2);
    }
    SUBCASE("Heisenberg n=8, sigma z on site 4, l=1") {
        const auto h = th::model("heisenberg-ferro", {{"n", 8}});
        run(h, ObservableSpec::make({4}, oracle::pauli_z(), h->sites()), 1);
    }
    SUBCASE("identity observable") {
        const auto h = th::model("aklt", {{"n", 5}, {"periodic", 1}});
        run(h, ObservableSpec::make({1}, Matrix::Identity(3, 3), h->sites()), 2);
    }
    SUBCASE("toric code plaquette-sized observable") {
        const auto h = th::model("toric-code", {{"lx", 2}, {"ly", 2}});
        run(h, ObservableSpec::make({0, 1}, oracle::kron(oracle::pauli_x(), oracle::pauli_z()), h->sites()), 1);
    }
}

TEST_CASE("connected correlation") {
    SUBCASE("product ground state gives zero") {
        const auto h  = th::model("pinning", {{"n", 5}});
        const auto gs = ground_space(*h);
        const auto c  = connected_correlation(gs, h->sites(), ObservableSpec::make({0}, oracle::pauli_x(), h->sites()),
                                              ObservableSpec::make({3}, oracle::pauli_z(), h->sites()));
        CHECK(c.modulus <= 1e-12);
    }
    SUBCASE("identities give zero") {
        const auto h  = th::model("aklt", {{"n", 6}, {"periodic", 1}});
        const auto gs = ground_space(*h);
        const auto id = ObservableSpec::make({0}, Matrix::Identity(3, 3), h->sites());
        CHECK(connected_correlation(gs, h->sites(), id, id).modulus <= 1e-12);
    }
    SUBCASE("AKLT ring against the dense expectation") {
        const auto h  = th::model("aklt", {{"n", 6}, {"periodic", 1}});
        const auto gs = ground_space(*h);
        const auto x = sz(h->sites(), 0), y = sz(h->sites(), 2);
        const auto c          = connected_correlation(gs, h->sites(), x, y);
        const oracle::Vec w   = gs.ground_basis.col(0);
        const oracle::Mat xm  = oracle::embed(x.matrix, x.support, 6, 3);
        const oracle::Mat ym  = oracle::embed(y.matrix, y.support, 6, 3);
        const auto want       = w.dot(xm * (ym * w)) - w.dot(xm * w) * w.dot(ym * w);
        CHECK(std::abs(c.value - want) <= 1e-12);
        // spin-1 valence bond chain: <S^z_0 S^z_2> = (4/3)(1/3)^2 up to finite-size corrections, sign positive
        CHECK(c.real > 0);
    }
    SUBCASE("degenerate ground rejected") {
        const auto h = th::model("heisenberg-ferro", {{"n", 4}});
        CHECK_THROWS_AS(connected_correlation(ground_space(*h), h->sites(), sz(h->sites(), 0), sz(h->sites(), 1)), Error);
    }
}

TEST_CASE("decay profiles") {
    auto check_profile = [](const std::shared_ptr<const HamiltonianSpec> &h, int max_m) {
        const auto gs = ground_space(*h);
        const DLOperator a(h);
        std::vector<ObservableSpec> ys;
        for(int m = 1; m <= max_m; ++m) ys.push_back(sz(h->sites(), m));
        const auto x = sz(h->sites(), 0);
        const auto p = decay_profile(a, gs, x, ys);
        CHECK(p.max_identity_deviation <= 1e-12);
        REQUIRE(p.slope);
        CHECK(*p.slope < 0);
        // dense oracle for the identity <XY> = <X A^l Y> at the tested l
        const int n = h->sites().n(), d = h->sites().d();
        const oracle::Vec w  = gs.ground_basis.col(0);
        const oracle::Mat al = th::dense_dl(a);
        const oracle::Mat xm = oracle::embed(x.matrix, x.support, n, d);
        for(std::size_t i = 0; i < ys.size(); ++i) {
            const auto &row = p.rows[i];
            const oracle::Mat ym = oracle::embed(ys[i].matrix, ys[i].support, n, d);
            CHECK(std::abs(row.corr - std::real(w.dot(xm * (ym * w)) - w.dot(xm * w) * w.dot(ym * w))) <= 1e-12);
            if(row.identity_l > 0) {
                oracle::Vec v = ym * w;
                for(int l = 0; l < row.identity_l; ++l) v = al * v;
                CHECK(std::abs(w.dot(xm * (ym * w)) - w.dot(xm * v)) <= 1e-12);
            }
        }
        return p;
    };
    SUBCASE("AKLT ring n=6") {
        const auto p = check_profile(th::model("aklt", {{"n", 6}, {"periodic", 1}}), 3);
        MESSAGE("AKLT n=6 slope " << *p.slope << " (ln(1/3) = " << std::log(1.0 / 3) << ")");
    }
    SUBCASE("random parent d=3") { check_profile(th::model("random-parent", {{"n", 6}, {"d", 3}, {"bond", 2}, {"seed", 7}}), 5); }
    SUBCASE("product ground state skips the fit") {
        const auto h = th::model("pinning", {{"n", 5}});
        const auto p = decay_profile(DLOperator(h), ground_space(*h), ObservableSpec::make({0}, oracle::pauli_x(), h->sites()),
                                     {ObservableSpec::make({2}, oracle::pauli_x(), h->sites()), ObservableSpec::make({4}, oracle::pauli_x(), h->sites())});
        CHECK(p.fit_skipped());
        for(const auto &r : p.rows) CHECK(std::abs(r.corr) <= 1e-12);
    }
    SUBCASE("separation rounds") {
        const auto h    = th::model("heisenberg-ferro", {{"n", 10}});
        const auto part = partition_layers(*h);
        CHECK(cone_separation_rounds(*h, part, {9}, {0}) >= 1);
        CHECK(cone_separation_rounds(*h, part, {1}, {0}) == 0);
        const int l = cone_separation_rounds(*h, part, {8}, {0});
        const auto reach = causality_cone(*h, part, {8}, l).reach;
        CHECK(std::find(reach.begin(), reach.end(), 0) == reach.end());
        const auto reach2 = causality_cone(*h, part, {8}, l + 1).reach;
        CHECK(std::find(reach2.begin(), reach2.end(), 0) != reach2.end());
    }
}

TEST_CASE("distinguishing measurement and entropy gap") {
    SUBCASE("product ground state") {
        const auto h = th::model("pinning", {{"n", 4}});
        const auto gs = ground_space(*h);
        const auto r = distinguishing_measurement(DLOperator(h), gs, CutSpec::contiguous(2), 2);
        CHECK(r.trace_window_pass());
        CHECK(r.trace_product == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(r.hypothesis_met);
        CHECK(r.bound_status == CheckStatus::HypothesisNotMet);
        const auto e = entropy_gap_check(DLOperator(h), gs, CutSpec::contiguous(2), 2);
        CHECK(std::abs(e.mutual_information) <= 1e-12);
        CHECK(std::abs(e.divergence) <= 1e-12);
        CHECK(e.monotone_pass());
    }
    SUBCASE("random parent chain against dense window oracle") {
        const auto h  = th::model("random-parent", {{"n", 6}, {"d", 3}, {"bond", 2}, {"seed", 7}});
        const auto gs = ground_space(*h);
        const DLOperator a(h);
        const int l = 2, cut = 3;
        const auto r = distinguishing_measurement(a, gs, CutSpec::contiguous(cut), l);
        const int lo = r.window_lo, hi = r.window_hi;
        CHECK(lo == cut - l);
        CHECK(hi == cut + l);
        const oracle::Vec w = gs.ground_basis.col(0);
        // Π: kernel of the window terms, built on the window alone
        oracle::Mat hw = oracle::Mat::Zero(oracle::ipow(3, hi - lo), oracle::ipow(3, hi - lo));
        for(const auto &t : h->terms())
            if(std::all_of(t.support.begin(), t.support.end(), [&](int s) { return s >= lo && s < hi; })) {
                std::vector<int> local;
                for(int s : t.support) local.push_back(s - lo);
                hw += oracle::embed(t.matrix, local, hi - lo, 3);
            }
        const oracle::Mat pi    = oracle::kernel_projector(hw);
        const oracle::Mat rho   = window_rho(w, 6, 3, lo, hi);
        const oracle::Mat rho_l = window_rho(w, 6, 3, lo, cut);
        const oracle::Mat rho_r = window_rho(w, 6, 3, cut, hi);
        const oracle::Mat prod  = oracle::kron(rho_l, rho_r);
        CHECK(std::abs((pi * rho).trace().real() - 1.0) <= 1e-10);
        CHECK(std::abs(r.trace_window - (pi * rho).trace().real()) <= 1e-10);
        CHECK(std::abs(r.trace_product - (pi * prod).trace().real()) <= 1e-10);
        REQUIRE(r.identity_lhs);
        CHECK(std::abs(*r.identity_lhs - *r.identity_rhs) <= 1e-10);
        if(r.hypothesis_met) CHECK(r.trace_product <= r.bound + 1e-9);
        MESSAGE("overlap " << r.overlap << " vs threshold " << r.overlap_threshold << ", Tr(Pi rho_L x rho_R) = " << r.trace_product);

        const auto e = entropy_gap_check(a, gs, CutSpec::contiguous(cut), l);
        CHECK(e.mutual_information == doctest::Approx(vn_entropy(rho_l) + vn_entropy(rho_r) - vn_entropy(rho)).epsilon(1e-9));
        const double x1 = (pi * rho).trace().real(), y1 = (pi * prod).trace().real();
        const double want_div = x1 * std::log(x1 / y1) + (x1 < 1 ? (1 - x1) * std::log((1 - x1) / (1 - y1)) : 0.0);
        CHECK(e.divergence == doctest::Approx(want_div).epsilon(1e-8));
        CHECK(e.monotone_pass());
        CHECK(e.nonnegative());
    }
    SUBCASE("window must fit") {
        const auto h = th::model("aklt", {{"n", 6}, {"periodic", 1}});
        CHECK_THROWS_AS(distinguishing_measurement(DLOperator(h), ground_space(*h), CutSpec::contiguous(1), 2), Error);
    }
}

TEST_CASE("binary divergence") {
    CHECK(binary_divergence(1.0, 1.0) == 0.0);
    CHECK(binary_divergence(1.0, 0.5) == doctest::Approx(std::log(2.0)));
    CHECK(binary_divergence(0.5, 0.25) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(0.5 / 0.75)));
    CHECK(binary_divergence(1.0, 0.0) == doctest::Approx(std::log(1e300)));
}
