#include "helpers.hpp"

using namespace dllab;

TEST_CASE("apply_local examples") {
    const SiteSpace s2(2, 2, Geometry::chain(false));
    std::mt19937_64 rng(1);
    const Vector psi = random_state(s2, rng);
    CHECK((apply_local(th::term({1}, Matrix::Identity(2, 2), false), s2, psi) - psi).norm() == 0.0);

    // |0><0| on the second site of |+>|0>
    Vector plus0 = Vector::Zero(4);
    plus0(0)     = 1 / std::sqrt(2.0);
    plus0(2)     = 1 / std::sqrt(2.0);
    const Vector out = apply_local(th::term({0}, oracle::ket_bra(2, 0)), s2, plus0);
    CHECK(std::abs(out(0) - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(out.norm() == doctest::Approx(1 / std::sqrt(2.0)));

    // singlet projector on |01>
    const Vector r = apply_local(th::term({0, 1}, singlet_projector()), s2, basis_state(s2, {0, 1}));
    CHECK(std::abs(r(1) - 0.5) < 1e-15);
    CHECK(std::abs(r(2) + 0.5) < 1e-15);
}

TEST_CASE("contraction agrees with the Kronecker oracle") {
    std::mt19937_64 rng(7);
    for(auto [n, d] : {std::pair{8, 2}, std::pair{5, 3}}) {
        const SiteSpace s(n, d, Geometry::custom({}));
        for(int k = 1; k <= 4; ++k)
            for(int trial = 0; trial < 3; ++trial) {
                std::vector<int> all(n);
                std::iota(all.begin(), all.end(), 0);
                std::shuffle(all.begin(), all.end(), rng);
                std::vector<int> support(all.begin(), all.begin() + k); // arbitrary order
                const int local = static_cast<int>(oracle::ipow(d, k));
                Matrix m        = Matrix::Random(local, local);
                m               = m + m.adjoint().eval();
                const Vector psi = random_state(s, rng);
                const Vector got = apply_local(th::term(support, m, false), s, psi);
                const Vector want = oracle::embed(m, support, n, d) * psi;
                CHECK((got - want).norm() <= 1e-12);
            }
    }
}

TEST_CASE("spectrum examples") {
    SUBCASE("pinning n=3 counts 1-bits") {
        const auto e = spectrum(*th::model("pinning", {{"n", 3}}), 8);
        const double want[] = {0, 1, 1, 1, 2, 2, 2, 3};
        for(int i = 0; i < 8; ++i) CHECK(e.values(i) == doctest::Approx(want[i]).epsilon(1e-10));
        for(double r : e.residuals) CHECK(r <= 1e-8);
    }
    SUBCASE("Heisenberg n=2") {
        const auto h = th::model("heisenberg-ferro", {{"n", 2}});
        const auto e = spectrum(*h, 4);
        const auto o = oracle::eig(th::dense_oracle(*h));
        for(int i = 0; i < 4; ++i) CHECK(e.values(i) == doctest::Approx(o.values(i)).epsilon(1e-10));
        CHECK(o.values(3) == doctest::Approx(1.0));
        CHECK(std::abs(o.values(2)) < 1e-12);
    }
    SUBCASE("toric code 2x2") {
        const auto h  = th::model("toric-code", {{"lx", 2}, {"ly", 2}});
        const auto gs = ground_space(*h);
        const auto o  = oracle::eig(th::dense_oracle(*h));
        CHECK(gs.degeneracy() == 4);
        CHECK(std::abs(o.values(3)) < 1e-10);
        CHECK(o.values(4) == doctest::Approx(2.0));
        CHECK(gs.gap == doctest::Approx(2.0).epsilon(1e-10));
    }
    SUBCASE("iterative path agrees with the dense oracle") {
        // AKLT n=7 has dimension 2187, above the default dense limit
        const auto h = th::model("aklt", {{"n", 7}});
        REQUIRE(h->sites().dim() > engine_limits().dense_limit);
        const auto e = spectrum(*h, 6);
        CHECK_FALSE(e.dense);
        for(double r : e.residuals) CHECK(r <= 1e-8);
        const auto gs = ground_space(*h);
        CHECK(gs.degeneracy() == 4);
        CHECK(e.values(4) == doctest::Approx(gs.gap).epsilon(1e-8));
    }
}

TEST_CASE("ground space examples") {
    const auto pin = ground_space(*th::model("pinning", {{"n", 4}}));
    CHECK(pin.degeneracy() == 1);
    CHECK(std::abs(std::abs(pin.ground_basis(0, 0)) - 1.0) < 1e-12);
    CHECK(pin.gap == doctest::Approx(1.0));

    const auto heis = ground_space(*th::model("heisenberg-ferro", {{"n", 4}}));
    CHECK(heis.degeneracy() == 5);
    const Matrix gram = heis.ground_basis.adjoint() * heis.ground_basis;
    CHECK((gram - Matrix::Identity(5, 5)).norm() < 1e-10);
    CHECK(std::abs(heis.ground_energy) < 1e-10);

    CHECK(ground_space(*th::model("random-parent", {{"n", 5}, {"d", 3}, {"bond", 2}, {"seed", 11}})).degeneracy() == 1);
}

TEST_CASE("Gaussian filter") {
    const auto h    = th::model("pinning", {{"n", 2}});
    const auto full = full_spectrum(*h);
    SUBCASE("eigenvector is scaled by exp(-qE^2/2)") {
        const SiteSpace &s = h->sites();
        const Vector v     = basis_state(s, {1, 1});
        const Vector out   = gaussian_filter(*h, 2.0, v);
        CHECK((out - std::exp(-4.0) * v).norm() < 1e-12);
        // full-matrix oracle: exp(-q H^2 / 2) via eigendecomposition
        const auto o      = oracle::eig(th::dense_oracle(*h));
        oracle::Mat f     = o.vectors * (-(o.values.array().square()) * 1.0).exp().matrix().cast<Complex>().asDiagonal() * o.vectors.adjoint();
        CHECK((f * v - out).norm() < 1e-12);
    }
    SUBCASE("q = 0 is the identity") {
        std::mt19937_64 rng(5);
        const Vector psi = random_state(h->sites(), rng);
        CHECK((gaussian_filter(full, 0.0, psi) - psi).norm() < 1e-12);
        CHECK_THROWS_AS(gaussian_filter(full, -1.0, psi), Error);
    }
    SUBCASE("bound and monotonicity on bundled models") {
        for(auto h2 : {th::model("heisenberg-ferro", {{"n", 6}}), th::model("aklt", {{"n", 5}, {"periodic", 1}}),
                       th::model("toric-code", {{"lx", 2}, {"ly", 2}})}) {
            const auto f2  = full_spectrum(*h2);
            const auto gs2 = ground_space(*h2);
            for(double q : {1.0, 4.0, 16.0}) CHECK(gaussian_filter_error(f2, q, ground_threshold(*h2)) <= std::exp(-q * gs2.gap * gs2.gap / 2) + 1e-9);
            std::mt19937_64 rng(9);
            const Vector psi = gs2.project_complement(random_state(h2->sites(), rng));
            double prev      = psi.norm();
            for(double q : {0.5, 1.0, 2.0, 4.0, 8.0}) {
                const double now = gaussian_filter(f2, q, psi).norm();
                CHECK(now <= prev + 1e-12);
                prev = now;
            }
        }
    }
}

TEST_CASE("restricted norm") {
    const auto h  = th::model("heisenberg-ferro", {{"n", 5}});
    const auto gs = ground_space(*h);
    const auto dim = h->sites().dim();
    LinearOperator id{dim, [](const Vector &v) { return v; }, [](const Vector &v) { return v; }};
    CHECK(restricted_norm(id, gs) == doctest::Approx(1.0).epsilon(1e-10));
    LinearOperator proj{dim, [&](const Vector &v) { return gs.project(v); }, [&](const Vector &v) { return gs.project(v); }};
    CHECK(restricted_norm(proj, gs) < 1e-10);

    const DLOperator a(h);
    const double dense = restricted_norm(a.as_operator(), gs, NormMethod::Dense);
    const double iter  = restricted_norm(a.as_operator(), gs, NormMethod::Iterative);
    CHECK(std::abs(dense - iter) <= 1e-8);
    oracle::Mat pperp = oracle::Mat::Identity(dim, dim) - gs.ground_basis * gs.ground_basis.adjoint();
    CHECK(std::abs(dense - oracle::restricted_norm(th::dense_dl(a), pperp)) <= 1e-10);

    const auto pin = th::model("pinning", {{"n", 3}});
    CHECK(restricted_norm(DLOperator(pin).as_operator(), ground_space(*pin)) < 1e-12);
}

TEST_CASE("dimension cap override") {
    const auto saved = engine_limits();
    EngineLimits tight = saved;
    tight.hard_cap     = 100;
    set_engine_limits(tight);
    CHECK_THROWS_AS(check_dimension(SiteSpace(7, 2, Geometry::chain(false))), Error);
    set_engine_limits(saved);
    CHECK_NOTHROW(check_dimension(SiteSpace(7, 2, Geometry::chain(false))));
}
