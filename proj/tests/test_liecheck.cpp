#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "q1d/errors.hpp"
#include "q1d/liecheck.hpp"

using namespace q1d;

using V = LieClosureReport::Verdict;

TEST_CASE("closure of a basis is itself") {
    for (int D = 1; D <= 4; ++D) {
        const auto rep = lie_closure(canonical_basis(AlgebraKind::Sp, D), D * (2 * D + 1));
        CHECK(rep.closure_dim == D * (2 * D + 1));
        CHECK(rep.verdict == V::Full);
    }
}

TEST_CASE("single nilpotent generator is abelian") {
    Mat n = Mat::Zero(2, 2);
    n(0, 1) = 1;
    const auto rep = lie_closure({n}, 3);
    CHECK(rep.closure_dim == 1);
    CHECK(rep.verdict == V::Proper);
}

TEST_CASE("nearest-neighbour generators span sp(3)") {
    const auto rep = lie_closure(canonical_basis(AlgebraKind::XYZGenerators, 3), 21);
    CHECK(rep.closure_dim == 21);
    CHECK(rep.verdict == V::Full);
}

TEST_CASE("generator set of the continuous model") {
    const auto d1 = check_lemma_spN(1, 0.0, {1.0});
    CHECK(d1.target_dim == 3);
    CHECK(d1.verdict == V::Full);
    CHECK(lemma_spN_generators(1, 0.0, {1.0}).size() == 2);

    const auto d3 = check_lemma_spN(3, 0.7, {1.0, 1.0, 1.0});
    CHECK(d3.closure_dim == 21);
    CHECK(d3.verdict == V::Full);

    for (int k = 0; k < 10; ++k) {
        const double E = -3.0 + 0.7 * k;
        const auto d2 = check_lemma_spN(2, E, {1.0, 1.0});
        CHECK(d2.closure_dim == 10);
        CHECK(d2.verdict == V::Full);
    }
    for (const auto& x : lemma_spN_generators(3, 0.2, {1.0, -2.0, 0.5})) CHECK(algebra_residual(x, AlgebraKind::Sp) < 1e-14);
}

TEST_CASE("zipper closure") {
    const auto d1 = zipper_lie_closure(1, cplx(1, 0), Mat::Constant(1, 1, cplx(0.5, 0)));
    CHECK(d1.closure_dim == 4);
    CHECK(d1.verdict == V::Full);

    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.3;
    a(1, 1) = 0.5;
    const auto d2 = zipper_lie_closure(2, cplx(0, 1), a);
    CHECK(d2.closure_dim == 16);
    CHECK(d2.verdict == V::Full);

    const auto zero = zipper_lie_closure(2, cplx(0, 1), Mat::Zero(2, 2));
    CHECK(zero.verdict == V::Proper);
    CHECK(zero.closure_dim < 16);

    CHECK(zipper_a1_basis(2).size() == 8);
    for (const auto& x : zipper_a1_basis(2)) CHECK(algebra_residual(x, AlgebraKind::UDD) < 1e-15);
}

TEST_CASE("disorder interval") {
    RMat v0(2, 2);
    v0 << 0, 1, 1, 0;
    const auto di = disorder_interval(2, v0, {1.0, 1.0}, 1.0, 0.5);
    CHECK(di.lambda_min == doctest::Approx(-1.0));
    CHECK(di.lambda_max == doctest::Approx(2.0));
    CHECK(di.lambda0 == doctest::Approx(1.5));
    CHECK(di.ell_c == doctest::Approx(2.0 / 3.0));
    REQUIRE(di.interval.has_value());
    CHECK(di.interval->first == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(di.interval->second == doctest::Approx(1.0));

    CHECK_FALSE(disorder_interval(2, v0, {1.0, 1.0}, 1.0, 0.7).interval.has_value());
    CHECK_FALSE(disorder_interval(2, v0, {1.0, 1.0}, 1.0, di.ell_c).interval.has_value());
    // d_O / lambda0 = 2 but ell_C is capped at 1
    const auto big = disorder_interval(2, v0, {1.0, 1.0}, 3.0, 1.0);
    CHECK(big.ell_c == 1.0);
    CHECK_FALSE(big.interval.has_value());
    CHECK(disorder_interval(2, v0, {1.0, 1.0}, 3.0, 0.99).interval.has_value());
    CHECK(disorder_interval(2, v0, {1.0, 1.0}, 1.0, 0.66).interval.has_value());
    CHECK_THROWS_AS(disorder_interval(2, v0, {1.0, 1.0}, 0.0, 0.5), Error);
}

TEST_CASE("norm_X") {
    RMat v0(2, 2);
    v0 << 0, 1, 1, 0;
    CHECK(norm_X(RVec::Zero(2), 0.0, v0, {1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(norm_X(RVec::Zero(2), 10.0, v0, {1.0, 1.0}) == doctest::Approx(11.0));
    CHECK(norm_X(RVec::Zero(2), 1.0, v0, {1.0, 1.0}) == doctest::Approx(2.0));
    RVec w(2);
    w << 1, 1;
    // eigenvalues 0 and 2, E = 0.5: distances 0.5 and 1.5
    CHECK(norm_X(w, 0.5, v0, {1.0, 1.0}) == doctest::Approx(1.5));
    // E at an eigenvalue, the other within distance 1
    CHECK(norm_X(w, 1.0 - 0.0, RMat::Zero(2, 2), {1.0, 1.0}) == doctest::Approx(1.0));
}

TEST_CASE("principal log of the transfer matrix") {
    RVec w(2);
    w << 1, 0;
    ContinuousQuasi1D m{2, {}, 0.01, {1.0, 1.0}, {bernoulli01()}};
    for (double E : {-5.0, 0.0, 3.0, 8.0}) CHECK(log_transfer_identity(m, E, w) <= 1e-10);

    const RMat v0 = default_interaction(2);
    const double nx = norm_X(w, 2.0, v0, m.c);
    m.ell = 0.49 / nx;
    CHECK(log_transfer_identity(m, 2.0, w) <= 1e-9);
    m.ell = 2.0 / nx;
    try {
        log_transfer_identity(m, 2.0, w);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::PreconditionViolated);
    }
}
