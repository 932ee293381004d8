#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "q1d/errors.hpp"
#include "q1d/spectra.hpp"

using namespace q1d;

namespace {

const double kPi = std::numbers::pi;
const DiscreteQuasi1D kFree{1, {}, 0.0, {bernoulli01()}};
const DiscreteQuasi1D kBern{1, {}, 1.0, {bernoulli01()}};

LyapOptions lyap(std::int64_t n, int R) {
    LyapOptions o;
    o.steps = n;
    o.realizations = R;
    return o;
}

}  // namespace

TEST_CASE("symmetric eigensolver") {
    Mat d = Mat::Zero(3, 3);
    d(0, 0) = 3, d(1, 1) = 1, d(2, 2) = 2;
    const auto e = eigensolve_sym(d);
    CHECK(e.values(0) == 1.0);
    CHECK(e.values(1) == 2.0);
    CHECK(e.values(2) == 3.0);

    Mat f = Mat::Zero(5, 5);
    for (int i = 0; i + 1 < 5; ++i) f(i, i + 1) = f(i + 1, i) = -1;
    const auto ef = eigensolve_sym(f);
    for (int k = 1; k <= 5; ++k) CHECK(ef.values(k - 1) == doctest::Approx(-2 * std::cos(k * kPi / 6)).epsilon(1e-13));

    Stream rng(SeedSpec{1, 0, 0});
    RMat a(30, 30);
    for (int j = 0; j < 30; ++j)
        for (int i = 0; i < 30; ++i) a(i, j) = rng.gaussian();
    a = (a + a.transpose()).eval();
    const auto ea = eigensolve_sym(a.cast<cplx>(), true);
    CHECK((a * ea.vectors - ea.vectors * ea.values.asDiagonal()).norm() < 1e-11 * a.norm());

    Mat ns = Mat::Zero(2, 2);
    ns(0, 1) = 1;
    CHECK_THROWS_AS(eigensolve_sym(ns), Error);
}

TEST_CASE("unitary eigen-angles") {
    CVec ph(3);
    ph << std::polar(1.0, 0.5), std::polar(1.0, -2.0), std::polar(1.0, kPi);
    const RVec a = unitary_eigen_angles(Mat(ph.asDiagonal()));
    CHECK(a(0) == doctest::Approx(-2.0));
    CHECK(a(1) == doctest::Approx(0.5));
    CHECK(a(2) == doctest::Approx(kPi));
}

TEST_CASE("integrated density of states") {
    const std::vector<double> g{-3.0, -1.0, 0.0, 1.0, 3.0};
    const auto free = ids_estimate(kFree, g, 500, 4, 1);
    CHECK(std::abs(free.values[2] - 0.5) <= 0.01);
    CHECK(free.values[0] == 0.0);
    CHECK(free.values[4] == 1.0);

    const std::vector<double> g2{-8.0, -1.0, 0.3, 1.5, 8.0};
    const auto two = ids_estimate(DiscreteQuasi1D{2, {}, 1.0, {bernoulli01()}}, g2, 100, 4, 2);
    CHECK(two.values.front() == 0.0);
    CHECK(two.values.back() == 2.0);
    for (const auto& row : two.per_realization)
        for (std::size_t k = 1; k < row.size(); ++k) CHECK(row[k - 1] <= row[k]);

    const std::vector<double> ga{-3.0, 0.0, 3.2};
    const auto ua = ids_estimate(UnitaryAnderson{0.6, 0.8}, ga, 50, 4, 3);
    CHECK(ua.angles);
    CHECK(ua.values.back() == 1.0);
    CHECK_THROWS_AS(ids_estimate(kFree, g, 4, 4, 1), Error);
}

TEST_CASE("spectrum coverage") {
    const auto b = spectrum_coverage(kBern, 200, 2, 1);
    CHECK(b.violations == 0);
    CHECK(b.min_observed >= -2.0 - 1e-8);
    CHECK(b.max_observed <= 3.0 + 1e-8);

    const auto f = spectrum_coverage(kFree, 200, 2, 1);
    CHECK(f.violations == 0);
    CHECK(f.min_observed >= -2.0 - 1e-8);
    CHECK(f.max_observed <= 2.0 + 1e-8);

    const double r = 1 / std::sqrt(2.0);
    const UnitaryAnderson ua{r, r};
    CHECK(unitary_anderson_lambda0(ua) == doctest::Approx(kPi / 2));
    const auto u = spectrum_coverage(ua, 100, 2, 1);
    CHECK(u.angles);
    CHECK(u.violations == 0);
    CHECK(u.eigenvalues == 2 * (2 * 100 + 2));
}

TEST_CASE("log potential") {
    // unit mass at E' = 1: log|E' - E| - 0.5 log(1 + E'^2) at E = 3
    const std::vector<double> ev{1.0};
    CHECK(log_potential(ev, 1.0, 3.0) == doctest::Approx(std::log(2.0) - 0.5 * std::log(2.0)));
    const std::vector<double> two{1.0, -1.0};
    CHECK(log_potential(two, 4.0, 0.0) == doctest::Approx(-0.25 * std::log(2.0)));
    // eigenvalues inside the exclusion window are skipped
    CHECK(log_potential(ev, 1.0, 1.0 + 1e-8) == 0.0);
}

TEST_CASE("thouless formula, free lattice") {
    std::vector<double> grid;
    for (int k = 0; k < 8; ++k) grid.push_back(-1.5 + 3.0 * k / 7.0);
    const auto rep = thouless_residual(kFree, grid, 500, 2, 1, lyap(20000, 2));
    CHECK(rep.rms <= 0.05);
}

TEST_CASE("thouless residual error shrinks with L") {
    const std::vector<double> grid{-0.5, 0.0, 0.5, 1.0};
    const auto a = thouless_residual(kBern, grid, 200, 8, 2, lyap(20000, 4));
    const auto b = thouless_residual(kBern, grid, 400, 8, 2, lyap(20000, 4));
    double sa = 0, sb = 0;
    for (const auto& r : a.rows) sa += r.conv_sigma;
    for (const auto& r : b.rows) sb += r.conv_sigma;
    // sqrt(2) expected; accept within a factor 2 of halving
    CHECK(sa / sb >= 1.0);
    CHECK(sa / sb <= 4.0);
}

TEST_CASE("eigenvector residuals at sizes that engage blocked kernels") {
    const DiscreteQuasi1D two{2, {}, 1.5, {bernoulli01(), bernoulli01()}};
    const SymBand band = build_finite_discrete_band(two, 200, SeedSpec{5, 0, 0});
    const RMat a = band.to_dense();
    REQUIRE(a.rows() >= 400);
    const auto eb = eigensolve_sym(band, true);
    const double rb = (a * eb.vectors - eb.vectors * eb.values.asDiagonal()).norm();
    CHECK(rb <= 1e-10);
    CHECK((eb.vectors.transpose() * eb.vectors - RMat::Identity(a.rows(), a.rows())).norm() <= 1e-10);

    const auto ed = eigensolve_sym(Mat(a.cast<cplx>()), true);
    CHECK((a * ed.vectors - ed.vectors * ed.values.asDiagonal()).norm() <= 1e-10);
    CHECK((ed.values - eb.values).cwiseAbs().maxCoeff() <= 1e-11);
    CHECK((eigensolve_sym(band).values - eb.values).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("eigenmode decay") {
    const DiscreteQuasi1D strong{1, {}, 4.0, {bernoulli01()}};
    const auto rep = eigenmode_decay(strong, 200, {-1.0, 1.0}, 4, 3, lyap(100000, 4));
    REQUIRE(!rep.modes.empty());
    for (const auto& m : rep.modes) CHECK(m.rate > 0.0);
    CHECK(std::abs(rep.median_rate - rep.gamma_D) <= 0.3 * rep.gamma_D);
    CHECK(rep.localized);

    bool flagged = false;
    try {
        const auto f = eigenmode_decay(kFree, 200, {-1.0, 1.0}, 2, 3, lyap(10000, 2));
        flagged = !f.localized;
    } catch (const Error& e) {
        flagged = e.kind() == ErrorKind::NoInteriorModes;
    }
    CHECK(flagged);
}

TEST_CASE("wegner probabilities") {
    CHECK(wegner_probability(kBern, 0.5, 50, 100.0, 20, 1).probability == 1.0);
    CHECK(wegner_probability(kBern, 0.5, 50, 0.0, 20, 1).probability == 0.0);
    const auto ci = wilson_interval(0, 200);
    CHECK(ci.first == 0.0);
    CHECK(ci.second > 0.0);
    const auto half = wilson_interval(100, 200);
    CHECK(half.first == doctest::Approx(1.0 - half.second));

    const std::vector<int> Ls{50, 100, 200};
    const auto rows = wegner_probe(kBern, 0.5, Ls, 0.5, 0.5, 200, 4, 0.25);
    REQUIRE(rows.size() == 3);
    CHECK(wegner_non_increasing(rows));
    for (const auto& r : rows) {
        CHECK(r.ci_lo <= r.probability);
        CHECK(r.probability <= r.ci_hi);
    }
    CHECK_THROWS_AS(wegner_probe(kBern, 0.5, Ls, 0.5, 1.5, 200, 4, 0.25), Error);
    CHECK_THROWS_AS(wegner_probe(kBern, 0.5, Ls, 0.5, 0.5, 100, 4, 0.25), Error);
}

TEST_CASE("transport") {
    const std::vector<double> t{0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0};
    const auto free = transport_probe(kFree, 150, t, 1, 1);
    CHECK(free.m2[0] == 0.0);
    CHECK(std::abs(free.kappa_hat - 2.0) <= 0.1);

    const auto loc = transport_probe(DiscreteQuasi1D{1, {}, 4.0, {bernoulli01()}}, 150, t, 4, 1);
    CHECK(loc.m2[0] == 0.0);
    CHECK(loc.kappa_hat <= 0.1);
    CHECK(loc.sup_m2 <= 0.1 * free.sup_m2);

    try {
        transport_probe(kFree, 20, t, 1, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BoundaryContamination);
    }
}
