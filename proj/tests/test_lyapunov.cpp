#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "q1d/errors.hpp"
#include "q1d/lyapunov.hpp"

using namespace q1d;

namespace {

LyapOptions opts(std::int64_t n, int R) {
    LyapOptions o;
    o.steps = n;
    o.realizations = R;
    return o;
}

const DiscreteQuasi1D kFree{1, {}, 0.0, {bernoulli01()}};

}  // namespace

TEST_CASE("free lattice exponents") {
    const auto out = lyap_spectrum(kFree, SpectralPoint::at_energy(3.0), 1, opts(100000, 4));
    CHECK(out.exponents[0] == doctest::Approx(std::log((3 + std::sqrt(5.0)) / 2)).epsilon(1e-6));
    CHECK(out.exponents[1] == doctest::Approx(-std::log((3 + std::sqrt(5.0)) / 2)).epsilon(1e-6));
    const auto in = lyap_spectrum(kFree, SpectralPoint::at_energy(0.0), 1, opts(100000, 4));
    CHECK(std::abs(in.exponents[0]) <= 3 * in.std_errors[0] + 1e-12);
    const auto in2 = lyap_spectrum(kFree, SpectralPoint::at_energy(1.2), 1, opts(100000, 4));
    CHECK(std::abs(in2.exponents[0]) <= 1e-3);
}

TEST_CASE("pairing of opposite exponents") {
    for (int D : {1, 2, 3}) {
        const auto ls = lyap_spectrum(DiscreteQuasi1D{D, {}, 1.0, {bernoulli01()}}, SpectralPoint::at_energy(0.5), 2,
                                      opts(100000, 4));
        CHECK(ls.exponents.size() == static_cast<std::size_t>(2 * D));
        CHECK(ls.pairing_defect <= 1e-3);
        for (std::size_t i = 1; i < ls.exponents.size(); ++i) CHECK(ls.exponents[i - 1] >= ls.exponents[i]);
    }
    const auto c = lyap_spectrum(ContinuousQuasi1D{2, {}, 1.0, {1.0, 1.0}, {bernoulli01()}},
                                 SpectralPoint::at_energy(0.5), 2, opts(20000, 2));
    CHECK(c.pairing_defect <= 1e-3);
}

TEST_CASE("results are reproducible and independent of threads") {
    const DiscreteQuasi1D m{2, {}, 1.0, {bernoulli01()}};
    auto o1 = opts(5000, 4);
    o1.threads = 1;
    auto o3 = o1;
    o3.threads = 3;
    const auto a = lyap_spectrum(m, SpectralPoint::at_energy(0.1), 9, o1);
    const auto b = lyap_spectrum(m, SpectralPoint::at_energy(0.1), 9, o3);
    CHECK(a.exponents == b.exponents);
    CHECK(a.std_errors == b.std_errors);
}

TEST_CASE("option preconditions") {
    CHECK_THROWS_AS(lyap_spectrum(kFree, SpectralPoint::at_energy(0.0), 1, opts(999, 4)), Error);
    auto o = opts(1000, 1);
    o.reorth = 51;
    CHECK_THROWS_AS(lyap_spectrum(kFree, SpectralPoint::at_energy(0.0), 1, o), Error);
    CHECK_THROWS_AS(lyap_spectrum(UnitaryAnderson{}, SpectralPoint::at_energy(0.0), 1, opts(1000, 1)), Error);
}

TEST_CASE("wedge oracle") {
    const DiscreteQuasi1D m{2, {}, 1.0, {bernoulli01()}};
    const auto full = wedge_oracle(m, SpectralPoint::at_energy(0.3), 4, 4, opts(20000, 4));
    CHECK(std::abs(full.value) < 1e-10);
    const auto d1 = wedge_oracle(DiscreteQuasi1D{1, {}, 1.0, {bernoulli01()}}, SpectralPoint::at_energy(0.3), 4, 2,
                                 opts(20000, 4));
    CHECK(std::abs(d1.value) < 1e-10);

    const auto ls = lyap_spectrum(m, SpectralPoint::at_energy(0.3), 4, opts(100000, 8));
    const auto p1 = wedge_oracle(m, SpectralPoint::at_energy(0.3), 4, 1, opts(100000, 8));
    CHECK(std::abs(p1.value - ls.exponents[0]) <= 3 * std::hypot(p1.std_error, ls.std_errors[0]));
    CHECK_THROWS_AS(wedge_oracle(m, SpectralPoint::at_energy(0.3), 4, 5, opts(1000, 1)), Error);
    CHECK_THROWS_AS(wedge_oracle(DiscreteQuasi1D{5, {}, 1.0, {bernoulli01()}}, SpectralPoint::at_energy(0.3), 4, 5,
                                 opts(1000, 1)),
                    Error);
}

TEST_CASE("oseledets probe") {
    const auto r = oseledets_probe(DiscreteQuasi1D{1, {}, 1.0, {bernoulli01()}}, SpectralPoint::at_energy(0.5), 5,
                                   opts(100000, 8));
    CHECK(r.gamma > 0);
    CHECK(std::abs(r.generic_rate - r.gamma) <= 0.1 * r.gamma);
    CHECK(std::abs(r.contracting_rate + r.gamma) <= 0.1 * r.gamma);

    const auto f = oseledets_probe(kFree, SpectralPoint::at_energy(3.0), 5, opts(2000, 2));
    const double mu = (-3 + std::sqrt(5.0)) / 2;
    CVec v(2);
    v << mu, 1.0;
    v.normalize();
    CHECK(std::abs(std::abs(v.dot(f.contracting_direction)) - 1.0) < 1e-8);

    try {
        oseledets_probe(kFree, SpectralPoint::at_energy(0.0), 5, opts(2000, 2));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotHyperbolic);
    }
}

TEST_CASE("holder diagnostics") {
    std::vector<double> band;
    for (int k = 0; k < 8; ++k) band.push_back(-1.0 + 0.25 * k);
    const auto free = holder_diag(kFree, band, 6, opts(20000, 4), 100);
    CHECK(free.differences_zero);
    CHECK(!free.alpha.has_value());
    CHECK(free.lipschitz_ratio == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> grid;
    for (int k = 0; k < 10; ++k) grid.push_back(0.2 + 0.15 * k);
    const auto b = holder_diag(DiscreteQuasi1D{1, {}, 1.0, {bernoulli01()}}, grid, 6, opts(50000, 8), 100);
    REQUIRE(b.alpha.has_value());
    CHECK(*b.alpha > 0.0);
    CHECK(*b.alpha <= 1.0);
    CHECK(b.alpha_lo <= b.alpha_hi);
    CHECK(b.rows.size() == grid.size() - 1);
    CHECK(b.lipschitz_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(holder_diag(kFree, std::vector<double>{0.0, 0.1}, 6, opts(2000, 2)), Error);
}
