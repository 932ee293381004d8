#include "q1d/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "q1d/config.hpp"
#include "q1d/errors.hpp"
#include "q1d/liecheck.hpp"
#include "q1d/lyapunov.hpp"
#include "q1d/runner.hpp"
#include "q1d/spectra.hpp"

namespace q1d {

namespace {

constexpr double kPi = std::numbers::pi;

Mat gaussian_matrix(Stream& rng, int n, double scale = 1.0) {
    Mat m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = scale * cplx(rng.gaussian(), rng.gaussian());
    return m;
}

Mat m2(cplx a, cplx b, cplx c, cplx d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

Mat rotation(double th) { return m2(std::cos(th), -std::sin(th), std::sin(th), std::cos(th)); }

Mat admissible_alpha(Stream& rng, int D, double norm) {
    const Mat g = gaussian_matrix(rng, D);
    return g * (norm / op_norm(g));
}

LyapOptions lyap(std::int64_t n, int R, unsigned threads) {
    LyapOptions o;
    o.steps = n;
    o.realizations = R;
    o.threads = threads;
    return o;
}

SelfCheck bound(std::string name, double value, double tol) {
    return {std::move(name), std::isfinite(value) && value <= tol, format_double(value) + " <= " + format_double(tol)};
}

SelfCheck truth(std::string name, bool ok, std::string detail) { return {std::move(name), ok, std::move(detail)}; }

SelfCheck raises(std::string name, ErrorKind kind, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return {std::move(name), e.kind() == kind, std::string("threw ") + e.what()};
    }
    return {std::move(name), false, "no error raised"};
}

class Suite {
public:
    void add(const std::string& name, const std::function<SelfCheck()>& fn) {
        try {
            SelfCheck c = fn();
            c.name = name;
            out_.push_back(std::move(c));
        } catch (const std::exception& e) {
            out_.push_back({name, false, std::string("threw: ") + e.what()});
        }
    }
    std::vector<SelfCheck> take() { return std::move(out_); }

private:
    std::vector<SelfCheck> out_;
};

void matkit_checks(Suite& s) {
    s.add("matkit.qr_identity", [] {
        const QR f = qr_pos(Mat::Identity(3, 3));
        return bound("", (f.q - Mat::Identity(3, 3)).norm() + (f.r - Mat::Identity(3, 3)).norm(), 1e-15);
    });
    s.add("matkit.qr_rotation", [] {
        const QR f = qr_pos(rotation(0.7));
        return bound("", (f.q - rotation(0.7)).norm() + (f.r - Mat::Identity(2, 2)).norm(), 1e-15);
    });
    s.add("matkit.qr_triangular", [] {
        const Mat d = m2(2, 0, 0, 3);
        const QR f = qr_pos(d);
        return bound("", (f.q - Mat::Identity(2, 2)).norm() + (f.r - d).norm(), 1e-15);
    });
    s.add("matkit.qr_random", [] {
        Stream rng(SeedSpec{7, 0, 0});
        const Mat a = gaussian_matrix(rng, 6);
        const QR f = qr_pos(a);
        double d = (f.q * f.r - a).norm() / a.norm() + (f.q.adjoint() * f.q - Mat::Identity(6, 6)).norm();
        for (int i = 0; i < 6; ++i)
            if (!(f.r(i, i).real() > 0)) d = INFINITY;
        return bound("", d, 1e-13);
    });
    s.add("matkit.expm_zero", [] { return bound("", (expm(Mat::Zero(3, 3)) - Mat::Identity(3, 3)).norm(), 1e-15); });
    s.add("matkit.expm_nilpotent", [] { return bound("", (expm(m2(0, 1, 0, 0)) - m2(1, 1, 0, 1)).norm(), 1e-15); });
    s.add("matkit.expm_oscillator", [] {
        double worst = 0;
        for (double k : {0.3, 1.0, 2.5}) {
            const Mat want = m2(std::cos(k), std::sin(k) / k, -k * std::sin(k), std::cos(k));
            worst = std::max(worst, (expm(m2(0, 1, -k * k, 0)) - want).norm());
        }
        return bound("", worst, 1e-12);
    });
    s.add("matkit.logm_identity", [] { return bound("", logm_principal(Mat::Identity(4, 4)).norm(), 1e-15); });
    s.add("matkit.logm_round_trip", [] {
        Stream rng(SeedSpec{2, 0, 0});
        double worst = 0;
        for (int k = 0; k < 100; ++k) {
            Mat a = gaussian_matrix(rng, 4);
            a *= 0.4 / op_norm(a) * rng.uniform();
            worst = std::max(worst, (logm_principal(expm(a)) - a).norm());
        }
        return bound("", worst, 1e-12);
    });
    s.add("matkit.logm_rotation", [] {
        return bound("", (logm_principal(rotation(0.1)) - m2(0, -0.1, 0.1, 0)).norm(), 1e-14);
    });
    s.add("matkit.wedge_first", [] {
        Stream rng(SeedSpec{3, 0, 0});
        const Mat m = gaussian_matrix(rng, 4);
        return bound("", (wedge_power(m, 1) - m).norm(), 1e-15);
    });
    s.add("matkit.wedge_det", [] {
        const Mat m = m2(1.5, -2, 0.25, 3);
        const Mat w = wedge_power(m, 2);
        return bound("", w.rows() == 1 ? std::abs(w(0, 0) - m.determinant()) : INFINITY, 1e-14);
    });
    s.add("matkit.wedge_identity", [] {
        double worst = 0;
        for (int p = 1; p <= 5; ++p) {
            const Mat w = wedge_power(Mat::Identity(5, 5), p);
            worst = std::max(worst, w.rows() == binomial(5, p) ? (w - Mat::Identity(w.rows(), w.cols())).norm() : 1.0);
        }
        return bound("", worst, 1e-15);
    });
    s.add("matkit.wedge_multiplicative", [] {
        Stream rng(SeedSpec{7, 1, 0});
        const Mat a = gaussian_matrix(rng, 6), b = gaussian_matrix(rng, 6);
        const Mat lhs = wedge_power(a * b, 3);
        return bound("", (lhs - wedge_power(a, 3) * wedge_power(b, 3)).norm() / lhs.norm(), 1e-12);
    });
    s.add("matkit.residual_J", [] {
        double worst = 0;
        for (int D = 1; D <= 3; ++D) worst = std::max(worst, group_residual(symplectic_form(D), GroupTag::symplectic(D)));
        return bound("", worst, 0.0);
    });
    s.add("matkit.residual_shear", [] { return bound("", group_residual(m2(1, 1, 0, 1), GroupTag::symplectic(1)), 0.0); });
    s.add("matkit.residual_diag", [] {
        return bound("", std::abs(group_residual(m2(2, 0, 0, 1), GroupTag::symplectic(1)) - 1.0), 1e-15);
    });
    s.add("matkit.cayley_identity", [] {
        return bound("", (cayley_realify(Mat::Identity(4, 4)) - Mat::Identity(8, 8)).norm(), 1e-14);
    });
    s.add("matkit.cayley_lorentz", [] {
        double worst = 0;
        for (int D = 1; D <= 3; ++D)
            worst = std::max(worst, group_residual(cayley_realify(lorentz_form(D)), GroupTag::symplectic(2 * D)));
        return bound("", worst, 1e-10);
    });
    s.add("matkit.cayley_sampled", [] {
        Stream rng(SeedSpec{4, 0, 0});
        double worst = 0;
        for (int k = 0; k < 100; ++k) {
            const Mat sm = scattering_matrix(admissible_alpha(rng, 2, 0.9 * rng.uniform()), haar_unitary(rng, 2),
                                             haar_unitary(rng, 2));
            worst = std::max(worst, group_residual(cayley_realify(phi_map(sm)), GroupTag::symplectic(4)));
        }
        return bound("", worst, 1e-8);
    });
    s.add("matkit.basis_dimensions", [] {
        const bool ok = canonical_basis(AlgebraKind::Sp, 1).size() == 3 && canonical_basis(AlgebraKind::UDD, 1).size() == 4;
        return truth("", ok, "sp(1) 3, u(1,1) 4");
    });
}

void randsrc_checks(Suite& s) {
    s.add("randsrc.determinism", [] {
        Stream s1(SeedSpec{42, 3, 9}), s2(SeedSpec{42, 3, 9}), s3(SeedSpec{42, 3, 10});
        bool same = true, differ = false;
        for (int k = 0; k < 64; ++k) {
            const auto x = s1.next_u64(), z = s3.next_u64();
            same = same && x == s2.next_u64();
            differ = differ || x != z;
        }
        return truth("", same && differ, same && differ ? "ok" : "stream mismatch");
    });
    s.add("randsrc.degenerate_two_point", [] {
        const std::vector<DisorderLaw> laws{TwoPoint{0.0, 1.0, 1.0}};
        bool ok = true;
        for (int n = 0; n < 1000; ++n) ok = ok && draw_site_vector(SeedSpec{3, 0, 0}, laws, n, 1)(0) == 1.0;
        return truth("", ok, "1000 draws");
    });
    s.add("randsrc.bernoulli_mean", [] {
        const std::vector<DisorderLaw> laws{bernoulli01(0.5)};
        double sum = 0;
        const int n = 100000;
        for (int k = 0; k < n; ++k) sum += draw_site_vector(SeedSpec{5, 0, 0}, laws, k, 1)(0);
        return bound("", std::abs(sum / n - 0.5), 0.01);
    });
    s.add("randsrc.single_point_rejected", [] {
        return raises("", ErrorKind::BadLaw, [] { validate_law(FiniteSupport{{2.0}, {1.0}}); });
    });
    s.add("randsrc.haar_circular_mean", [] {
        Stream rng(SeedSpec{6, 0, 0});
        const int n = 100000;
        cplx mean = 0;
        for (int k = 0; k < n; ++k) mean += haar_unitary(rng, 1)(0, 0);
        mean /= static_cast<double>(n);
        return bound("", std::abs(mean) / (3.0 * std::sqrt(0.5 / n)), 1.0);
    });
    s.add("randsrc.haar_moment", [] {
        Stream rng(SeedSpec{8, 0, 0});
        const int n = 100000;
        double m = 0, worst = 0;
        for (int k = 0; k < n; ++k) {
            const Mat u = haar_unitary(rng, 4);
            m += std::norm(u(0, 0));
            if (k % 100 == 0) worst = std::max(worst, group_residual(u, GroupTag::unitary(4)));
        }
        return truth("", std::abs(m / n - 0.25) <= 0.01 && worst <= 1e-12,
                     "moment " + format_double(m / n) + ", unitarity " + format_double(worst));
    });
}

void model_checks(Suite& s) {
    s.add("models.discrete_free_matrix", [] {
        DiscreteQuasi1D m{1, RMat::Zero(1, 1), 0.0, {bernoulli01()}};
        return bound("", (discrete_transfer(m, 0.0, RVec::Zero(1)).matrix - m2(0, -1, 1, 0)).norm(), 0.0);
    });
    s.add("models.discrete_symplectic", [] {
        Stream rng(SeedSpec{1, 0, 0});
        double worst = 0;
        for (int k = 0; k < 1000; ++k) {
            const int D = 1 + k % 4;
            DiscreteQuasi1D m{D, {}, 2.0 * rng.uniform(), {UniformInterval{-1, 1}}};
            RVec w(D);
            for (int i = 0; i < D; ++i) w(i) = 2 * rng.uniform() - 1;
            const auto t = discrete_transfer(m, 6 * rng.uniform() - 3, w);
            worst = std::max(worst, group_residual(t.matrix, t.group));
        }
        return bound("", worst, 1e-12);
    });
    s.add("models.continuous_small_ell", [] {
        ContinuousQuasi1D m{3, {}, 1e-3, {1.0, 2.0, 0.5}, {bernoulli01()}};
        RVec w(3);
        w << 1, 1, 0;
        const double nx = op_norm(continuous_generator(default_interaction(3), m.c, 0.4, w));
        const double lhs = op_norm(continuous_transfer(m, 0.4, w).matrix - Mat::Identity(6, 6));
        return bound("", lhs, m.ell * nx * std::exp(m.ell * nx));
    });
    s.add("models.continuous_closed_form", [] {
        ContinuousQuasi1D m{1, RMat::Zero(1, 1), 0.0, {1.0}, {bernoulli01()}};
        double worst = 0;
        for (double ell : {0.1, 0.5, 1.0, 2.0}) {
            m.ell = ell;
            const double c = std::cos(2 * ell), sn = std::sin(2 * ell);
            worst = std::max(worst, (continuous_transfer(m, 4.0, RVec::Zero(1)).matrix - m2(c, sn / 2, -2 * sn, c)).norm());
        }
        return bound("", worst, 1e-13);
    });
    s.add("models.continuous_symplectic", [] {
        Stream rng(SeedSpec{2, 0, 0});
        double worst = 0;
        for (int k = 0; k < 1000; ++k) {
            const int D = 1 + k % 3;
            ContinuousQuasi1D m{D, {}, 0.2 + rng.uniform(), std::vector<double>(D, 1.0), {bernoulli01()}};
            RVec om(D);
            for (int i = 0; i < D; ++i) om(i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
            const auto t = continuous_transfer(m, 10 * rng.uniform() - 3, om);
            worst = std::max(worst, group_residual(t.matrix, t.group) / std::max(1.0, op_norm(t.matrix)));
        }
        return bound("", worst, 1e-10);
    });
    s.add("models.point_free_cell", [] {
        RMat v0(2, 2);
        v0 << 0, 1, 1, 0;
        const PointInteractions p{2, v0, {1.0, 1.0}, {bernoulli01()}};
        return bound("", (point_interaction_transfer(p, 2.0, RVec::Zero(2)).matrix - free_cell_transfer(v0, 2.0)).norm(),
                     1e-15);
    });
    s.add("models.unipotent", [] {
        RMat q(3, 3);
        q << 1, 2, 0, 2, -1, 3, 0, 3, 5;
        return bound("", group_residual(unipotent_m(q), GroupTag::symplectic(3)), 0.0);
    });
    s.add("models.unitary_anderson_r0", [] {
        const cplx z = std::polar(1.0, 0.8);
        const double th = 0.4, eta = 1.9;
        const Mat t = unitary_anderson_matrix(0.0, 1.0, z, th, eta);
        const Mat want = m2(-std::exp(cplx(0, -eta)) / z, 0, 0, -z * std::exp(cplx(0, th)));
        const double lor = group_residual(unitary_anderson_transfer(UnitaryAnderson{0.0, 1.0}, z, th, eta).matrix,
                                          GroupTag::lorentz(1));
        return bound("", (t - want).norm() + std::abs(std::abs(t.determinant()) - 1.0) + lor, 1e-15);
    });
    s.add("models.unitary_anderson_lorentz", [] {
        const double r = 1 / std::sqrt(2.0);
        const UnitaryAnderson ua{r, r};
        Stream rng(SeedSpec{3, 0, 0});
        double worst = 0;
        for (int k = 0; k < 1000; ++k) {
            const cplx z = std::polar(1.0, 2 * kPi * rng.uniform());
            const double th = 2 * kPi * rng.uniform(), eta = 2 * kPi * rng.uniform();
            worst = std::max(worst, group_residual(unitary_anderson_transfer(ua, z, th, eta).matrix, GroupTag::lorentz(1)));
        }
        return bound("", worst, 1e-10);
    });
    s.add("models.scattering_alpha_zero", [] {
        Stream rng(SeedSpec{4, 0, 0});
        const Mat u = haar_unitary(rng, 2), v = haar_unitary(rng, 2);
        Mat want = Mat::Zero(4, 4);
        want.topRightCorner(2, 2) = u;
        want.bottomLeftCorner(2, 2) = v;
        return bound("", (scattering_matrix(Mat::Zero(2, 2), u, v) - want).norm(), 1e-15);
    });
    s.add("models.scattering_unitary", [] {
        Stream rng(SeedSpec{4, 1, 0});
        double worst = 0;
        for (int k = 0; k < 200; ++k) {
            const Mat sm = scattering_matrix(admissible_alpha(rng, 3, 0.95 * rng.uniform()), haar_unitary(rng, 3),
                                             haar_unitary(rng, 3));
            worst = std::max(worst, group_residual(sm, GroupTag::unitary(6)));
        }
        return bound("", worst, 1e-10);
    });
    s.add("models.rho_diagonal", [] {
        const Mat a = m2(0.5, 0, 0, 0);
        return bound("", (rho(a) - m2(std::sqrt(3.0) / 2, 0, 0, 1)).norm(), 1e-15);
    });
    s.add("models.phi_scalar", [] {
        const double r = 0.6, p = std::sqrt(1 - r * r);
        const Mat phi = phi_map(m2(r, p, p, -r));
        return bound("", (phi - m2(1, -r, -r, 1) / p).norm() + std::abs(std::norm(phi(0, 0)) - std::norm(phi(1, 0)) - 1.0),
                     1e-14);
    });
    s.add("models.phi_swap", [] {
        Mat sw = Mat::Zero(4, 4);
        sw.topRightCorner(2, 2) = Mat::Identity(2, 2);
        sw.bottomLeftCorner(2, 2) = Mat::Identity(2, 2);
        return bound("", (phi_map(sw) - Mat::Identity(4, 4)).norm(), 1e-15);
    });
    s.add("models.zipper_lorentz", [] {
        Stream rng(SeedSpec{5, 0, 0});
        const ScatteringZipper zp{2, admissible_alpha(rng, 2, 0.6)};
        double worst = 0;
        for (int k = 0; k < 1000; ++k) {
            const cplx z = std::polar(1.0, 2 * kPi * rng.uniform());
            const auto ph = draw_zipper_phases(SeedSpec{5, 0, 0}, k, 2);
            const auto t = zipper_transfer(zp, z, ph);
            worst = std::max({worst, group_residual(t.matrix, t.group), zipper_factorization_residual(zp, z, ph)});
        }
        return bound("", worst, 1e-10);
    });
    s.add("models.zipper_hat_t1", [] {
        const Mat t1 = zipper_hat_t1(Mat::Constant(1, 1, cplx(0.5, 0)));
        return bound("", std::abs(t1(0, 0) - 2.0 / std::sqrt(3.0)), 1e-14);
    });
    s.add("models.finite_free_dirichlet", [] {
        const int L = 10, n = 2 * L + 1;
        const Mat h = build_finite_discrete(DiscreteQuasi1D{1, {}, 0.0, {bernoulli01()}}, L, SeedSpec{1, 0, 0});
        const RVec ev = eigensolve_sym(h).values;
        double worst = (h - h.adjoint()).norm();
        for (int k = 1; k <= n; ++k) worst = std::max(worst, std::abs(ev(k - 1) + 2 * std::cos(k * kPi / (n + 1))));
        return bound("", worst, 1e-12);
    });
    s.add("models.finite_norm_bound", [] {
        DiscreteQuasi1D dis{1, {}, 1.5, {TwoPoint{-1.0, 2.0, 0.5}}};
        const RVec ev = eigensolve_sym(build_finite_discrete_band(dis, 50, SeedSpec{2, 0, 0})).values;
        const double lim = 2.0 + 1.5 * 2.0;
        return bound("", std::max(ev.maxCoeff(), -ev.minCoeff()) - lim, 1e-12);
    });
    s.add("models.cmv_shift_pattern", [] {
        const ExtendedCMV tiny{VerblunskyLaw{{cplx(0, 0), cplx(1e-300, 0)}, {0.5, 0.5}}};
        const Mat u = build_extended_cmv(tiny, 6, SeedSpec{1, 0, 0}, CmvBoundary::Raw);
        bool ok = true;
        for (Eigen::Index i = 2; i < u.rows() - 2; ++i) {
            int units = 0, others = 0;
            for (Eigen::Index j = 0; j < u.cols(); ++j) {
                if (std::abs(u(i, j) - 1.0) < 1e-12)
                    ++units;
                else if (std::abs(u(i, j)) > 1e-12)
                    ++others;
            }
            ok = ok && units == 1 && others == 0;
        }
        return truth("", ok, "interior rows single unit entry");
    });
    s.add("models.cmv_interior_rows", [] {
        const ExtendedCMV law{VerblunskyLaw{{cplx(0.3, 0.4), cplx(-0.6, 0.1), cplx(0.0, -0.8)}, {1, 1, 1}}};
        const Mat raw = build_extended_cmv(law, 12, SeedSpec{3, 0, 0}, CmvBoundary::Raw);
        const Eigen::Index n = raw.rows();
        const Mat rows = raw.middleRows(3, n - 6);
        return bound("", (rows * rows.adjoint() - Mat::Identity(n - 6, n - 6)).norm(), 1e-12);
    });
    s.add("models.cmv_unit_circle", [] {
        const ExtendedCMV law{VerblunskyLaw{{cplx(0.3, 0.4), cplx(-0.6, 0.1), cplx(0.0, -0.8)}, {1, 1, 1}}};
        const Mat u = build_extended_cmv(law, 12, SeedSpec{3, 0, 0});
        return bound("", group_residual(u, GroupTag::unitary(static_cast<int>(u.rows()))), 1e-12);
    });
    s.add("models.ring_unitary", [] {
        const Mat u = build_unitary_anderson_ring(UnitaryAnderson{0.6, 0.8}, 10, SeedSpec{3, 0, 0});
        return bound("", group_residual(u, GroupTag::unitary(static_cast<int>(u.rows()))), 1e-12);
    });
}

void lyapunov_checks(Suite& s, unsigned threads) {
    const DiscreteQuasi1D free{1, {}, 0.0, {bernoulli01()}};
    const DiscreteQuasi1D bern{1, {}, 1.0, {bernoulli01()}};
    // the examples pin n; R is free and kept small
    s.add("lyapunov.free_outside_band", [&] {
        const auto ls = lyap_spectrum(free, SpectralPoint::at_energy(3.0), 1, lyap(1000000, 4, threads));
        const double err = std::abs(ls.exponents[0] - std::log((3 + std::sqrt(5.0)) / 2));
        return bound("", err, std::max(3.0 * ls.std_errors[0], 1e-10));
    });
    s.add("lyapunov.free_inside_band", [&] {
        const auto ls = lyap_spectrum(free, SpectralPoint::at_energy(0.0), 1, lyap(1000000, 4, threads));
        return bound("", std::abs(ls.exponents[0]), 3.0 * ls.std_errors[0]);
    });
    s.add("lyapunov.pairing", [&] {
        const auto ls = lyap_spectrum(DiscreteQuasi1D{2, {}, 2.0}, SpectralPoint::at_energy(0.3), 1, lyap(20000, 2, threads));
        SelfCheck c = bound("", ls.pairing_defect, 1e-10);
        c.pass = c.pass && ls.exponents[0] > ls.exponents[1] && ls.exponents[1] > 0;
        return c;
    });
    s.add("lyapunov.wedge_top", [&] {
        const auto w = wedge_oracle(DiscreteQuasi1D{2, {}, 1.0}, SpectralPoint::at_energy(0.3), 4, 4, lyap(20000, 2, threads));
        return bound("", std::abs(w.value), 1e-10);
    });
    s.add("lyapunov.wedge_first", [&] {
        const DiscreteQuasi1D m{2, {}, 1.0};
        const auto ls = lyap_spectrum(m, SpectralPoint::at_energy(0.3), 4, lyap(100000, 8, threads));
        const auto p1 = wedge_oracle(m, SpectralPoint::at_energy(0.3), 4, 1, lyap(100000, 8, threads));
        return bound("", std::abs(p1.value - ls.exponents[0]), 3.0 * std::hypot(p1.std_error, ls.std_errors[0]));
    });
    s.add("lyapunov.wedge_d1", [&] {
        return bound("", std::abs(wedge_oracle(bern, SpectralPoint::at_energy(0.3), 4, 2, lyap(20000, 2, threads)).value),
                     1e-10);
    });
    s.add("lyapunov.oseledets_rates", [&] {
        const auto r = oseledets_probe(bern, SpectralPoint::at_energy(0.5), 5, lyap(100000, 8, threads));
        const double e = std::max(std::abs(r.generic_rate - r.gamma), std::abs(r.contracting_rate + r.gamma)) / r.gamma;
        return bound("", e, 0.1);
    });
    s.add("lyapunov.oseledets_free_direction", [&] {
        const auto f = oseledets_probe(free, SpectralPoint::at_energy(3.0), 5, lyap(2000, 2, threads));
        CVec v(2);
        v << (-3 + std::sqrt(5.0)) / 2, 1.0;
        v.normalize();
        return bound("", std::abs(std::abs(v.dot(f.contracting_direction)) - 1.0), 1e-8);
    });
    s.add("lyapunov.oseledets_not_hyperbolic", [&] {
        return raises("", ErrorKind::NotHyperbolic,
                      [&] { oseledets_probe(free, SpectralPoint::at_energy(0.0), 5, lyap(2000, 2, threads)); });
    });
    s.add("lyapunov.holder_free", [&] {
        std::vector<double> band;
        for (int k = 0; k < 8; ++k) band.push_back(-1.0 + 0.25 * k);
        const auto h = holder_diag(free, band, 6, lyap(20000, 4, threads), 100);
        return truth("", h.differences_zero && !h.alpha, h.differences_zero ? "differences zero" : "resolved differences");
    });
    s.add("lyapunov.holder_bernoulli", [&] {
        std::vector<double> grid;
        for (int k = 0; k < 10; ++k) grid.push_back(0.2 + 0.15 * k);
        const auto h = holder_diag(bern, grid, 6, lyap(50000, 8, threads), 100);
        const bool ok = h.alpha && *h.alpha > 0.0 && *h.alpha <= 1.0 && h.alpha_lo <= h.alpha_hi;
        return truth("", ok, h.alpha ? "alpha " + format_double(*h.alpha) : "no fit");
    });
    s.add("lyapunov.lipschitz_ratio", [&] {
        std::vector<double> grid;
        for (int k = 0; k < 8; ++k) grid.push_back(0.1 * k);
        const auto h = holder_diag(bern, grid, 6, lyap(2000, 2, threads), 50);
        return bound("", std::abs(h.lipschitz_ratio - 1.0), 1e-12);
    });
}

void liecheck_checks(Suite& s) {
    using V = LieClosureReport::Verdict;
    s.add("liecheck.canonical_basis", [] {
        bool ok = true;
        for (int D = 1; D <= 3; ++D) {
            const auto r = lie_closure(canonical_basis(AlgebraKind::Sp, D), D * (2 * D + 1));
            ok = ok && r.verdict == V::Full && r.closure_dim == D * (2 * D + 1);
        }
        return truth("", ok, "D = 1..3");
    });
    s.add("liecheck.abelian", [] {
        const auto r = lie_closure({m2(0, 1, 0, 0)}, 3);
        return truth("", r.closure_dim == 1, "dim " + std::to_string(r.closure_dim));
    });
    s.add("liecheck.spN_d1", [] {
        const auto r = check_lemma_spN(1, 0.0, {1.0});
        return truth("", r.target_dim == 3 && r.verdict == V::Full, "verdict " + to_string(r.verdict));
    });
    s.add("liecheck.spN_d3", [] {
        const auto r = check_lemma_spN(3, 0.7, {1.0, 1.0, 1.0});
        return truth("", r.closure_dim == 21 && r.verdict == V::Full, "dim " + std::to_string(r.closure_dim));
    });
    s.add("liecheck.zipper_full", [] {
        const auto r = zipper_lie_closure(1, cplx(1, 0), Mat::Constant(1, 1, cplx(0.4, 0.0)));
        return truth("", r.verdict == V::Full && r.closure_dim == 4, "dim " + std::to_string(r.closure_dim));
    });
    s.add("liecheck.zipper_alpha_zero", [] {
        const auto r = zipper_lie_closure(2, cplx(0, 1), Mat::Zero(2, 2));
        return truth("", r.verdict == V::Proper, "verdict " + to_string(r.verdict));
    });
    RMat v0(2, 2);
    v0 << 0, 1, 1, 0;
    s.add("liecheck.interval_endpoints", [v0] {
        const auto di = disorder_interval(2, v0, {1.0, 1.0}, 1.0, 0.5);
        double e = std::abs(di.lambda_min + 1.0) + std::abs(di.lambda_max - 2.0) + std::abs(di.lambda0 - 1.5);
        e += di.interval ? std::abs(di.interval->first) + std::abs(di.interval->second - 1.0) : INFINITY;
        return bound("", e, 1e-12);
    });
    s.add("liecheck.interval_empty", [v0] {
        const double ell_c = disorder_interval(2, v0, {1.0, 1.0}, 1.0, 0.1).ell_c;
        const auto at = disorder_interval(2, v0, {1.0, 1.0}, 1.0, ell_c);
        const auto past = disorder_interval(2, v0, {1.0, 1.0}, 1.0, 0.7);
        return truth("", !at.interval && !past.interval, "ell_C " + format_double(at.ell_c));
    });
    s.add("liecheck.log_small_ell", [] {
        RVec w(2);
        w << 1, 0;
        const ContinuousQuasi1D m{2, {}, 0.01, {1.0, 1.0}, {bernoulli01()}};
        double worst = 0;
        for (double E : {-5.0, 0.0, 3.0, 8.0}) worst = std::max(worst, log_transfer_identity(m, E, w));
        return bound("", worst, 1e-10);
    });
    s.add("liecheck.log_domain_edge", [] {
        RVec w(2);
        w << 1, 0;
        ContinuousQuasi1D m{2, {}, 1.0, {1.0, 1.0}, {bernoulli01()}};
        m.ell = 0.49 / norm_X(w, 2.0, default_interaction(2), m.c);
        return bound("", log_transfer_identity(m, 2.0, w), 1e-9);
    });
    s.add("liecheck.log_domain_guard", [] {
        RVec w(2);
        w << 1, 0;
        ContinuousQuasi1D m{2, {}, 1.0, {1.0, 1.0}, {bernoulli01()}};
        m.ell = 2.0 / norm_X(w, 2.0, default_interaction(2), m.c);
        return raises("", ErrorKind::PreconditionViolated, [&] { log_transfer_identity(m, 2.0, w); });
    });
    s.add("liecheck.norm_X", [v0] {
        RVec w(2);
        w << 1, 1;
        const double e = std::abs(norm_X(RVec::Zero(2), 10.0, v0, {1.0, 1.0}) - 11.0) +
                         std::abs(norm_X(w, 1.0, RMat::Zero(2, 2), {1.0, 1.0}) - 1.0) +
                         std::abs(norm_X(RVec::Zero(2), 0.0, v0, {1.0, 1.0}) - 1.0);
        return bound("", e, 1e-12);
    });
}

void spectra_checks(Suite& s, unsigned threads) {
    const DiscreteQuasi1D free{1, {}, 0.0, {bernoulli01()}};
    const DiscreteQuasi1D bern{1, {}, 1.0, {bernoulli01()}};
    s.add("spectra.sorted_diagonal", [] {
        Mat d = Mat::Zero(3, 3);
        d(0, 0) = 3, d(1, 1) = 1, d(2, 2) = 2;
        const RVec v = eigensolve_sym(d).values;
        return bound("", std::abs(v(0) - 1) + std::abs(v(1) - 2) + std::abs(v(2) - 3), 0.0);
    });
    s.add("spectra.dirichlet_n5", [] {
        Mat f = Mat::Zero(5, 5);
        for (int i = 0; i + 1 < 5; ++i) f(i, i + 1) = f(i + 1, i) = -1;
        const RVec v = eigensolve_sym(f).values;
        double worst = 0;
        for (int k = 1; k <= 5; ++k) worst = std::max(worst, std::abs(v(k - 1) + 2 * std::cos(k * kPi / 6)));
        return bound("", worst, 1e-14);
    });
    s.add("spectra.eigenvector_residual", [] {
        // sizes past the blocking threshold of the linked BLAS
        Stream rng(SeedSpec{9, 0, 0});
        const Mat g = gaussian_matrix(rng, 300);
        const RMat a = (g.real() + g.real().transpose()) / 2;
        const auto e = eigensolve_sym(Mat(a.cast<cplx>()), true);
        const SymBand band = build_finite_discrete_band(DiscreteQuasi1D{2, {}, 1.5, {bernoulli01(), bernoulli01()}}, 120,
                                                        SeedSpec{5, 0, 0});
        const RMat b = band.to_dense();
        const auto eb = eigensolve_sym(band, true);
        return bound("", std::max((a * e.vectors - e.vectors * e.values.asDiagonal()).norm() / a.norm(),
                                  (b * eb.vectors - eb.vectors * eb.values.asDiagonal()).norm() / b.norm()),
                     1e-12);
    });
    s.add("spectra.free_ids", [&] {
        const auto c = ids_estimate(free, std::vector<double>{0.0}, 500, 4, 1, threads);
        return bound("", std::abs(c.values[0] - 0.5), 0.01);
    });
    s.add("spectra.ids_limits_monotone", [&] {
        const auto c = ids_estimate(DiscreteQuasi1D{2, {}, 1.0, {bernoulli01()}}, std::vector<double>{-6, -1, 0, 1, 6},
                                    60, 4, 2, threads);
        bool mono = true;
        for (const auto& row : c.per_realization)
            for (std::size_t k = 1; k < row.size(); ++k) mono = mono && row[k] >= row[k - 1];
        return truth("", mono && c.values.front() == 0.0 && std::abs(c.values.back() - 2.0) <= 1e-12,
                     "N(6) " + format_double(c.values.back()));
    });
    s.add("spectra.free_coverage", [&] {
        const auto c = spectrum_coverage(free, 200, 4, 3, threads);
        return truth("", c.violations == 0 && c.min_observed >= -2.0 - 1e-12 && c.max_observed <= 2.0 + 1e-12,
                     "[" + format_double(c.min_observed) + ", " + format_double(c.max_observed) + "]");
    });
    s.add("spectra.thouless_free", [&] {
        const std::vector<double> grid{-1.5, -0.5, 0.5, 1.5};
        const auto r = thouless_residual(free, grid, 500, 2, 4, lyap(100000, 2, threads));
        return bound("", r.rms, 0.05);
    });
    s.add("spectra.thouless_bernoulli", [&] {
        std::vector<double> grid;
        for (int k = 0; k < 20; ++k) grid.push_back(-1.0 + 2.0 * k / 19.0);
        const auto r = thouless_residual(bern, grid, 2000, 4, 5, lyap(1000000, 2, threads));
        return bound("", r.rms, 0.05);
    });
    s.add("spectra.thouless_scaling", [&] {
        const std::vector<double> grid{-0.5, 0.0, 0.5, 1.0};
        const auto a = thouless_residual(bern, grid, 200, 8, 2, lyap(20000, 4, threads));
        const auto b = thouless_residual(bern, grid, 400, 8, 2, lyap(20000, 4, threads));
        double sa = 0, sb = 0;
        for (const auto& r : a.rows) sa += r.conv_sigma;
        for (const auto& r : b.rows) sb += r.conv_sigma;
        return truth("", sa / sb >= 1.0 && sa / sb <= 4.0, "ratio " + format_double(sa / sb));
    });
    s.add("spectra.eigenmode_localized", [&] {
        const auto r = eigenmode_decay(DiscreteQuasi1D{1, {}, 4.0, {bernoulli01()}}, 200, {-1.0, 1.0}, 4, 3,
                                       lyap(100000, 4, threads));
        bool pos = true;
        for (const auto& m : r.modes) pos = pos && m.rate > 0.0;
        const double rel = std::abs(r.median_rate - r.gamma_D) / r.gamma_D;
        return truth("", pos && rel <= 0.3 && r.localized,
                     "median " + format_double(r.median_rate) + " gamma " + format_double(r.gamma_D));
    });
    s.add("spectra.eigenmode_free", [&] {
        try {
            const auto r = eigenmode_decay(free, 200, {-1.0, 1.0}, 2, 3, lyap(10000, 2, threads));
            return truth("", !r.localized, "flagged as not localized");
        } catch (const Error& e) {
            return truth("", e.kind() == ErrorKind::NoInteriorModes, e.what());
        }
    });
    s.add("spectra.wegner_vacuous", [&] {
        const auto w = wegner_probability(bern, 0.5, 20, 100.0, 50, 1, threads);
        const auto z = wegner_probability(bern, 0.5, 20, 0.0, 50, 1, threads);
        return truth("", w.probability == 1.0 && z.probability == 0.0,
                     format_double(w.probability) + ", " + format_double(z.probability));
    });
    s.add("spectra.wegner_trend", [&] {
        const std::vector<int> Ls{50, 100, 200};
        const auto rows = wegner_probe(bern, 0.5, Ls, 0.5, 0.5, 400, 1, 0.25, threads);
        return truth("", wegner_non_increasing(rows), "L = 50, 100, 200");
    });
    s.add("spectra.transport", [&] {
        std::vector<double> t{0.0};
        for (int k = 0; k < 12; ++k) t.push_back(std::pow(10.0, 1.6 * k / 11.0));
        const auto f = transport_probe(free, 150, t, 1, 1, threads);
        const auto l = transport_probe(DiscreteQuasi1D{1, {}, 4.0, {bernoulli01()}}, 150, t, 4, 1, threads);
        const bool ok = f.m2[0] == 0.0 && l.m2[0] == 0.0 && std::abs(f.kappa_hat - 2.0) <= 0.1 && l.kappa_hat <= 0.1;
        return truth("", ok, "free " + format_double(f.kappa_hat) + ", lambda=4 " + format_double(l.kappa_hat));
    });
}

void cli_checks(Suite& s) {
    s.add("config.defaults", [] {
        const RunConfig c = parse_config("[run]\ntask = lyap-scan\ngrid = 3\n[model]\nfamily = discrete\n");
        return truth("", c.realizations == 16 && c.reorth == 10 && c.burn_in == 1000, "R, k, burn-in");
    });
    s.add("config.r2t2", [] {
        return raises("", ErrorKind::ValidationError, [] {
            parse_config("[run]\ntask = lyap-scan\ngrid = 0\n[model]\nfamily = unitary-anderson\nr = 0.6\n"
                         "t = 0.7348469228349535\n");
        });
    });
    s.add("config.duplicate_key", [] {
        SelfCheck c = raises("", ErrorKind::ParseError, [] { parse_config("[run]\ntask = ids\nL = 5\nL = 6\n"); });
        c.pass = c.pass && c.detail.find("line 4") != std::string::npos;
        return c;
    });
    s.add("config.roundtrip", [] {
        RunConfig cfg;
        cfg.model = DiscreteQuasi1D{2, {}, 1.5, {bernoulli01(0.3)}};
        cfg.grid = {0.25, 0.5};
        const bool ok = parse_config(serialize_config(cfg)) == cfg;
        return truth("", ok, ok ? "ok" : "mismatch");
    });
    s.add("cli.lyap_scan_schema", [] {
        RunConfig cfg = parse_config("[run]\ntask = lyap-scan\ngrid = 2.5, 3.0\nsteps = 2000\nrealizations = 2\n"
                                     "[model]\nfamily = discrete\nlambda = 0\n");
        const auto a = execute(cfg, 1);
        const auto b = execute(cfg, 2);
        const std::string csv = to_csv(a.table);
        const bool ok = csv.rfind("E,gamma_1,sigma_1,gamma_2,sigma_2,pairing_defect\n", 0) == 0 &&
                        a.table.rows.size() == 2 && csv == to_csv(b.table) && a.json == b.json;
        return truth("", ok, ok ? "header and rerun identical" : "schema or rerun mismatch");
    });
}

}  // namespace

std::vector<SelfCheck> run_selftest(unsigned threads) {
    Suite s;
    matkit_checks(s);
    randsrc_checks(s);
    model_checks(s);
    lyapunov_checks(s, threads);
    liecheck_checks(s);
    spectra_checks(s, threads);
    cli_checks(s);
    return s.take();
}

}  // namespace q1d
