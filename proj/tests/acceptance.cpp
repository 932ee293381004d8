// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include "q1d/config.hpp"
#include "q1d/errors.hpp"
#include "q1d/liecheck.hpp"
#include "q1d/lyapunov.hpp"
#include "q1d/spectra.hpp"

using namespace q1d;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

LyapOptions lyap(std::int64_t n, int R) {
    LyapOptions o;
    o.steps = n;
    o.realizations = R;
    return o;
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0;
    for (double x : v) m += x;
    m /= n;
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / (n - 1.0) / n)};
}

// 1. constant matrix [[-E,-1],[1,0]]: spectral radius gives gamma in closed form
Verdict free_lattice() {
    const DiscreteQuasi1D free{1, {}, 0.0, {bernoulli01()}};
    const double want = std::log((3.0 + std::sqrt(5.0)) / 2.0);
    const auto a = lyap_spectrum(free, SpectralPoint::at_energy(3.0), 101, lyap(1000000, 16));
    const auto b = lyap_spectrum(free, SpectralPoint::at_energy(0.0), 101, lyap(1000000, 16));
    const double ea = std::abs(a.exponents[0] - want);
    const double ta = std::max(1e-2, 3.0 * a.std_errors[0]);
    const double eb = std::abs(b.exponents[0]);
    const double tb = 3.0 * b.std_errors[0];
    return {ea <= ta && eb <= tb, "E=3 |err| " + num(ea) + " <= " + num(ta) + "; E=0 |gamma| " + num(eb) + " <= " +
                                      num(tb)};
}

// 2. opposite exponents pair up
Verdict pairing() {
    double worst = -1e300;
    std::string detail;
    auto check = [&](const ModelSpec& m, const SpectralPoint& p, const std::string& name, std::int64_t n) {
        const auto ls = lyap_spectrum(m, p, 202, lyap(n, 8));
        const int k = static_cast<int>(ls.exponents.size());
        double sig = 0;
        for (double s : ls.std_errors) sig = std::max(sig, s);
        const double tol = std::max(1e-3, 6.0 * sig);
        double def = 0;
        for (int i = 0; i < k; ++i) def = std::max(def, std::abs(ls.exponents[i] + ls.exponents[k - 1 - i]));
        worst = std::max(worst, def - tol);
        detail += name + " " + num(def) + "/" + num(tol) + " ";
    };
    for (int D : {1, 2, 3})
        check(DiscreteQuasi1D{D, {}, 1.0, {bernoulli01()}}, SpectralPoint::at_energy(0.5), "disc" + std::to_string(D),
              200000);
    Mat a1 = Mat::Constant(1, 1, cplx(0.4, 0.1));
    Mat a2(2, 2);
    a2 << cplx(0.4, 0.0), cplx(0.1, 0.1), cplx(0.0, -0.2), cplx(0.3, 0.0);
    check(ScatteringZipper{1, a1}, SpectralPoint::at_angle(0.7), "zip1", 50000);
    check(ScatteringZipper{2, a2}, SpectralPoint::at_angle(0.7), "zip2", 50000);
    return {worst <= 0.0, detail};
}

// 3. sum of the top p QR exponents against the growth of the p-th exterior power
Verdict wedge() {
    const DiscreteQuasi1D m{2, {}, 1.0, {bernoulli01()}};
    const auto pt = SpectralPoint::at_energy(0.5);
    constexpr int R = 12;
    std::string detail;
    bool ok = true;
    for (int p : {1, 2}) {
        std::vector<double> qr(R), wo(R);
        for (int r = 0; r < R; ++r) {
            const std::uint64_t seed = 3000 + r;
            const auto ls = lyap_spectrum(m, pt, seed, lyap(100000, 1));
            qr[r] = 0;
            for (int i = 0; i < p; ++i) qr[r] += ls.exponents[i];
            wo[r] = wedge_oracle(m, pt, seed, p, lyap(100000, 1)).value;
        }
        const auto [mq, sq] = mean_se(qr);
        const auto [mw, sw] = mean_se(wo);
        const double d = std::abs(mq - mw), tol = 3.0 * std::hypot(sq, sw);
        ok = ok && d <= tol;
        detail += "p=" + std::to_string(p) + " " + num(d) + " <= " + num(tol) + " ";
    }
    return {ok, detail};
}

// 4. exact dimension D(2D+1)
Verdict lemma_spN() {
    bool ok = true;
    std::string bad;
    for (int D = 1; D <= 6; ++D)
        for (int k = 0; k < 10; ++k) {
            const double E = -3.0 + 6.0 * k / 9.0;
            const auto rep = check_lemma_spN(D, E, std::vector<double>(D, 1.0), 1e-9);
            if (rep.verdict != LieClosureReport::Verdict::Full || rep.closure_dim != D * (2 * D + 1)) {
                ok = false;
                bad += " D=" + std::to_string(D) + ",E=" + num(E) + ":" + std::to_string(rep.closure_dim);
            }
        }
    return {ok, ok ? "60/60 Full" : "failures" + bad};
}

// 5. two distinct positive exponents at D = 2
Verdict separation() {
    const auto ls =
        lyap_spectrum(DiscreteQuasi1D{2, {}, 1.0, {bernoulli01()}}, SpectralPoint::at_energy(0.0), 505, lyap(1000000, 16));
    const double g1 = ls.exponents[0], g2 = ls.exponents[1];
    const double s1 = ls.std_errors[0], s2 = ls.std_errors[1];
    const double gap = g1 - g2, comb = std::hypot(s1, s2);
    return {gap >= 5.0 * comb && g2 >= 5.0 * s2,
            "g1 " + num(g1) + " g2 " + num(g2) + " gap/sigma " + num(gap / comb) + " g2/sigma " + num(g2 / s2)};
}

// 6. (U+U) R_{a,b} (U+U) with a = 1, b = sqrt(3) at E = 2
Verdict point_closed_form() {
    RMat v0(2, 2);
    v0 << 0, 1, 1, 0;
    const double a = 1.0, b = std::sqrt(3.0);
    RMat r = RMat::Zero(4, 4);
    r(0, 0) = std::cos(a), r(0, 2) = std::sin(a) / a, r(2, 0) = -a * std::sin(a), r(2, 2) = std::cos(a);
    r(1, 1) = std::cos(b), r(1, 3) = std::sin(b) / b, r(3, 1) = -b * std::sin(b), r(3, 3) = std::cos(b);
    RMat u(2, 2);
    u << 1, 1, 1, -1;
    u /= std::sqrt(2.0);
    RMat uu = RMat::Zero(4, 4);
    uu.topLeftCorner(2, 2) = u;
    uu.bottomRightCorner(2, 2) = u;
    const PointInteractions p{2, v0, {1.0, 1.0}, {bernoulli01()}};
    const double res = (point_interaction_transfer(p, 2.0, RVec::Zero(2)).matrix - (uu * r * uu).cast<cplx>()).norm();
    return {res <= 1e-10, "residual " + num(res) + " <= 1e-10"};
}

// 7. zipper group structure over random phases
Verdict zipper() {
    Mat alpha(2, 2);
    alpha << cplx(0.4, 0.0), cplx(0.1, 0.1), cplx(0.0, -0.2), cplx(0.3, 0.0);
    const ScatteringZipper m{2, alpha};
    double lor = 0, fac = 0, cay = 0;
    for (int s = 0; s < 1000; ++s) {
        Stream rng(SeedSpec{707, static_cast<std::uint64_t>(s), -1});
        const cplx z = std::polar(1.0, 2.0 * kPi * rng.uniform());
        const auto ph = draw_zipper_phases(SeedSpec{707, 0, 0}, s, 2);
        const auto t = zipper_transfer(m, z, ph);
        lor = std::max(lor, group_residual(t.matrix, t.group));
        fac = std::max(fac, zipper_factorization_residual(m, z, ph));
        cay = std::max(cay, group_residual(cayley_realify(t.matrix), GroupTag::symplectic(4)));
    }
    const auto rep = zipper_lie_closure(2, std::polar(1.0, 0.7), alpha);
    const bool full = rep.verdict == LieClosureReport::Verdict::Full && rep.closure_dim == 16;
    return {lor <= 1e-10 && fac <= 1e-10 && cay <= 1e-8 && full,
            "lorentz " + num(lor) + " factor " + num(fac) + " cayley " + num(cay) + " closure " +
                std::to_string(rep.closure_dim)};
}

// 8. no eigenvalue outside the printed almost-sure spectrum
Verdict coverage() {
    const auto d = spectrum_coverage(DiscreteQuasi1D{1, {}, 1.0, {bernoulli01()}}, 500, 8, 808);
    // two-point phases keep the target a proper subset of the circle
    const double h = 1.0 / std::sqrt(2.0);
    const UnitaryAnderson ua{h, h, TwoPoint{0.0, kPi / 2.0, 0.5}};
    const double l0 = unitary_anderson_lambda0(ua);
    const auto u = spectrum_coverage(ua, 500, 8, 808);
    const bool ok = d.violations == 0 && d.min_observed >= -2.0 - 1e-8 && d.max_observed <= 3.0 + 1e-8 &&
                    u.violations == 0 && std::abs(l0 - kPi / 2.0) <= 1e-12;
    return {ok, "discrete [" + num(d.min_observed) + ", " + num(d.max_observed) + "] outside " +
                    std::to_string(d.violations) + "; unitary outside " + std::to_string(u.violations) + " of " +
                    std::to_string(u.eigenvalues) + ", lambda0 " + num(l0)};
}

// 9. integrated density of states
Verdict ids() {
    const std::vector<double> grid{-3.0, -1.0, 0.0, 1.0, 3.0};
    const auto f = ids_estimate(DiscreteQuasi1D{1, {}, 0.0, {bernoulli01()}}, grid, 500, 4, 909);
    const auto b = ids_estimate(DiscreteQuasi1D{2, {}, 1.0, {bernoulli01()}}, std::vector<double>{-5.0, 0.0, 6.0},
                                500, 4, 909);
    bool mono = true;
    for (const auto* c : {&f, &b})
        for (const auto& row : c->per_realization)
            for (std::size_t k = 1; k < row.size(); ++k) mono = mono && row[k] >= row[k - 1];
    const double n0 = f.values[2];
    const bool lim = f.values.front() == 0.0 && f.values.back() == 1.0 && b.values.front() == 0.0 &&
                     std::abs(b.values.back() - 2.0) <= 1e-12;
    return {std::abs(n0 - 0.5) <= 0.01 && mono && lim,
            "N(0) " + num(n0) + ", monotone " + (mono ? "yes" : "no") + ", limits " + num(f.values.front()) + "/" +
                num(f.values.back()) + " and " + num(b.values.front()) + "/" + num(b.values.back())};
}

// 10. gamma(E) against the log potential of the density of states
Verdict thouless() {
    std::vector<double> grid;
    for (int k = 0; k < 20; ++k) grid.push_back(-1.0 + 2.0 * k / 19.0);
    LyapOptions o = lyap(1000000, 4);
    const auto rep = thouless_residual(DiscreteQuasi1D{1, {}, 1.0, {bernoulli01()}}, grid, 2000, 8, 1010, o);
    return {rep.rms <= 0.05, "rms " + num(rep.rms) + " <= 0.05, alpha " + num(rep.alpha)};
}

// 11. bounded second moment under strong disorder, ballistic growth without
Verdict transport() {
    std::vector<double> t{0.0};
    for (int k = 0; k < 20; ++k) t.push_back(std::pow(10.0, 2.0 * k / 19.0));
    const auto f = transport_probe(DiscreteQuasi1D{1, {}, 0.0, {bernoulli01()}}, 400, t, 1, 1111);
    const auto s = transport_probe(DiscreteQuasi1D{1, {}, 4.0, {bernoulli01()}}, 400, t, 8, 1111);
    const double ratio = s.sup_m2 / f.sup_m2;
    return {ratio <= 0.1 && std::abs(f.kappa_hat - 2.0) <= 0.1,
            "sup ratio " + num(ratio) + " <= 0.1, free exponent " + num(f.kappa_hat)};
}

// 12. probability of a near-resonance does not grow with L
Verdict wegner() {
    const std::vector<int> Ls{50, 100, 200};
    const auto rows = wegner_probe(DiscreteQuasi1D{1, {}, 1.0, {bernoulli01()}}, 0.5, Ls, 0.5, 0.5, 400, 1212, 0.25);
    std::string detail;
    for (const auto& r : rows)
        detail += "L=" + std::to_string(r.L) + " p=" + num(r.probability) + " [" + num(r.ci_lo) + "," + num(r.ci_hi) +
                  "] ";
    return {wegner_non_increasing(rows), detail};
}

// 13. positive exponent for two-point phases
Verdict unitary_positivity() {
    const UnitaryAnderson ua{0.6, 0.8, TwoPoint{0.0, 1.0, 0.5}};
    bool ok = true;
    std::string detail;
    for (double a : {0.3, 1.7, -2.4}) {
        const auto ls = lyap_spectrum(ua, SpectralPoint::at_angle(a), 1313, lyap(200000, 16));
        ok = ok && ls.exponents[0] >= 5.0 * ls.std_errors[0] && ls.std_errors[0] > 0.0;
        detail += "arg " + num(a) + ": " + num(ls.exponents[0]) + "/" + num(ls.std_errors[0]) + " ";
    }
    return {ok, detail};
}

// 14. byte-identical reruns of the command line tool
Verdict determinism() {
    const fs::path dir = fs::temp_directory_path() / ("q1d_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::pair<const char*, const char*> tasks[] = {
        {"lyap-scan", "[run]\ntask = lyap-scan\ngrid = 0, 0.5\nsteps = 20000\nrealizations = 4\n"
                      "[model]\nfamily = discrete\nD = 2\n"},
        {"ids", "[run]\ntask = ids\ngrid = -1, 0, 1\nL = 100\nrealizations = 4\n[model]\nfamily = unitary-anderson\n"
                "r = 0.6\nt = 0.8\nphase_law = two-point(0, 1, 0.5)\n"},
        {"furstenberg", "[run]\ntask = furstenberg\ngrid = 0.5, 1\n[model]\nfamily = continuous\nD = 2\n"
                        "[furstenberg]\nd_O = 0.2\n"},
        {"zipper-check", "[run]\ntask = zipper-check\ngrid = 0.3\n[model]\nfamily = zipper\nD = 2\n"
                         "alpha = 0.4 0.1+0.1i; -0.2i 0.3\n[zipper-check]\nsamples = 100\n"},
        {"thouless", "[run]\ntask = thouless\ngrid = -0.5, 0, 0.5\nL = 200\nrealizations = 4\nsteps = 20000\n"
                     "[model]\nfamily = discrete\n"},
        {"wegner", "[run]\ntask = wegner\n[model]\nfamily = discrete\n[wegner]\nL_list = 20, 40\ntrials = 200\n"},
        {"eigenmode", "[run]\ntask = eigenmode\nL = 150\nrealizations = 2\nsteps = 20000\n[model]\n"
                      "family = discrete\nlambda = 4\n"},
        {"transport", "[run]\ntask = transport\nL = 150\nrealizations = 2\n[model]\nfamily = discrete\nlambda = 4\n"},
        {"selftest", "[run]\ntask = selftest\n"},
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    bool ok = true;
    std::string detail;
    for (const auto& [task, text] : tasks) {
        const fs::path cfg = dir / (std::string(task) + ".cfg");
        std::ofstream(cfg) << text;
        for (const char* fmt : {"csv", "json"}) {
            std::string outs[2];
            int codes[2];
            for (int k = 0; k < 2; ++k) {
                const fs::path out = dir / (std::string(task) + std::to_string(k) + "." + fmt);
                const std::string cmd = std::string(QUASI1D_BIN) + " " + task + " --config " + cfg.string() +
                                        " --out " + out.string() + " --seed 1414 --format " + fmt + " --threads " +
                                        std::to_string(k + 1) + " >/dev/null 2>&1";
                const int st = std::system(cmd.c_str());
                codes[k] = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
                outs[k] = slurp(out);
            }
            const bool same = codes[0] == 0 && codes[1] == 0 && !outs[0].empty() && outs[0] == outs[1];
            if (!same) detail += std::string(task) + "/" + fmt + " ";
            ok = ok && same;
        }
    }
    fs::remove_all(dir);
    return {ok, ok ? "9 tasks x 2 formats identical" : "differs: " + detail};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"free-lattice Lyapunov oracle", free_lattice},
        {"pairing of opposite exponents", pairing},
        {"exterior-power oracle", wedge},
        {"sp(N) Lie closure D=1..6", lemma_spN},
        {"separation of exponents D=2", separation},
        {"point-interaction closed form", point_closed_form},
        {"zipper structure", zipper},
        {"spectrum coverage", coverage},
        {"integrated density of states", ids},
        {"Thouless consistency", thouless},
        {"transport separation", transport},
        {"Wegner trend", wegner},
        {"unitary Anderson positivity", unitary_positivity},
        {"CLI determinism", determinism},
    };
    int failed = 0, idx = 0;
    for (const auto& [name, fn] : criteria) {
        ++idx;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failed;
        std::printf("%s %2d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", idx, name, v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", idx - failed, idx);
    return failed == 0 ? 0 : 1;
}
