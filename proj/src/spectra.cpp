#include "q1d/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "q1d/errors.hpp"
#include "q1d/parallel.hpp"

namespace q1d {

namespace {

constexpr double kPi = std::numbers::pi;

void check_lapack(lapack_int info, const char* what) {
    if (info != 0) fail(ErrorKind::PreconditionViolated, std::string(what) + " failed, info=" + std::to_string(info));
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    const double mean = pairwise_sum(v) / n;
    if (v.size() < 2) return {mean, 0.0};
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
    return {mean, std::sqrt(pairwise_sum(dev) / (n - 1.0) / n)};
}

const DiscreteQuasi1D& require_discrete(const ModelSpec& spec, const char* op) {
    const auto* m = std::get_if<DiscreteQuasi1D>(&spec);
    if (!m) fail(ErrorKind::UnsupportedModel, std::string(op) + " supports the discrete family only");
    return *m;
}

double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

bool in_target(double x, const std::vector<std::pair<double, double>>& target, bool angles, double tol) {
    for (const auto& [lo, hi] : target) {
        if (!angles) {
            if (x >= lo - tol && x <= hi + tol) return true;
            continue;
        }
        if (hi - lo >= 2.0 * kPi) return true;
        const double off = std::fmod(std::fmod(x - lo, 2.0 * kPi) + 2.0 * kPi, 2.0 * kPi);
        if (off <= hi - lo + tol || off >= 2.0 * kPi - tol) return true;
    }
    return false;
}

RVec spectrum_of(const ModelSpec& spec, int L, const SeedSpec& seed, double& sites) {
    if (const auto* m = std::get_if<DiscreteQuasi1D>(&spec)) {
        sites = 2.0 * L + 1.0;
        return eigensolve_sym(build_finite_discrete_band(*m, L, seed)).values;
    }
    if (const auto* m = std::get_if<ExtendedCMV>(&spec)) {
        sites = 2.0 * L + 1.0;
        return unitary_eigen_angles(build_extended_cmv(*m, L, seed));
    }
    if (const auto* m = std::get_if<UnitaryAnderson>(&spec)) {
        sites = 2.0 * L + 2.0;
        return unitary_eigen_angles(build_unitary_anderson_ring(*m, L, seed));
    }
    fail(ErrorKind::UnsupportedModel, "no finite-volume builder for family " + family_name(spec));
}

}  // namespace

EigenResult eigensolve_sym(const Mat& m, bool vectors) {
    if (m.rows() != m.cols()) fail(ErrorKind::NotSymmetric, "matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (m.imag().cwiseAbs().maxCoeff() > 1e-10 * scale ||
        (m.real() - m.real().transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        fail(ErrorKind::NotSymmetric, "symmetry residual exceeds 1e-10");
    RMat a = m.real();
    a = 0.5 * (a + a.transpose()).eval();
    EigenResult out;
    if (a.rows() == 0) return out;
    // Eigen's own kernels: the dense LAPACK drivers go through real level-3 BLAS
    Eigen::SelfAdjointEigenSolver<RMat> es(a, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) fail(ErrorKind::RankDeficient, "symmetric eigensolver did not converge");
    out.values = es.eigenvalues();
    if (vectors) out.vectors = es.eigenvectors();
    return out;
}

EigenResult eigensolve_sym(const SymBand& m, bool vectors) {
    RMat ab = m.ab;
    EigenResult out;
    out.values.resize(m.n);
    if (!vectors) {
        check_lapack(LAPACKE_dsbevd(LAPACK_COL_MAJOR, 'N', 'L', m.n, m.kd, ab.data(), m.kd + 1, out.values.data(),
                                    nullptr, 1),
                     "dsbevd");
        return out;
    }
    // dsbev stays on level-2 BLAS; the divide-and-conquer back-transform uses dgemm
    out.vectors.resize(m.n, m.n);
    check_lapack(LAPACKE_dsbev(LAPACK_COL_MAJOR, 'V', 'L', m.n, m.kd, ab.data(), m.kd + 1, out.values.data(),
                               out.vectors.data(), m.n),
                 "dsbev");
    return out;
}

RVec unitary_eigen_angles(const Mat& u) {
    const auto n = static_cast<lapack_int>(u.rows());
    Mat a = u;
    CVec w(n);
    cplx dummy;
    check_lapack(LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), &dummy, 1, &dummy, 1), "zgeev");
    RVec ang(n);
    for (lapack_int k = 0; k < n; ++k) ang[k] = wrap_angle(std::arg(w[k]));
    std::sort(ang.data(), ang.data() + n);
    return ang;
}

IdsCurve ids_estimate(const ModelSpec& spec, std::span<const double> grid, int L, int R, std::uint64_t seed,
                      unsigned threads) {
    if (L < 8) fail(ErrorKind::PreconditionViolated, "L >= 8");
    if (R < 4) fail(ErrorKind::PreconditionViolated, "R >= 4");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] < grid[i - 1]) fail(ErrorKind::PreconditionViolated, "grid must be ordered");
    validate(spec);
    IdsCurve out;
    out.grid.assign(grid.begin(), grid.end());
    out.L = L;
    out.realizations = R;
    out.angles = is_unitary_family(spec);
    out.per_realization.assign(R, std::vector<double>(grid.size()));
    parallel_for(R, threads, [&](std::size_t r) {
        double sites = 1.0;
        const RVec ev = spectrum_of(spec, L, SeedSpec{seed, r, 0}, sites);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto cnt = std::upper_bound(ev.data(), ev.data() + ev.size(), grid[g]) - ev.data();
            out.per_realization[r][g] = static_cast<double>(cnt) / sites;
        }
    });
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> col(R);
        for (int r = 0; r < R; ++r) col[r] = out.per_realization[r][g];
        const auto [m, se] = mean_se(col);
        out.values.push_back(m);
        out.std_errors.push_back(se);
    }
    return out;
}

std::vector<std::pair<double, double>> spectrum_target(const ModelSpec& spec) {
    std::vector<std::pair<double, double>> out;
    if (const auto* m = std::get_if<DiscreteQuasi1D>(&spec)) {
        if (m->D != 1) fail(ErrorKind::UnsupportedModel, "printed spectrum only for D = 1");
        const auto& law = m->laws.front();
        if (std::holds_alternative<UniformInterval>(law)) {
            const auto [lo, hi] = support_hull(law);
            out.emplace_back(-2.0 + m->lambda * std::min(lo, hi), 2.0 + m->lambda * std::max(lo, hi));
        } else {
            for (double a : atoms(law)) out.emplace_back(-2.0 + m->lambda * a, 2.0 + m->lambda * a);
        }
        std::sort(out.begin(), out.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& iv : out) {
            if (!merged.empty() && iv.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        return merged;
    }
    if (const auto* m = std::get_if<UnitaryAnderson>(&spec)) {
        const double l0 = unitary_anderson_lambda0(*m);
        if (std::holds_alternative<UniformInterval>(m->phase_law)) {
            const auto [lo, hi] = support_hull(m->phase_law);
            out.emplace_back(-l0 - hi, l0 - lo);
        } else {
            for (double s : atoms(m->phase_law)) out.emplace_back(-l0 - s, l0 - s);
        }
        return out;
    }
    if (std::holds_alternative<ExtendedCMV>(spec)) return {{-kPi, kPi}};
    fail(ErrorKind::UnsupportedModel, "no printed almost-sure spectrum for family " + family_name(spec));
}

CoverageReport spectrum_coverage(const ModelSpec& spec, int L, int R, std::uint64_t seed, unsigned threads) {
    if (L < 1 || R < 1) fail(ErrorKind::PreconditionViolated, "L >= 1 and R >= 1");
    validate(spec);
    CoverageReport out;
    out.target = spectrum_target(spec);
    out.angles = is_unitary_family(spec);
    std::vector<RVec> spectra(R);
    parallel_for(R, threads, [&](std::size_t r) {
        double sites = 1.0;
        spectra[r] = spectrum_of(spec, L, SeedSpec{seed, r, 0}, sites);
    });
    std::vector<double> all;
    for (const auto& s : spectra) all.insert(all.end(), s.data(), s.data() + s.size());
    std::sort(all.begin(), all.end());
    out.eigenvalues = static_cast<long>(all.size());
    out.min_observed = all.front();
    out.max_observed = all.back();
    for (double x : all)
        if (!in_target(x, out.target, out.angles, 1e-8)) ++out.violations;

    // fraction of target points within 0.02 of some eigenvalue
    constexpr int probes = 4000;
    constexpr double reach = 0.02;
    long inside = 0, hit = 0;
    double lo = out.angles ? -kPi : out.target.front().first;
    double hi = out.angles ? kPi : out.target.back().second;
    for (int k = 0; k < probes; ++k) {
        const double x = lo + (hi - lo) * (k + 0.5) / probes;
        if (!in_target(x, out.target, out.angles, 0.0)) continue;
        ++inside;
        auto it = std::lower_bound(all.begin(), all.end(), x);
        double best = 1e300;
        if (it != all.end()) best = std::min(best, *it - x);
        if (it != all.begin()) best = std::min(best, x - *std::prev(it));
        if (out.angles) {
            best = std::min(best, all.front() + 2.0 * kPi - x);
            best = std::min(best, x - (all.back() - 2.0 * kPi));
        }
        if (best <= reach) ++hit;
    }
    out.coverage_fraction = inside > 0 ? static_cast<double>(hit) / inside : 0.0;
    return out;
}

double log_potential(std::span<const double> eigenvalues, double sites, double E, double window) {
    double acc = 0.0;
    for (double ep : eigenvalues) {
        const double d = ep - E;
        if (std::abs(d) <= 0.5 * window) continue;
        acc += std::log(std::abs(d)) - 0.5 * std::log1p(ep * ep);
    }
    return acc / sites;
}

ThoulessReport thouless_residual(const ModelSpec& spec, std::span<const double> grid, int L, int R,
                                 std::uint64_t seed, const LyapOptions& lyap) {
    const auto& m = require_discrete(spec, "thouless_residual");
    if (m.D != 1) fail(ErrorKind::UnsupportedModel, "thouless_residual needs D = 1");
    if (grid.size() < 2) fail(ErrorKind::PreconditionViolated, "grid needs at least 2 points");
    if (L < 8 || R < 2) fail(ErrorKind::PreconditionViolated, "L >= 8 and R >= 2");
    std::vector<RVec> spectra(R);
    parallel_for(R, lyap.threads, [&](std::size_t r) {
        spectra[r] = eigensolve_sym(build_finite_discrete_band(m, L, SeedSpec{seed, r, 0})).values;
    });
    const double sites = 2.0 * L + 1.0;
    ThoulessReport out;
    for (double E : grid) {
        ThoulessRow row;
        row.E = E;
        const auto ls = lyap_spectrum(spec, SpectralPoint::at_energy(E), seed, lyap);
        row.gamma = ls.exponents[0];
        row.gamma_sigma = ls.std_errors[0];
        std::vector<double> per(R), wide(R);
        for (int r = 0; r < R; ++r) {
            std::span<const double> ev(spectra[r].data(), spectra[r].size());
            per[r] = log_potential(ev, sites, E);
            wide[r] = log_potential(ev, sites, E, 1e-4);
        }
        const auto [c, cse] = mean_se(per);
        row.conv = c;
        row.conv_sigma = cse;
        out.sensitivity = std::max(out.sensitivity, std::abs(pairwise_sum(wide) / R - c));
        out.rows.push_back(row);
    }
    std::vector<double> diff;
    for (const auto& row : out.rows) diff.push_back(row.gamma - row.conv);
    const auto [a, ase] = mean_se(diff);
    out.alpha = a;
    out.alpha_ci = 1.96 * ase;
    std::vector<double> sq;
    for (auto& row : out.rows) {
        row.residual = row.gamma - row.conv - a;
        sq.push_back(row.residual * row.residual);
    }
    out.rms = std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
    return out;
}

EigenmodeReport eigenmode_decay(const ModelSpec& spec, int L, std::pair<double, double> window, int R,
                                std::uint64_t seed, const LyapOptions& lyap) {
    const auto& m = require_discrete(spec, "eigenmode_decay");
    if (L < 8 || R < 1) fail(ErrorKind::PreconditionViolated, "L >= 8 and R >= 1");
    if (!(window.first < window.second)) fail(ErrorKind::PreconditionViolated, "empty energy window");
    const int D = m.D;
    const int cells = 2 * L + 1;
    std::vector<std::vector<ModeRate>> per(R);
    std::vector<int> examined(R, 0);
    parallel_for(R, lyap.threads, [&](std::size_t r) {
        const EigenResult er = eigensolve_sym(build_finite_discrete_band(m, L, SeedSpec{seed, r, 0}), true);
        for (Eigen::Index k = 0; k < er.values.size(); ++k) {
            const double ev = er.values[k];
            if (ev < window.first || ev > window.second) continue;
            ++examined[r];
            std::vector<double> mass(cells, 0.0);
            for (int c = 0; c < cells; ++c)
                for (int i = 0; i < D; ++i) mass[c] += er.vectors(c * D + i, k) * er.vectors(c * D + i, k);
            double total = 0.0, middle = 0.0;
            for (int c = 0; c < cells; ++c) {
                total += mass[c];
                if (std::abs(c - L) * 2 <= L) middle += mass[c];
            }
            if (middle < 0.9 * total) continue;
            const int peak = static_cast<int>(std::max_element(mass.begin(), mass.end()) - mass.begin());
            const double floor = 1e-24 * mass[peak];
            // tail mass beyond distance d on each side is monotone and decays at
            // the same rate as the envelope, without the single-cell dips
            std::vector<double> xs, ys;
            for (int side : {-1, 1}) {
                std::vector<double> tail;
                for (int c = peak + side; c >= 0 && c < cells; c += side) tail.push_back(mass[c]);
                for (int i = static_cast<int>(tail.size()) - 2; i >= 0; --i) tail[i] += tail[i + 1];
                for (std::size_t d = 0; d < tail.size() && tail[d] > floor; ++d) {
                    xs.push_back(static_cast<double>(d + 1));
                    ys.push_back(0.5 * std::log(tail[d]));
                }
            }
            if (xs.size() < 5) continue;
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
            mx /= xs.size();
            my /= xs.size();
            double sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxx += (xs[i] - mx) * (xs[i] - mx);
                sxy += (xs[i] - mx) * (ys[i] - my);
            }
            if (sxx <= 0.0) continue;
            per[r].push_back({ev, -sxy / sxx, static_cast<int>(xs.size())});
        }
    });
    EigenmodeReport out;
    for (int r = 0; r < R; ++r) {
        out.modes.insert(out.modes.end(), per[r].begin(), per[r].end());
        out.modes_examined += examined[r];
    }
    if (out.modes.empty()) fail(ErrorKind::NoInteriorModes, "no eigenpair passes the interior mass filter");
    std::vector<double> rates;
    for (const auto& md : out.modes) rates.push_back(md.rate);
    std::sort(rates.begin(), rates.end());
    const std::size_t h = rates.size() / 2;
    out.median_rate = rates.size() % 2 ? rates[h] : 0.5 * (rates[h - 1] + rates[h]);
    // gamma_D moves across the window, so average it over the retained energies
    constexpr int kGrid = 9;
    std::vector<double> ge(kGrid), gg(kGrid), gs(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        ge[i] = window.first + (window.second - window.first) * i / (kGrid - 1.0);
        const auto ls = lyap_spectrum(spec, SpectralPoint::at_energy(ge[i]), seed, lyap);
        gg[i] = ls.exponents[D - 1];
        gs[i] = ls.std_errors[D - 1];
    }
    for (const auto& md : out.modes) {
        const double u = (md.energy - window.first) / (window.second - window.first) * (kGrid - 1.0);
        const int i = std::clamp(static_cast<int>(u), 0, kGrid - 2);
        const double w = u - i;
        out.gamma_D += (1.0 - w) * gg[i] + w * gg[i + 1];
        out.gamma_sigma += (1.0 - w) * gs[i] + w * gs[i + 1];
    }
    out.gamma_D /= static_cast<double>(out.modes.size());
    out.gamma_sigma /= static_cast<double>(out.modes.size());
    out.localized = out.gamma_D > 5.0 * std::max(out.gamma_sigma, 1.0 / static_cast<double>(lyap.steps));
    return out;
}

std::pair<double, double> wilson_interval(long hits, long n, double z) {
    if (n <= 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

WegnerRow wegner_probability(const ModelSpec& spec, double E, int L, double threshold, int R, std::uint64_t seed,
                             unsigned threads) {
    const auto& m = require_discrete(spec, "wegner_probe");
    if (L < 1 || R < 1) fail(ErrorKind::PreconditionViolated, "L >= 1 and R >= 1");
    std::vector<char> hit(R, 0);
    const std::uint64_t master = splitmix64(seed ^ (0x9E37ULL * static_cast<std::uint64_t>(L)));
    parallel_for(R, threads, [&](std::size_t r) {
        const RVec ev = eigensolve_sym(build_finite_discrete_band(m, L, SeedSpec{master, r, 0})).values;
        double dist = 1e300;
        for (Eigen::Index k = 0; k < ev.size(); ++k) dist = std::min(dist, std::abs(ev[k] - E));
        hit[r] = dist <= threshold ? 1 : 0;
    });
    WegnerRow row;
    row.L = L;
    row.threshold = threshold;
    row.realizations = R;
    for (char h : hit) row.hits += h;
    row.probability = static_cast<double>(row.hits) / R;
    std::tie(row.ci_lo, row.ci_hi) = wilson_interval(row.hits, R);
    return row;
}

std::vector<WegnerRow> wegner_probe(const ModelSpec& spec, double E, std::span<const int> L_list, double kappa,
                                    double beta, int R, std::uint64_t seed, double xi, unsigned threads) {
    if (!(kappa > 0.0)) fail(ErrorKind::PreconditionViolated, "kappa > 0");
    if (!(beta > 0.0 && beta < 1.0)) fail(ErrorKind::PreconditionViolated, "beta in (0,1)");
    if (R < 200) fail(ErrorKind::PreconditionViolated, "R >= 200");
    std::vector<WegnerRow> rows;
    for (int L : L_list) {
        const double scale = std::pow(static_cast<double>(L), beta);
        WegnerRow row = wegner_probability(spec, E, L, std::exp(-kappa * scale), R, seed, threads);
        row.kappa = kappa;
        row.beta = beta;
        row.reference = std::exp(-xi * scale);
        rows.push_back(row);
    }
    return rows;
}

bool wegner_non_increasing(const std::vector<WegnerRow>& rows) {
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (rows[k].ci_lo > rows[k - 1].ci_hi) return false;
    return true;
}

TransportReport transport_probe(const ModelSpec& spec, int L, std::span<const double> t_grid, int R,
                                std::uint64_t seed, unsigned threads) {
    const auto& m = require_discrete(spec, "transport_probe");
    if (L < 12 || R < 1) fail(ErrorKind::PreconditionViolated, "L >= 12 and R >= 1");
    if (t_grid.empty()) fail(ErrorKind::PreconditionViolated, "empty time grid");
    const int D = m.D;
    const int cells = 2 * L + 1;
    constexpr int guard = 10;
    const std::size_t nt = t_grid.size();
    std::vector<std::vector<double>> m2(R, std::vector<double>(nt));
    std::vector<double> guard_mass(R, 0.0);
    parallel_for(R, threads, [&](std::size_t r) {
        const EigenResult er = eigensolve_sym(build_finite_discrete_band(m, L, SeedSpec{seed, r, 0}), true);
        const Eigen::Index n = er.values.size();
        const RVec c0 = er.vectors.row(L * D).transpose();  // V^T delta_0
        for (std::size_t it = 0; it < nt; ++it) {
            const double t = t_grid[it];
            CVec a(n);
            for (Eigen::Index k = 0; k < n; ++k) a[k] = c0[k] * std::polar(1.0, -er.values[k] * t);
            const CVec psi = er.vectors.cast<cplx>() * a;
            double mom = 0.0, edge = 0.0;
            for (int c = 0; c < cells; ++c) {
                double mass = 0.0;
                for (int i = 0; i < D; ++i) mass += std::norm(psi[c * D + i]);
                const double x = c - L;
                mom += x * x * mass;
                if (c < guard || c >= cells - guard) edge += mass;
            }
            m2[r][it] = t == 0.0 ? 0.0 : mom;
            guard_mass[r] = std::max(guard_mass[r], edge);
        }
    });
    TransportReport out;
    out.t.assign(t_grid.begin(), t_grid.end());
    for (double g : guard_mass) out.guard_mass = std::max(out.guard_mass, g);
    if (out.guard_mass > 1e-8)
        fail(ErrorKind::BoundaryContamination, "guard-zone mass " + std::to_string(out.guard_mass) + " exceeds 1e-8");
    for (std::size_t it = 0; it < nt; ++it) {
        std::vector<double> col(R);
        for (int r = 0; r < R; ++r) col[r] = m2[r][it];
        const auto [mean, se] = mean_se(col);
        out.m2.push_back(mean);
        out.m2_sigma.push_back(se);
        out.sup_m2 = std::max(out.sup_m2, mean);
    }
    // log-log slope over the upper half of the positive times
    std::vector<std::size_t> pos;
    for (std::size_t it = 0; it < nt; ++it)
        if (t_grid[it] > 0.0 && out.m2[it] > 0.0) pos.push_back(it);
    if (pos.size() >= 2) {
        const std::size_t start = pos.size() / 2;
        std::vector<double> xs, ys;
        for (std::size_t k = start; k < pos.size(); ++k) {
            xs.push_back(std::log(t_grid[pos[k]]));
            ys.push_back(std::log(out.m2[pos[k]]));
        }
        if (xs.size() < 2) {
            xs.insert(xs.begin(), std::log(t_grid[pos[start - 1]]));
            ys.insert(ys.begin(), std::log(out.m2[pos[start - 1]]));
        }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
        mx /= xs.size();
        my /= xs.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        out.kappa_hat = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    return out;
}

}  // namespace q1d
