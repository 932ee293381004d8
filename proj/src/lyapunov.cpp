#include "q1d/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "q1d/errors.hpp"
#include "q1d/parallel.hpp"

namespace q1d {

namespace {

struct MeanSd {
    double mean = 0.0;
    double se = 0.0;
};

MeanSd mean_se(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    MeanSd out;
    out.mean = pairwise_sum(v) / n;
    if (v.size() < 2) return out;
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - out.mean) * (v[i] - out.mean);
    out.se = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
    return out;
}

void check_options(const LyapOptions& o) {
    if (o.steps < 1000) fail(ErrorKind::PreconditionViolated, "n >= 1000");
    if (o.realizations < 1) fail(ErrorKind::PreconditionViolated, "R >= 1");
    if (o.reorth < 1 || o.reorth > 50) fail(ErrorKind::PreconditionViolated, "1 <= k <= 50");
    if (o.burn_in < 0) fail(ErrorKind::PreconditionViolated, "burn-in >= 0");
}

template <typename M>
RVec run_realization(CocycleStream& stream, const LyapOptions& o) {
    const int n = stream.size();
    M q = M::Identity(n, n);
    RVec sink = RVec::Zero(n);
    for (std::int64_t s = 1; s <= o.burn_in; ++s) {
        stream.apply(q);
        if (s % o.reorth == 0 || s == o.burn_in) qr_pos_accumulate(q, sink);
    }
    RVec logs = RVec::Zero(n);
    for (std::int64_t s = 1; s <= o.steps; ++s) {
        stream.apply(q);
        if (s % o.reorth == 0 || s == o.steps) qr_pos_accumulate(q, logs);
    }
    return logs / static_cast<double>(o.steps);
}

}  // namespace

LyapunovSpectrum lyap_spectrum(const ModelSpec& spec, const SpectralPoint& point, std::uint64_t master_seed,
                               const LyapOptions& opts) {
    check_options(opts);
    const int R = opts.realizations;
    std::vector<RVec> per(R);
    parallel_for(R, opts.threads, [&](std::size_t r) {
        CocycleStream stream(spec, point, SeedSpec{master_seed, r, 0});
        RVec g = stream.is_real() ? run_realization<RMat>(stream, opts) : run_realization<Mat>(stream, opts);
        std::sort(g.data(), g.data() + g.size(), std::greater<>());
        per[r] = g;
    });
    const int n = static_cast<int>(per[0].size());
    LyapunovSpectrum out;
    out.steps = opts.steps;
    out.realizations = R;
    out.reorth = opts.reorth;
    for (int i = 0; i < n; ++i) {
        std::vector<double> col(R);
        for (int r = 0; r < R; ++r) {
            col[r] = per[r][i];
            if (!std::isfinite(col[r]) || col[r] < -1e6) out.diverged = true;
        }
        const MeanSd ms = mean_se(col);
        out.exponents.push_back(ms.mean);
        out.std_errors.push_back(ms.se);
    }
    for (int i = 0; i < n; ++i)
        out.pairing_defect = std::max(out.pairing_defect, std::abs(out.exponents[i] + out.exponents[n - 1 - i]));
    return out;
}

PartialSum wedge_oracle(const ModelSpec& spec, const SpectralPoint& point, std::uint64_t master_seed, int p,
                        const LyapOptions& opts) {
    check_options(opts);
    const int n = 2 * model_dimension(spec);
    if (p < 1 || p > n) fail(ErrorKind::BadOrder, "p outside [1, 2D]");
    const long dim = binomial(n, p);
    if (dim > 70) fail(ErrorKind::SizeTooLarge, "exterior dimension " + std::to_string(dim) + " exceeds 70");
    std::vector<double> per(opts.realizations);
    parallel_for(opts.realizations, opts.threads, [&](std::size_t r) {
        CocycleStream stream(spec, point, SeedSpec{master_seed, r, 0});
        for (std::int64_t s = 0; s < opts.burn_in; ++s) stream.next();
        Mat w = Mat::Identity(dim, dim);
        double acc = 0.0;
        for (std::int64_t s = 1; s <= opts.steps; ++s) {
            w = wedge_power(stream.next().matrix, p) * w;
            if (s % opts.reorth == 0) {
                const double nrm = w.norm();
                if (!(nrm > 0.0) || !std::isfinite(nrm)) fail(ErrorKind::RankDeficient, "exterior product lost rank");
                acc += std::log(nrm);
                w /= nrm;
            }
        }
        per[r] = (acc + std::log(op_norm(w))) / static_cast<double>(opts.steps);
    });
    const MeanSd ms = mean_se(per);
    return {p, ms.mean, ms.se};
}

OseledetsResult oseledets_probe(const ModelSpec& spec, const SpectralPoint& point, std::uint64_t master_seed,
                                const LyapOptions& opts) {
    if (model_dimension(spec) != 1) fail(ErrorKind::PreconditionViolated, "oseledets_probe needs D = 1");
    const LyapunovSpectrum ls = lyap_spectrum(spec, point, master_seed, opts);
    OseledetsResult out;
    out.gamma = ls.exponents[0];
    out.gamma_sigma = ls.std_errors[0];
    const double floor = 5.0 * std::max(out.gamma_sigma, 1.0 / static_cast<double>(opts.steps));
    if (!(out.gamma > floor)) fail(ErrorKind::NotHyperbolic, "gamma is not above 5 standard errors");

    CocycleStream stream(spec, point, SeedSpec{master_seed, 0, 0});
    for (std::int64_t s = 0; s < opts.burn_in; ++s) stream.next();
    std::vector<Mat> mats;
    mats.reserve(static_cast<std::size_t>(opts.steps));
    for (std::int64_t s = 0; s < opts.steps; ++s) mats.push_back(stream.next().matrix);

    Stream rng(SeedSpec{master_seed, 0x5EEDULL, -1});
    auto random_unit = [&rng] {
        CVec v(2);
        v << cplx(rng.gaussian(), 0.0), cplx(rng.gaussian(), 0.0);
        return CVec(v / v.norm());
    };

    CVec v = random_unit();
    double grow = 0.0;
    for (const auto& m : mats) {
        v = m * v;
        const double nv = v.norm();
        grow += std::log(nv);
        v /= nv;
    }
    out.generic_rate = grow / static_cast<double>(opts.steps);

    CVec u = random_unit();
    double back = 0.0;
    for (auto it = mats.rbegin(); it != mats.rend(); ++it) {
        u = it->partialPivLu().solve(u);
        const double nu = u.norm();
        back += std::log(nu);
        u /= nu;
    }
    out.contracting_rate = -back / static_cast<double>(opts.steps);
    // fix the phase so the largest component is real positive
    Eigen::Index k = 0;
    u.cwiseAbs().maxCoeff(&k);
    u *= std::conj(u[k]) / std::abs(u[k]);
    out.contracting_direction = u;
    return out;
}

namespace {

SpectralPoint grid_point(const ModelSpec& spec, double x) {
    return is_unitary_family(spec) ? SpectralPoint::at_angle(x) : SpectralPoint::at_energy(x);
}

}  // namespace

HolderReport holder_diag(const ModelSpec& spec, std::span<const double> grid, std::uint64_t master_seed,
                         const LyapOptions& opts, int draws) {
    if (grid.size() < 8) fail(ErrorKind::PreconditionViolated, "grid needs at least 8 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) fail(ErrorKind::PreconditionViolated, "grid must be strictly increasing");
    HolderReport out;
    out.grid.assign(grid.begin(), grid.end());
    for (double x : grid) {
        const auto ls = lyap_spectrum(spec, grid_point(spec, x), master_seed, opts);
        out.gammas.push_back(ls.exponents[0]);
        out.sigmas.push_back(ls.std_errors[0]);
    }
    const std::size_t m = grid.size();

    // log-log fit over all pairs whose difference is resolved above noise; each
    // point also carries the O(1/n) bias of a finite product, which sigma misses
    // when realizations coincide
    const double floor = 1.0 / static_cast<double>(opts.steps);
    std::vector<double> xs, ys;
    out.differences_zero = true;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double dg = std::abs(out.gammas[j] - out.gammas[i]);
            const double sc = std::hypot(std::max(out.sigmas[i], floor), std::max(out.sigmas[j], floor));
            if (dg > 3.0 * sc) out.differences_zero = false;
            if (dg > 2.0 * sc && dg > 0.0) {
                xs.push_back(std::log(grid[j] - grid[i]));
                ys.push_back(std::log(dg));
            }
        }
    out.pairs_used = static_cast<int>(xs.size());
    if (xs.size() >= 3) {
        const double k = static_cast<double>(xs.size());
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
        mx /= k;
        my /= k;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        if (sxx > 0.0) {
            const double slope = sxy / sxx;
            double rss = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double e = ys[i] - (my + slope * (xs[i] - mx));
                rss += e * e;
            }
            const double se = xs.size() > 2 ? std::sqrt(rss / (k - 2.0) / sxx) : 0.0;
            out.alpha_raw = slope;
            out.alpha = std::clamp(slope, 1e-6, 1.0);
            out.alpha_lo = slope - 1.96 * se;
            out.alpha_hi = slope + 1.96 * se;
        }
    }
    const double a = out.alpha.value_or(1.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        HolderRow row{grid[i], grid[i + 1], out.gammas[i], out.gammas[i + 1], 0.0};
        row.ratio = std::abs(row.gamma2 - row.gamma) / std::pow(row.E2 - row.E, a);
        out.rows.push_back(row);
    }

    // single-step bounds over the first `draws` sites of realization 0
    const int n = 2 * model_dimension(spec);
    std::vector<std::vector<Mat>> mats(m);
    for (std::size_t i = 0; i < m; ++i) {
        CocycleStream stream(spec, grid_point(spec, grid[i]), SeedSpec{master_seed, 0, 0});
        for (int d = 0; d < draws; ++d) mats[i].push_back(stream.next().matrix);
    }
    for (int p = 1; p <= n; ++p) {
        if (binomial(n, p) > 70) continue;
        WedgeBound wb{p, -1e300, -1e300};
        for (std::size_t i = 0; i < m; ++i)
            for (const auto& t : mats[i]) {
                const double nrm = op_norm(wedge_power(t, p));
                const double l2 = 2.0 * std::log(nrm);
                wb.max_log_norm_sq = std::max(wb.max_log_norm_sq, l2);
                wb.c1_hat = std::max(wb.c1_hat, (l2 - p * std::abs(grid[i]) - p) / p);
            }
        out.wedge_bounds.push_back(wb);
    }
    for (std::size_t i = 0; i + 1 < m; ++i)
        for (int d = 0; d < draws; ++d)
            out.lipschitz_ratio = std::max(out.lipschitz_ratio,
                                           op_norm(mats[i + 1][d] - mats[i][d]) / (grid[i + 1] - grid[i]));
    return out;
}

}  // namespace q1d
