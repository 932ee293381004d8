#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "q1d/models.hpp"

namespace q1d {

struct LyapOptions {
    std::int64_t steps = 1000000;
    int realizations = 16;
    int reorth = 10;
    std::int64_t burn_in = 1000;
    unsigned threads = 0;
};

struct LyapunovSpectrum {
    std::vector<double> exponents;  // non-increasing
    std::vector<double> std_errors;
    std::int64_t steps = 0;
    int realizations = 0;
    int reorth = 0;
    double pairing_defect = 0.0;
    bool diverged = false;
};

/// QR-reorthonormalised cocycle product; realization r uses SeedSpec{master_seed, r, .}.
LyapunovSpectrum lyap_spectrum(const ModelSpec& spec, const SpectralPoint& point, std::uint64_t master_seed,
                               const LyapOptions& opts = {});

struct PartialSum {
    int p = 0;
    double value = 0.0;
    double std_error = 0.0;
};

/// Growth rate of ||wedge^p Phi(n)|| over the same sites lyap_spectrum uses.
PartialSum wedge_oracle(const ModelSpec& spec, const SpectralPoint& point, std::uint64_t master_seed, int p,
                        const LyapOptions& opts = {});

struct OseledetsResult {
    double gamma = 0.0;
    double gamma_sigma = 0.0;
    CVec contracting_direction;
    double contracting_rate = 0.0;
    double generic_rate = 0.0;
};

/// D = 1 only. The contracting direction is Phi(n)^-1 w / ||Phi(n)^-1 w|| for a random w,
/// and its rate uses ||Phi(n) v|| = ||w|| / ||Phi(n)^-1 w||.
OseledetsResult oseledets_probe(const ModelSpec& spec, const SpectralPoint& point, std::uint64_t master_seed,
                                const LyapOptions& opts = {});

struct HolderRow {
    double E = 0.0, E2 = 0.0;
    double gamma = 0.0, gamma2 = 0.0;
    double ratio = 0.0;  // |dgamma| / |dE|^alpha
};

struct WedgeBound {
    int p = 0;
    double max_log_norm_sq = 0.0;  // max over draws of log ||wedge^p T(E)||^2
    double c1_hat = 0.0;           // smallest C1 with ||wedge^p T||^2 <= exp(p C1 + p|E| + p)
};

struct HolderReport {
    std::vector<double> grid;
    std::vector<double> gammas, sigmas;
    std::vector<HolderRow> rows;
    std::optional<double> alpha;  // clamped to (0, 1]
    std::optional<double> alpha_raw;
    double alpha_lo = 0.0, alpha_hi = 0.0;
    int pairs_used = 0;
    bool differences_zero = false;
    std::vector<WedgeBound> wedge_bounds;
    double lipschitz_ratio = 0.0;  // max ||T(E) - T(E')|| / |E - E'|
};

HolderReport holder_diag(const ModelSpec& spec, std::span<const double> grid, std::uint64_t master_seed,
                         const LyapOptions& opts = {}, int draws = 1000);

}  // namespace q1d
