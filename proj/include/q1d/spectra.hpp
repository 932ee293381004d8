#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "q1d/lyapunov.hpp"
#include "q1d/models.hpp"

namespace q1d {

struct EigenResult {
    RVec values;   // ascending
    RMat vectors;  // columns, empty unless requested
};

EigenResult eigensolve_sym(const Mat& m, bool vectors = false);
EigenResult eigensolve_sym(const SymBand& m, bool vectors = false);
/// Eigen-angles in (-pi, pi], ascending.
RVec unitary_eigen_angles(const Mat& u);

struct IdsCurve {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> std_errors;
    int L = 0;
    int realizations = 0;
    bool angles = false;
    std::vector<std::vector<double>> per_realization;
};

IdsCurve ids_estimate(const ModelSpec& spec, std::span<const double> grid, int L, int R, std::uint64_t seed,
                      unsigned threads = 0);

struct CoverageReport {
    double min_observed = 0.0;
    double max_observed = 0.0;
    std::vector<std::pair<double, double>> target;  // intervals (energies) or arcs [lo, hi] (angles)
    bool angles = false;
    long violations = 0;
    long eigenvalues = 0;
    double coverage_fraction = 0.0;
};

/// Printed almost-sure spectrum of the supported families.
std::vector<std::pair<double, double>> spectrum_target(const ModelSpec& spec);
CoverageReport spectrum_coverage(const ModelSpec& spec, int L, int R, std::uint64_t seed, unsigned threads = 0);

struct ThoulessRow {
    double E = 0.0;
    double gamma = 0.0;
    double gamma_sigma = 0.0;
    double conv = 0.0;
    double conv_sigma = 0.0;
    double residual = 0.0;
};

struct ThoulessReport {
    double alpha = 0.0;
    double alpha_ci = 0.0;  // 1.96 standard errors
    double rms = 0.0;
    double sensitivity = 0.0;  // max change in conv when the exclusion window grows to 1e-4
    std::vector<ThoulessRow> rows;
};

/// log|(E' - E)/(E' - i)| integrated against the empirical per-site eigenvalue measure.
double log_potential(std::span<const double> eigenvalues, double sites, double E, double window = 1e-6);

ThoulessReport thouless_residual(const ModelSpec& spec, std::span<const double> grid, int L, int R,
                                 std::uint64_t seed, const LyapOptions& lyap);

struct ModeRate {
    double energy = 0.0;
    double rate = 0.0;
    int points = 0;
};

struct EigenmodeReport {
    std::vector<ModeRate> modes;
    double median_rate = 0.0;
    double gamma_D = 0.0;  // averaged over the retained eigenvalues
    double gamma_sigma = 0.0;
    bool localized = false;
    int modes_examined = 0;
};

EigenmodeReport eigenmode_decay(const ModelSpec& spec, int L, std::pair<double, double> window, int R,
                                std::uint64_t seed, const LyapOptions& lyap);

struct WegnerRow {
    int L = 0;
    double kappa = 0.0, beta = 0.0;
    double threshold = 0.0;
    long hits = 0;
    int realizations = 0;
    double probability = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double reference = 0.0;  // exp(-xi (ell L)^beta)
};

std::pair<double, double> wilson_interval(long hits, long n, double z = 1.96);
/// Fraction of realizations with dist(E, spec H_L) <= threshold.
WegnerRow wegner_probability(const ModelSpec& spec, double E, int L, double threshold, int R, std::uint64_t seed,
                             unsigned threads = 0);
std::vector<WegnerRow> wegner_probe(const ModelSpec& spec, double E, std::span<const int> L_list, double kappa,
                                    double beta, int R, std::uint64_t seed, double xi, unsigned threads = 0);
/// Consecutive L: lower CI bound of the larger box must not exceed the upper bound of the smaller one.
bool wegner_non_increasing(const std::vector<WegnerRow>& rows);

struct TransportReport {
    std::vector<double> t;
    std::vector<double> m2;
    std::vector<double> m2_sigma;
    double sup_m2 = 0.0;
    double kappa_hat = 0.0;
    double guard_mass = 0.0;
};

TransportReport transport_probe(const ModelSpec& spec, int L, std::span<const double> t_grid, int R,
                                std::uint64_t seed, unsigned threads = 0);

}  // namespace q1d
