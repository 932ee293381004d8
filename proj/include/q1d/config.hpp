#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "q1d/models.hpp"

namespace q1d {

enum class Task { LyapScan, Ids, Furstenberg, ZipperCheck, Thouless, Wegner, Eigenmode, Transport, Selftest };
enum class OutputFormat { Csv, Json };

std::string to_string(Task t);
Task parse_task(std::string_view name);  // throws ValidationError

/// 0 followed by 20 log-spaced times in [1, 100].
std::vector<double> default_t_grid();

struct RunConfig {
    Task task = Task::LyapScan;
    std::optional<ModelSpec> model;
    std::uint64_t seed = 0;
    OutputFormat format = OutputFormat::Csv;

    // [run]
    std::vector<double> grid;  // energies, or arg z for unitary families
    int L = 500;
    std::int64_t steps = 1000000;
    int realizations = 16;
    int reorth = 10;
    std::int64_t burn_in = 1000;

    // [furstenberg]
    double svd_tol = 1e-9;
    std::optional<double> d_O;

    // [zipper-check]
    int samples = 1000;

    // [wegner]
    double wegner_energy = 0.5;
    double kappa = 0.5;
    double beta = 0.5;
    double xi = 0.25;
    std::vector<int> L_list{50, 100, 200};
    int trials = 400;

    // [eigenmode]
    double window_lo = -1.0;
    double window_hi = 1.0;

    // [transport]
    std::vector<double> t_grid = default_t_grid();
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Sectioned key = value text; '#' starts a comment.
RunConfig parse_config(std::string_view text);
std::string serialize_config(const RunConfig& cfg);

/// Checks every field against the preconditions of the dispatched task.
void validate_config(const RunConfig& cfg);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
/// 17 significant digits, '.' decimal point, no locale.
std::string format_double17(double x);

}  // namespace q1d
