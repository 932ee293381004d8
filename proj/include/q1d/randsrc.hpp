#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "q1d/matkit.hpp"

namespace q1d {

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t realization = 0;
    std::int64_t site = 0;
};

/// Counter-based generator: the state is a hash of (master, realization, site),
/// so any stream can be rebuilt independently on any worker.
class Stream {
public:
    explicit Stream(const SeedSpec& seed);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller (no libm-dependent distributions).
    double gaussian();

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// P(b) = p, P(a) = 1 - p.
struct TwoPoint {
    double a = 0.0;
    double b = 1.0;
    double p = 0.5;
    bool operator==(const TwoPoint&) const = default;
};
struct UniformInterval {
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const UniformInterval&) const = default;
};
struct FiniteSupport {
    std::vector<double> values;
    std::vector<double> weights;
    bool operator==(const FiniteSupport&) const = default;
};

using DisorderLaw = std::variant<TwoPoint, UniformInterval, FiniteSupport>;

DisorderLaw bernoulli01(double p = 0.5);

/// Throws BadLaw unless the support is bounded with at least two distinct points.
void validate_law(const DisorderLaw& law);
double sample(const DisorderLaw& law, Stream& rng);
/// Distinct support points for discrete laws, empty for continuous ones.
std::vector<double> atoms(const DisorderLaw& law);
/// Closed hull [min, max] of the support.
std::pair<double, double> support_hull(const DisorderLaw& law);
bool is_discrete(const DisorderLaw& law);

/// Coordinate i drawn from laws[i] (or laws[0] repeated when a single law is given).
RVec draw_site_vector(const SeedSpec& seed, std::span<const DisorderLaw> laws, std::int64_t n, int D);
RVec draw_site_vector(const SeedSpec& seed, std::span<const DisorderLaw> laws, std::int64_t n);

Mat haar_unitary(Stream& rng, int D);
Mat haar_unitary(const SeedSpec& seed, int D);

}  // namespace q1d
