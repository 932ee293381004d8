#include "q1d/randsrc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "q1d/errors.hpp"

namespace q1d {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Stream::Stream(const SeedSpec& seed) {
    std::uint64_t h = splitmix64(seed.master_seed);
    h = splitmix64(h ^ (seed.realization * 0xD1B54A32D192ED03ULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(seed.site) * 0xAEF17502108EF2D9ULL));
    state_ = h;
}

std::uint64_t Stream::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Stream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Stream::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
}

DisorderLaw bernoulli01(double p) { return TwoPoint{0.0, 1.0, p}; }

void validate_law(const DisorderLaw& law) {
    std::visit(
        [](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, TwoPoint>) {
                if (!std::isfinite(l.a) || !std::isfinite(l.b)) fail(ErrorKind::BadLaw, "two-point law has unbounded support");
                if (!(l.p >= 0.0 && l.p <= 1.0)) fail(ErrorKind::BadLaw, "two-point probability outside [0,1]");
                if (l.a == l.b) fail(ErrorKind::BadLaw, "two-point law needs two distinct points");
            } else if constexpr (std::is_same_v<T, UniformInterval>) {
                if (!std::isfinite(l.lo) || !std::isfinite(l.hi)) fail(ErrorKind::BadLaw, "uniform law has unbounded support");
                if (!(l.lo < l.hi)) fail(ErrorKind::BadLaw, "uniform law needs lo < hi");
            } else {
                if (l.values.empty() || l.values.size() != l.weights.size())
                    fail(ErrorKind::BadLaw, "finite law needs matching nonempty values and weights");
                std::set<double> pts;
                double total = 0.0;
                for (std::size_t k = 0; k < l.values.size(); ++k) {
                    if (!std::isfinite(l.values[k])) fail(ErrorKind::BadLaw, "finite law has unbounded support");
                    if (!(l.weights[k] >= 0.0) || !std::isfinite(l.weights[k])) fail(ErrorKind::BadLaw, "negative weight");
                    if (l.weights[k] > 0.0) pts.insert(l.values[k]);
                    total += l.weights[k];
                }
                if (!(total > 0.0)) fail(ErrorKind::BadLaw, "finite law has empty support");
                if (pts.size() < 2) fail(ErrorKind::BadLaw, "finite law needs at least two support points");
            }
        },
        law);
}

double sample(const DisorderLaw& law, Stream& rng) {
    return std::visit(
        [&rng](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            const double u = rng.uniform();
            if constexpr (std::is_same_v<T, TwoPoint>) {
                return u < l.p ? l.b : l.a;
            } else if constexpr (std::is_same_v<T, UniformInterval>) {
                return l.lo + (l.hi - l.lo) * u;
            } else {
                double total = 0.0;
                for (double w : l.weights) total += w;
                double acc = 0.0;
                for (std::size_t k = 0; k < l.values.size(); ++k) {
                    acc += l.weights[k] / total;
                    if (u < acc) return l.values[k];
                }
                for (std::size_t k = l.values.size(); k-- > 0;)
                    if (l.weights[k] > 0.0) return l.values[k];
                return l.values.back();
            }
        },
        law);
}

std::vector<double> atoms(const DisorderLaw& law) {
    std::set<double> pts;
    if (const auto* tp = std::get_if<TwoPoint>(&law)) {
        if (tp->p < 1.0) pts.insert(tp->a);
        if (tp->p > 0.0) pts.insert(tp->b);
    } else if (const auto* fs = std::get_if<FiniteSupport>(&law)) {
        for (std::size_t k = 0; k < fs->values.size(); ++k)
            if (fs->weights[k] > 0.0) pts.insert(fs->values[k]);
    }
    return {pts.begin(), pts.end()};
}

std::pair<double, double> support_hull(const DisorderLaw& law) {
    if (const auto* u = std::get_if<UniformInterval>(&law)) return {u->lo, u->hi};
    const auto pts = atoms(law);
    if (pts.empty()) fail(ErrorKind::BadLaw, "empty support");
    return {pts.front(), pts.back()};
}

bool is_discrete(const DisorderLaw& law) { return !std::holds_alternative<UniformInterval>(law); }

RVec draw_site_vector(const SeedSpec& seed, std::span<const DisorderLaw> laws, std::int64_t n, int D) {
    if (laws.empty()) fail(ErrorKind::BadLaw, "no disorder law given");
    if (laws.size() != 1 && static_cast<int>(laws.size()) != D)
        fail(ErrorKind::DimensionMismatch, "number of laws must be 1 or D");
    Stream rng(SeedSpec{seed.master_seed, seed.realization, n});
    RVec out(D);
    for (int i = 0; i < D; ++i) out[i] = sample(laws[laws.size() == 1 ? 0 : i], rng);
    return out;
}

RVec draw_site_vector(const SeedSpec& seed, std::span<const DisorderLaw> laws, std::int64_t n) {
    for (const auto& l : laws) validate_law(l);
    return draw_site_vector(seed, laws, n, static_cast<int>(laws.size()));
}

Mat haar_unitary(Stream& rng, int D) {
    Mat g(D, D);
    for (int j = 0; j < D; ++j)
        for (int i = 0; i < D; ++i) {
            const double re = rng.gaussian();
            const double im = rng.gaussian();
            g(i, j) = cplx(re, im);
        }
    // qr_pos already fixes diag(R) > 0, which is the Haar phase normalisation
    return qr_pos(g).q;
}

Mat haar_unitary(const SeedSpec& seed, int D) {
    Stream rng(seed);
    return haar_unitary(rng, D);
}

}  // namespace q1d
