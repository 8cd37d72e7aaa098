#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dcomp {

// Seedable generator with platform-independent output. The engine sequence of
// std::mt19937_64 is fixed by the standard; the std distributions are not, so
// the transforms below are done by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound). Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % bound;
    }

    // Box-Muller; one output per call so the stream position is predictable.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

    double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

    // Continuous Laplace(0, b) via inverse CDF.
    double laplace(double b) {
        double u = uniform() - 0.5;
        while (u == -0.5) u = uniform() - 0.5;
        const double sign = u < 0 ? -1.0 : 1.0;
        return -b * sign * std::log1p(-2.0 * std::fabs(u));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace dcomp
