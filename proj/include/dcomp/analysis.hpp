#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dcomp/error.hpp"
#include "dcomp/types.hpp"

namespace dcomp {

// |v| < this counts as near-zero for floating-point data.
inline constexpr double kFloatNearZero = 1e-2;
// |q| <= this counts as near-zero for INT8 data, i.e. q in {-1, 0, 1}.
inline constexpr int kInt8NearZero = 1;

struct DistributionReport {
    std::size_t count = 0;
    double near_zero_fraction = 0.0;
    double byte_entropy = 0.0;  // bits per symbol, in [0, 8]
    std::size_t outlier_count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

// Shannon entropy in bits of an empirical histogram.
template <typename Count>
double shannon_entropy(std::span<const Count> counts) {
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return std::max(0.0, h);
}

inline std::array<std::uint64_t, 256> byte_histogram(std::span<const std::uint8_t> data) {
    std::array<std::uint64_t, 256> counts{};
    for (auto b : data) ++counts[b];
    return counts;
}

inline double byte_entropy(std::span<const std::uint8_t> data) {
    const auto counts = byte_histogram(data);
    return shannon_entropy(std::span<const std::uint64_t>(counts));
}

inline double compression_ratio(std::uint64_t original_bytes, std::uint64_t compressed_bytes) {
    require(compressed_bytes > 0, Errc::invalid_argument, "compression ratio: compressed size is zero");
    return static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes);
}

namespace detail {

// Linear-interpolated quantile of sorted data (the usual "type 7" definition).
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

// Moments plus the 1.5 x IQR upper-whisker outlier count over |v|.
inline void fill_moments_and_outliers(std::span<const double> values, DistributionReport& rep) {
    rep.count = values.size();
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    rep.min = *mn;
    rep.max = *mx;

    double sum = 0.0;
    for (double v : values) sum += v;
    rep.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - rep.mean) * (v - rep.mean);
    rep.stddev = std::sqrt(sq / static_cast<double>(values.size()));

    std::vector<double> mags(values.size());
    std::transform(values.begin(), values.end(), mags.begin(), [](double v) { return std::fabs(v); });
    std::sort(mags.begin(), mags.end());
    const double q1 = sorted_quantile(mags, 0.25);
    const double q3 = sorted_quantile(mags, 0.75);
    const double upper = q3 + 1.5 * (q3 - q1);
    rep.outlier_count = static_cast<std::size_t>(mags.end() - std::upper_bound(mags.begin(), mags.end(), upper));
}

}  // namespace detail

// Distribution of floating-point data. byte_entropy here is the entropy of a
// 256-bin histogram spanning [min, max]; a constant tensor has entropy 0.
inline DistributionReport analyze_float(std::span<const double> values) {
    require(!values.empty(), Errc::empty_input, "empty input");
    DistributionReport rep;
    detail::fill_moments_and_outliers(values, rep);

    std::size_t near_zero = 0;
    for (double v : values) near_zero += std::fabs(v) < kFloatNearZero ? 1 : 0;
    rep.near_zero_fraction = static_cast<double>(near_zero) / static_cast<double>(values.size());

    const double range = rep.max - rep.min;
    if (range > 0.0) {
        std::array<std::uint64_t, 256> bins{};
        for (double v : values) {
            auto b = static_cast<std::int64_t>(std::floor((v - rep.min) / range * 256.0));
            ++bins[static_cast<std::size_t>(std::clamp<std::int64_t>(b, 0, 255))];
        }
        rep.byte_entropy = shannon_entropy(std::span<const std::uint64_t>(bins));
    }
    return rep;
}

inline DistributionReport analyze_float(const WeightTensor& t) {
    t.validate();
    return analyze_float(std::span<const double>(t.values));
}

// Distribution of INT8 data; byte_entropy is over the 256-symbol byte histogram.
inline DistributionReport analyze_quantized(std::span<const std::int8_t> q) {
    require(!q.empty(), Errc::empty_input, "empty input");
    DistributionReport rep;
    std::vector<double> as_double(q.begin(), q.end());
    detail::fill_moments_and_outliers(as_double, rep);

    std::array<std::uint64_t, 256> counts{};
    std::size_t near_zero = 0;
    for (auto v : q) {
        ++counts[static_cast<std::uint8_t>(v)];
        near_zero += std::abs(static_cast<int>(v)) <= kInt8NearZero ? 1 : 0;
    }
    rep.near_zero_fraction = static_cast<double>(near_zero) / static_cast<double>(q.size());
    rep.byte_entropy = shannon_entropy(std::span<const std::uint64_t>(counts));
    return rep;
}

inline DistributionReport analyze_quantized(const QuantizedTensor& q) {
    return analyze_quantized(std::span<const std::int8_t>(q.qvalues));
}

}  // namespace dcomp
