#pragma once

// Generators and independent oracles shared by the unit and acceptance tests.
// Oracles avoid the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dcomp/dcomp.hpp"

namespace dcomp::testing {

// Shannon entropy (bits/symbol) from a std::map histogram.
inline double entropy_oracle(const std::vector<std::uint8_t>& data) {
    std::map<std::uint8_t, std::size_t> counts;
    for (auto b : data) ++counts[b];
    double h = 0.0;
    const double n = static_cast<double>(data.size());
    for (const auto& [sym, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h += -p * std::log(p) / std::log(2.0);
    }
    return h;
}

// Bytes drawn i.i.d. from the given (unnormalized) weights via inverse CDF.
inline Bytes sample_bytes(Rng& rng, const std::vector<double>& weights, std::size_t n) {
    std::vector<double> cdf(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cdf.begin());
    Bytes out(n);
    for (auto& b : out) {
        const double u = rng.uniform() * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        b = static_cast<std::uint8_t>(std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), weights.size() - 1));
    }
    return out;
}

// A mix of byte-stream shapes: random, skewed, constant, two-symbol, runs, ramps.
inline Bytes random_stream(Rng& rng, std::size_t n) {
    Bytes out(n);
    switch (rng.below(7)) {
        case 0:
            for (auto& b : out) b = static_cast<std::uint8_t>(rng.below(256));
            break;
        case 1: {
            const double scale = 0.5 + rng.uniform() * 20.0;
            for (auto& b : out) {
                const double v = std::clamp(std::round(rng.laplace(scale)), -127.0, 127.0);
                b = static_cast<std::uint8_t>(static_cast<std::int8_t>(v));
            }
            break;
        }
        case 2:
            std::fill(out.begin(), out.end(), static_cast<std::uint8_t>(rng.below(256)));
            break;
        case 3: {
            const auto a = static_cast<std::uint8_t>(rng.below(256));
            const auto c = static_cast<std::uint8_t>(rng.below(256));
            const double p = rng.uniform();
            for (auto& b : out) b = rng.uniform() < p ? a : c;
            break;
        }
        case 4: {
            // one dominant symbol with rare escapes: drives frequencies to the 1 / 4095 extremes
            const auto a = static_cast<std::uint8_t>(rng.below(256));
            for (auto& b : out) b = rng.uniform() < 1e-4 ? static_cast<std::uint8_t>(rng.below(256)) : a;
            break;
        }
        case 5: {
            std::size_t i = 0;
            while (i < n) {
                const auto sym = static_cast<std::uint8_t>(rng.below(256));
                const std::size_t run = 1 + rng.below(64);
                for (std::size_t j = 0; j < run && i < n; ++j) out[i++] = sym;
            }
            break;
        }
        default:
            for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(i * 7 + (i >> 8));
            break;
    }
    return out;
}

// Length skewed toward short streams but covering [1, max_len].
inline std::size_t random_length(Rng& rng, std::size_t max_len) {
    const double bits = rng.uniform() * std::log2(static_cast<double>(max_len));
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::exp2(bits)), 1, max_len);
}

inline QuantizedTensor random_quantized(Rng& rng, std::size_t rows, std::size_t cols, std::string name = "t") {
    QuantizedTensor q;
    q.name = std::move(name);
    q.rows = rows;
    q.cols = cols;
    q.qvalues.resize(rows * cols);
    const double b = 1.0 + rng.uniform() * 30.0;
    for (auto& v : q.qvalues) v = static_cast<std::int8_t>(std::clamp(std::round(rng.laplace(b)), -127.0, 127.0));
    q.w_scale = 0.001 + rng.uniform();
    q.scale_vec.alpha = rng.uniform();
    for (std::size_t c = 0; c < cols; ++c) {
        q.scale_vec.s.push_back(static_cast<double>(static_cast<float>(0.01 + rng.uniform() * 10.0)));
    }
    return q;
}

inline ActivationStats random_stats(Rng& rng, std::size_t cols, std::string name = "t") {
    ActivationStats s{std::move(name), {}};
    for (std::size_t c = 0; c < cols; ++c) s.channel_max.push_back(rng.uniform() < 0.1 ? 0.0 : rng.lognormal(0.0, 1.0));
    return s;
}

// Brute-force pruning: sort every (score, index) pair and zero the first k of each group.
inline std::vector<std::int8_t> prune_oracle(const QuantizedTensor& q, const ActivationStats& stats, double sparsity,
                                             PruneScope scope) {
    std::vector<std::int8_t> out = q.qvalues;
    auto run = [&](std::size_t first, std::size_t n) {
        std::vector<std::pair<double, std::size_t>> keyed;
        for (std::size_t i = first; i < first + n; ++i) {
            const double score = stats.channel_max[i % q.cols] * std::fabs(static_cast<double>(q.qvalues[i]));
            keyed.emplace_back(score, i);
        }
        std::sort(keyed.begin(), keyed.end());
        const auto k = static_cast<std::size_t>(std::floor(sparsity * static_cast<double>(n)));
        for (std::size_t j = 0; j < k; ++j) out[keyed[j].second] = 0;
    };
    if (scope == PruneScope::per_tensor) {
        run(0, q.qvalues.size());
    } else {
        for (std::size_t r = 0; r < q.rows; ++r) run(r * q.cols, q.cols);
    }
    return out;
}

inline HardwareProfile random_profile(Rng& rng) {
    HardwareProfile h;
    h.b_stoc = rng.uniform(0.5, 50.0);
    h.b_ctog = rng.uniform(1.0, 100.0);
    h.b_gpu = rng.uniform(50.0, 3000.0);
    h.d_max = rng.uniform(1.0, 500.0);
    h.c_sat = rng.uniform(1e6, 5e8);
    h.i_gpu = rng.uniform(5.0, 500.0);
    h.mem_gpu = rng.uniform(1e9, 1e11);
    h.mem_cpu = rng.uniform(1e9, 1e12);
    return h;
}

inline double rel_diff(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b)); }

}  // namespace dcomp::testing
