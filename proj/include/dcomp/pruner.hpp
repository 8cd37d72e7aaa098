#pragma once

// Activation-aware pruning of INT8 weights. Each weight is scored by
// ||X_c||_inf * |q| and the lowest-scoring floor(sparsity * n) entries are set
// to zero. Ties go to the lower row-major index, so the selection is a total
// order and the result is reproducible everywhere.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

#include "dcomp/error.hpp"
#include "dcomp/types.hpp"

namespace dcomp {

enum class PruneScope { per_tensor, per_row };

constexpr std::string_view to_string(PruneScope s) noexcept {
    return s == PruneScope::per_tensor ? "per_tensor" : "per_row";
}

struct PruneConfig {
    double sparsity = 0.0;
    PruneScope scope = PruneScope::per_tensor;

    void validate() const {
        require(sparsity >= 0.0 && sparsity <= 1.0, Errc::invalid_argument,
                "sparsity must be in [0, 1], got " + std::to_string(sparsity));
    }
};

// Row-major, same shape as the tensor.
using ScoreMatrix = std::vector<double>;

inline ScoreMatrix prune_scores(const QuantizedTensor& q, const ActivationStats& stats) {
    require(stats.channel_max.size() == q.cols, Errc::dimension_mismatch,
            "tensor '" + q.name + "': stats have " + std::to_string(stats.channel_max.size()) +
                " channels, expected " + std::to_string(q.cols));
    require(q.qvalues.size() == q.rows * q.cols, Errc::dimension_mismatch,
            "quantized tensor '" + q.name + "': qvalues.size() != rows * cols");
    ScoreMatrix scores(q.qvalues.size());
    for (std::size_t r = 0; r < q.rows; ++r) {
        for (std::size_t c = 0; c < q.cols; ++c) {
            const std::size_t i = r * q.cols + c;
            scores[i] = stats.channel_max[c] * std::abs(static_cast<int>(q.qvalues[i]));
        }
    }
    return scores;
}

// Number of entries pruned out of a group of n.
inline std::size_t prune_count(double sparsity, std::size_t n) {
    return static_cast<std::size_t>(std::floor(sparsity * static_cast<double>(n)));
}

namespace detail {

// Zeroes the k lowest (score, index) entries among [first, first + n).
inline void prune_range(std::vector<std::int8_t>& q, const ScoreMatrix& scores, std::size_t first, std::size_t n,
                        std::size_t k) {
    if (k == 0) return;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), first);
    auto lower = [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
    };
    if (k < n) std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), lower);
    for (std::size_t j = 0; j < k; ++j) q[idx[j]] = 0;
}

}  // namespace detail

inline QuantizedTensor prune(const QuantizedTensor& q, const ActivationStats& stats, const PruneConfig& cfg) {
    cfg.validate();
    const ScoreMatrix scores = prune_scores(q, stats);
    QuantizedTensor out = q;
    if (cfg.scope == PruneScope::per_tensor) {
        detail::prune_range(out.qvalues, scores, 0, q.qvalues.size(), prune_count(cfg.sparsity, q.qvalues.size()));
    } else {
        const std::size_t k = prune_count(cfg.sparsity, q.cols);
        for (std::size_t r = 0; r < q.rows; ++r) detail::prune_range(out.qvalues, scores, r * q.cols, q.cols, k);
    }
    return out;
}

}  // namespace dcomp
