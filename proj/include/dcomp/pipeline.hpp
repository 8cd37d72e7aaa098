#pragma once

// Model-level pipeline: scale -> quantize -> prune -> pack, plus the analysis
// and alpha-sweep drivers the CLI exposes.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dcomp/analysis.hpp"
#include "dcomp/container.hpp"
#include "dcomp/error.hpp"
#include "dcomp/parallel.hpp"
#include "dcomp/plan.hpp"
#include "dcomp/pruner.hpp"
#include "dcomp/random.hpp"
#include "dcomp/scaling.hpp"
#include "dcomp/synth.hpp"
#include "dcomp/types.hpp"

namespace dcomp {

using StatsMap = std::map<std::string, ActivationStats>;

// Defaults mirror config/reference.json.
struct PipelineConfig {
    double alpha = 0.5;
    double sparsity = 0.2;
    PruneScope scope = PruneScope::per_tensor;
    std::uint64_t chunk_size = kDefaultChunkSize;
    std::size_t block_size = 1;
    Codec codec = Codec::ans;
    std::uint64_t seed = 42;
};

inline const ActivationStats& stats_for(const StatsMap& stats, const std::string& name, std::size_t cols) {
    const auto it = stats.find(name);
    require(it != stats.end(), Errc::missing_entry, "no activation stats for tensor '" + name + "'");
    it->second.validate(cols);
    return it->second;
}

inline StatsMap to_stats_map(const std::vector<SynthLayer>& layers) {
    StatsMap m;
    for (const auto& l : layers) m.emplace(l.stats.name, l.stats);
    return m;
}

inline std::vector<WeightTensor> weights_of(const std::vector<SynthLayer>& layers) {
    std::vector<WeightTensor> w;
    for (const auto& l : layers) w.push_back(l.weights);
    return w;
}

// Plain per-tensor INT8 with no channel scaling.
inline std::vector<QuantizedTensor> quantize_baseline(const std::vector<WeightTensor>& weights) {
    std::vector<QuantizedTensor> out(weights.size());
    parallel_for(weights.size(), [&](std::size_t i) { out[i] = quantize(weights[i]); });
    return out;
}

inline std::vector<QuantizedTensor> quantize_model(const std::vector<WeightTensor>& weights, const StatsMap& stats,
                                                   double alpha) {
    std::vector<const ActivationStats*> matched;
    for (const auto& w : weights) matched.push_back(&stats_for(stats, w.name, w.cols));
    std::vector<QuantizedTensor> out(weights.size());
    parallel_for(weights.size(), [&](std::size_t i) {
        out[i] = quantize(scale_weights(weights[i], compute_scale(*matched[i], alpha)));
    });
    return out;
}

inline std::vector<QuantizedTensor> prune_model(const std::vector<QuantizedTensor>& tensors, const StatsMap& stats,
                                                const PruneConfig& cfg) {
    cfg.validate();
    std::vector<const ActivationStats*> matched;
    for (const auto& q : tensors) matched.push_back(&stats_for(stats, q.name, q.cols));
    std::vector<QuantizedTensor> out(tensors.size());
    parallel_for(tensors.size(), [&](std::size_t i) { out[i] = prune(tensors[i], *matched[i], cfg); });
    return out;
}

inline std::uint64_t total_bytes(const std::vector<QuantizedTensor>& tensors) {
    std::uint64_t n = 0;
    for (const auto& t : tensors) n += t.qvalues.size();
    return n;
}

// store: every chunk raw; ans: block rule with the given block size.
inline CompressionPlan make_plan(std::uint64_t total, std::uint64_t chunk_size, Codec codec, std::size_t block_size) {
    const std::size_t n = chunk_count(total, chunk_size);
    if (codec == Codec::store) return CompressionPlan::all_store(n, chunk_size);
    return CompressionPlan::block_rule(n, chunk_size, block_size);
}

// Weight-data CR: raw INT8 bytes over the sum of chunk payloads, every chunk
// offered to ANS (with the per-chunk store fallback).
inline double model_cr(const std::vector<QuantizedTensor>& tensors, std::uint64_t chunk_size = kDefaultChunkSize) {
    const auto m = pack(tensors, make_plan(total_bytes(tensors), chunk_size, Codec::ans, 1));
    return compression_ratio(m.raw_bytes(), m.payload_bytes());
}

// INT8 weight bytes of at least `min_bytes`: default-width transformer blocks,
// scaled with `alpha` and quantized one layer at a time so the float weights
// never coexist.
inline Bytes synthetic_quantized_bytes(std::uint64_t min_bytes, double alpha, std::uint64_t seed = 42) {
    std::uint64_t per_block = 0;
    for (const auto& s : default_block_specs(768, 1)) per_block += static_cast<std::uint64_t>(s.rows) * s.cols;
    const std::size_t blocks = static_cast<std::size_t>(std::max<std::uint64_t>(1, (min_bytes + per_block - 1) / per_block));
    const auto specs = default_block_specs(768, blocks);
    Bytes out;
    out.reserve(per_block * blocks);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto layer = synth_ensemble(specs[i], seed + i);
        const auto q = quantize(scale_weights(layer.weights, compute_scale(layer.stats, alpha)));
        for (auto v : q.qvalues) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

// The plan a container was written with (ans chunks = compressed) and the
// per-chunk CR of each compressed chunk (1 for stored ones).
inline std::pair<CompressionPlan, std::vector<double>> plan_of(const CompressedModel& m) {
    CompressionPlan plan = CompressionPlan::all_store(m.chunks.size(), m.chunk_size);
    std::vector<double> cr(m.chunks.size(), 1.0);
    for (std::size_t i = 0; i < m.chunks.size(); ++i) {
        const auto& c = m.chunks[i];
        if (c.codec != Codec::ans) continue;
        plan.compressed_mask[i] = true;
        cr[i] = compression_ratio(c.uncompressed_len, c.payload.size());
    }
    // Report the block size when the mask is exactly a block rule.
    for (std::size_t n = 1; n <= m.chunks.size() && plan.compressed_count() > 0; ++n) {
        if (CompressionPlan::block_rule(m.chunks.size(), m.chunk_size, n).compressed_mask == plan.compressed_mask) {
            plan.block_size = n;
            break;
        }
    }
    return {plan, cr};
}

struct LayerAnalysis {
    std::string name;
    DistributionReport dist;
    std::uint64_t raw_bytes = 0;
    std::uint64_t compressed_bytes = 0;
    double cr = 1.0;
};

struct ModelAnalysis {
    std::vector<LayerAnalysis> layers;
    std::uint64_t raw_bytes = 0;
    std::uint64_t compressed_bytes = 0;
    double cr = 1.0;
    double near_zero_fraction = 0.0;  // over all values
    double byte_entropy = 0.0;        // of the whole INT8 stream
};

// Per-layer stats and CR (each layer chunked and coded on its own); totals are sums over layers.
inline ModelAnalysis analyze_model(const std::vector<QuantizedTensor>& tensors,
                                   std::uint64_t chunk_size = kDefaultChunkSize) {
    ModelAnalysis out;
    out.layers.resize(tensors.size());
    parallel_for(tensors.size(), [&](std::size_t i) {
        const auto& t = tensors[i];
        auto& l = out.layers[i];
        l.name = t.name;
        l.dist = analyze_quantized(t);
        const auto m = pack({t}, make_plan(t.qvalues.size(), chunk_size, Codec::ans, 1));
        l.raw_bytes = m.raw_bytes();
        l.compressed_bytes = m.payload_bytes();
        l.cr = compression_ratio(l.raw_bytes, l.compressed_bytes);
    });
    double near_zero = 0.0;
    std::array<std::uint64_t, 256> hist{};
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& l = out.layers[i];
        out.raw_bytes += l.raw_bytes;
        out.compressed_bytes += l.compressed_bytes;
        near_zero += l.dist.near_zero_fraction * static_cast<double>(l.dist.count);
        for (auto q : tensors[i].qvalues) ++hist[static_cast<std::uint8_t>(q)];
    }
    if (out.raw_bytes > 0) {
        out.cr = compression_ratio(out.raw_bytes, out.compressed_bytes);
        out.near_zero_fraction = near_zero / static_cast<double>(out.raw_bytes);
        out.byte_entropy = shannon_entropy(std::span<const std::uint64_t>(hist));
    }
    return out;
}

// Calibration-like activations whose per-channel max |x| equals the stats exactly.
inline ActivationSample synth_activations(const ActivationStats& stats, std::size_t tokens, std::uint64_t seed) {
    require(tokens > 0, Errc::invalid_argument, "tokens must be positive");
    Rng rng(seed);
    ActivationSample x{tokens, stats.channel_max.size(), std::vector<double>(tokens * stats.channel_max.size())};
    for (std::size_t t = 0; t < tokens; ++t) {
        for (std::size_t c = 0; c < x.channels; ++c) x.values[t * x.channels + c] = stats.channel_max[c] * rng.uniform(-1, 1);
    }
    for (std::size_t c = 0; c < x.channels; ++c) {
        x.values[(c % tokens) * x.channels + c] = (c % 2 == 0 ? 1.0 : -1.0) * stats.channel_max[c];
    }
    return x;
}

struct SweepRow {
    double alpha = 0.0;
    double cr = 1.0;
    double near_zero_fraction = 0.0;
    double layer_error = 0.0;  // mean W8A8 relative output error over layers
};

inline std::vector<double> default_alpha_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
    return g;
}

inline std::vector<SweepRow> sweep_alpha(const std::vector<WeightTensor>& weights, const StatsMap& stats,
                                         const std::vector<double>& grid, std::uint64_t chunk_size = kDefaultChunkSize,
                                         std::uint64_t seed = 42, std::size_t tokens = 16) {
    std::vector<ActivationSample> samples;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        samples.push_back(synth_activations(stats_for(stats, weights[i].name, weights[i].cols), tokens, seed + i));
    }
    std::vector<SweepRow> rows;
    for (double alpha : grid) {
        const auto q = quantize_model(weights, stats, alpha);
        const auto a = analyze_model(q, chunk_size);
        std::vector<double> errs(weights.size());
        parallel_for(weights.size(), [&](std::size_t i) {
            errs[i] = simulate_layer(samples[i], weights[i], alpha).quantized_error;
        });
        double err = 0.0;
        for (double e : errs) err += e;
        rows.push_back({alpha, a.cr, a.near_zero_fraction, weights.empty() ? 0.0 : err / static_cast<double>(weights.size())});
    }
    return rows;
}

}  // namespace dcomp
