#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dcomp/error.hpp"
#include "dcomp/random.hpp"
#include "dcomp/types.hpp"

namespace dcomp {

// Parameters of a synthetic weight/activation pair. The defaults give weights
// bounded by 1 and activation maxima with a heavy outlier tail.
struct SynthSpec {
    std::string name = "layer";
    std::size_t rows = 768;
    std::size_t cols = 768;
    double weight_std = 0.2;
    double weight_clip = 1.0;
    double act_mu = -1.0;
    double act_sigma = 1.0;
    double outlier_fraction = 0.02;
    double outlier_scale = 20.0;
};

struct SynthLayer {
    WeightTensor weights;
    ActivationStats stats;
};

inline SynthLayer synth_ensemble(const SynthSpec& spec, std::uint64_t seed) {
    require(spec.rows > 0 && spec.cols > 0, Errc::invalid_argument, "synth: dimensions must be positive");
    require(spec.weight_std > 0 && spec.weight_clip > 0 && spec.act_sigma >= 0, Errc::invalid_argument,
            "synth: distribution parameters must be positive");
    require(spec.outlier_fraction >= 0 && spec.outlier_fraction <= 1, Errc::invalid_argument,
            "synth: outlier_fraction must be in [0, 1]");

    Rng rng(seed);
    SynthLayer out;
    out.weights.name = spec.name;
    out.weights.rows = spec.rows;
    out.weights.cols = spec.cols;
    out.weights.values.resize(spec.rows * spec.cols);
    for (auto& v : out.weights.values) {
        v = std::clamp(rng.normal(0.0, spec.weight_std), -spec.weight_clip, spec.weight_clip);
    }

    out.stats.name = spec.name;
    out.stats.channel_max.resize(spec.cols);
    for (auto& m : out.stats.channel_max) m = rng.lognormal(spec.act_mu, spec.act_sigma);

    // Partial Fisher-Yates picks the outlier channels.
    const auto n_outliers =
        static_cast<std::size_t>(std::llround(spec.outlier_fraction * static_cast<double>(spec.cols)));
    std::vector<std::size_t> idx(spec.cols);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_outliers; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(spec.cols - i));
        std::swap(idx[i], idx[j]);
        out.stats.channel_max[idx[i]] *= spec.outlier_scale;
    }
    return out;
}

// Layer shapes of one decoder block of a 768-wide transformer
// (q, k, v, out projections, then the two MLP matrices).
inline std::vector<SynthSpec> default_block_specs(std::size_t hidden = 768, std::size_t blocks = 2) {
    std::vector<SynthSpec> specs;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::string prefix = "block" + std::to_string(b) + ".";
        for (const char* proj : {"q_proj", "k_proj", "v_proj", "out_proj"}) {
            SynthSpec s;
            s.name = prefix + proj;
            s.rows = hidden;
            s.cols = hidden;
            specs.push_back(s);
        }
        SynthSpec fc1;
        fc1.name = prefix + "fc1";
        fc1.rows = 4 * hidden;
        fc1.cols = hidden;
        specs.push_back(fc1);
        SynthSpec fc2;
        fc2.name = prefix + "fc2";
        fc2.rows = hidden;
        fc2.cols = 4 * hidden;
        specs.push_back(fc2);
    }
    return specs;
}

// A model's worth of layers; layer i uses seed + i.
inline std::vector<SynthLayer> synth_model(const std::vector<SynthSpec>& specs, std::uint64_t seed) {
    std::vector<SynthLayer> layers;
    layers.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) layers.push_back(synth_ensemble(specs[i], seed + i));
    return layers;
}

inline std::vector<SynthLayer> default_ensemble(std::uint64_t seed = 42) {
    return synth_model(default_block_specs(), seed);
}

}  // namespace dcomp
