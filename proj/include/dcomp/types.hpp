#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcomp/error.hpp"

namespace dcomp {

// Per-input-channel scale factors s_i = max|X_i|^alpha.
struct ScaleVector {
    double alpha = 0.0;
    std::vector<double> s;

    static ScaleVector identity(std::size_t channels) { return {0.0, std::vector<double>(channels, 1.0)}; }

    friend bool operator==(const ScaleVector&, const ScaleVector&) = default;
};

// 2-D weight matrix, row-major, rows = output channels, cols = input channels.
struct WeightTensor {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    // Set when the tensor is the output of scale_weights.
    std::optional<ScaleVector> applied_scale;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    void validate() const {
        require(values.size() == rows * cols, Errc::dimension_mismatch,
                "tensor '" + name + "': values.size() != rows * cols");
        for (double v : values) {
            if (!std::isfinite(v)) fail(Errc::invalid_argument, "tensor '" + name + "': non-finite value");
        }
    }

    friend bool operator==(const WeightTensor&, const WeightTensor&) = default;
};

// Per-input-channel max |activation| from calibration.
struct ActivationStats {
    std::string name;
    std::vector<double> channel_max;

    void validate(std::size_t cols) const {
        require(channel_max.size() == cols, Errc::dimension_mismatch,
                "stats '" + name + "': " + std::to_string(channel_max.size()) + " channels, expected " +
                    std::to_string(cols));
        for (double v : channel_max) {
            if (!(std::isfinite(v) && v >= 0.0)) {
                fail(Errc::invalid_argument, "stats '" + name + "': channel max must be finite and non-negative");
            }
        }
    }

    friend bool operator==(const ActivationStats&, const ActivationStats&) = default;
};

// Per-tensor symmetric INT8 weights plus everything needed to undo scaling.
// Scale factors are held at f32 precision, the precision they are stored with
// in a container, so a container round trip is bit-exact.
struct QuantizedTensor {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int8_t> qvalues;
    double w_scale = 0.0;
    ScaleVector scale_vec;

    [[nodiscard]] std::size_t size() const noexcept { return qvalues.size(); }
    [[nodiscard]] std::int8_t at(std::size_t r, std::size_t c) const { return qvalues[r * cols + c]; }

    void validate() const {
        require(qvalues.size() == rows * cols, Errc::dimension_mismatch,
                "quantized tensor '" + name + "': qvalues.size() != rows * cols");
        for (auto q : qvalues) {
            if (q < -127) fail(Errc::invalid_argument, "quantized tensor '" + name + "': value -128 out of range");
        }
        require(std::isfinite(w_scale) && w_scale > 0.0, Errc::invalid_argument,
                "quantized tensor '" + name + "': w_scale must be positive");
        require(scale_vec.s.size() == cols, Errc::dimension_mismatch,
                "quantized tensor '" + name + "': scale vector length != cols");
    }

    friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

}  // namespace dcomp
