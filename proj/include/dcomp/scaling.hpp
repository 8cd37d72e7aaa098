#pragma once

// Compression-aware per-channel scaling and per-tensor symmetric INT8 quantization.
//
//   s_i = max|X_i|^alpha            (alpha in [0, 1])
//   Y   = (X / s) (s W)^T = X' W'^T
//   q   = clamp(round(v * 127 / max|v|), -127, 127),  w_scale = max|v| / 127
//
// Rounding is half-away-from-zero (std::round), so results are bit-identical
// across platforms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dcomp/error.hpp"
#include "dcomp/types.hpp"

namespace dcomp {

// Floor applied to s_i so that X / s stays finite for channels with zero activation.
inline constexpr double kScaleFloor = 1e-8;

inline ScaleVector compute_scale(const ActivationStats& stats, double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, Errc::invalid_argument,
            "alpha must be in [0, 1], got " + std::to_string(alpha));
    ScaleVector sv;
    sv.alpha = alpha;
    sv.s.reserve(stats.channel_max.size());
    for (double m : stats.channel_max) {
        if (!(std::isfinite(m) && m >= 0.0)) {
            fail(Errc::invalid_argument, "stats '" + stats.name + "': channel max must be finite and non-negative");
        }
        sv.s.push_back(std::max(std::pow(m, alpha), kScaleFloor));
    }
    return sv;
}

inline WeightTensor scale_weights(const WeightTensor& w, const ScaleVector& sv) {
    require(sv.s.size() == w.cols, Errc::dimension_mismatch,
            "tensor '" + w.name + "': scale vector has " + std::to_string(sv.s.size()) + " entries, expected " +
                std::to_string(w.cols));
    require(!w.applied_scale, Errc::invalid_argument, "tensor '" + w.name + "' is already scaled");
    WeightTensor out;
    out.name = w.name;
    out.rows = w.rows;
    out.cols = w.cols;
    out.values.resize(w.values.size());
    for (std::size_t r = 0; r < w.rows; ++r) {
        for (std::size_t c = 0; c < w.cols; ++c) out.values[r * w.cols + c] = w.values[r * w.cols + c] * sv.s[c];
    }
    out.applied_scale = sv;
    return out;
}

// Symmetric per-tensor quantization of raw values; returns the step size.
inline double quantize_symmetric(std::span<const double> values, std::span<std::int8_t> out) {
    require(!values.empty(), Errc::empty_input, "empty input");
    double max_abs = 0.0;
    for (double v : values) max_abs = std::max(max_abs, std::fabs(v));
    require(max_abs > 0.0, Errc::zero_dynamic_range, "zero dynamic range");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double q = std::round(values[i] * 127.0 / max_abs);
        out[i] = static_cast<std::int8_t>(std::clamp(q, -127.0, 127.0));
    }
    return max_abs / 127.0;
}

inline QuantizedTensor quantize(const WeightTensor& w) {
    w.validate();
    QuantizedTensor q;
    q.name = w.name;
    q.rows = w.rows;
    q.cols = w.cols;
    q.qvalues.resize(w.values.size());
    try {
        q.w_scale = quantize_symmetric(w.values, q.qvalues);
    } catch (const Error& e) {
        throw Error(e.code(), "tensor '" + w.name + "': " + e.what());
    }
    q.scale_vec = w.applied_scale ? *w.applied_scale : ScaleVector::identity(w.cols);
    // Stored as f32 in containers; keep the in-memory copy at the same precision.
    for (auto& s : q.scale_vec.s) s = static_cast<double>(static_cast<float>(s));
    return q;
}

// v = q * w_scale / s_c, undoing both quantization and per-channel scaling.
inline WeightTensor dequantize(const QuantizedTensor& q) {
    q.validate();
    WeightTensor w;
    w.name = q.name;
    w.rows = q.rows;
    w.cols = q.cols;
    w.values.resize(q.qvalues.size());
    for (std::size_t r = 0; r < q.rows; ++r) {
        for (std::size_t c = 0; c < q.cols; ++c) {
            const std::size_t i = r * q.cols + c;
            w.values[i] = static_cast<double>(q.qvalues[i]) * q.w_scale / q.scale_vec.s[c];
        }
    }
    return w;
}

// Calibration activations: tokens x channels, row-major.
struct ActivationSample {
    std::size_t tokens = 0;
    std::size_t channels = 0;
    std::vector<double> values;
};

struct LayerErrorReport {
    double alpha = 0.0;
    double fp_identity_error = 0.0;  // ||(X/s)(sW)^T - XW^T|| / ||XW^T||, no quantization
    double quantized_error = 0.0;    // ||Q(X')Q(W')^T - XW^T|| / ||XW^T||
};

namespace detail {

// out[t][r] = sum_c x[t][c] * w[r][c]
inline std::vector<double> matmul_nt(std::span<const double> x, std::span<const double> w, std::size_t tokens,
                                     std::size_t rows, std::size_t channels) {
    std::vector<double> out(tokens * rows, 0.0);
    for (std::size_t t = 0; t < tokens; ++t) {
        const double* xr = x.data() + t * channels;
        for (std::size_t r = 0; r < rows; ++r) {
            const double* wr = w.data() + r * channels;
            double acc = 0.0;
            for (std::size_t c = 0; c < channels; ++c) acc += xr[c] * wr[c];
            out[t * rows + r] = acc;
        }
    }
    return out;
}

inline double relative_error(std::span<const double> approx, std::span<const double> exact) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        num += (approx[i] - exact[i]) * (approx[i] - exact[i]);
        den += exact[i] * exact[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace detail

inline ActivationStats channel_max_of(const ActivationSample& x, std::string name = {}) {
    ActivationStats stats{std::move(name), std::vector<double>(x.channels, 0.0)};
    for (std::size_t t = 0; t < x.tokens; ++t) {
        for (std::size_t c = 0; c < x.channels; ++c) {
            stats.channel_max[c] = std::max(stats.channel_max[c], std::fabs(x.values[t * x.channels + c]));
        }
    }
    return stats;
}

// Runs one linear layer through the FP path and the scaled W8A8 path. Scales
// come from the sample's own per-channel maxima; activations are quantized
// with the same per-tensor symmetric scheme as weights.
inline LayerErrorReport simulate_layer(const ActivationSample& x, const WeightTensor& w, double alpha) {
    require(x.values.size() == x.tokens * x.channels, Errc::dimension_mismatch,
            "activation sample: values.size() != tokens * channels");
    require(x.channels == w.cols, Errc::dimension_mismatch,
            "activation sample has " + std::to_string(x.channels) + " channels, tensor '" + w.name +
                "' expects " + std::to_string(w.cols));
    w.validate();

    const ScaleVector sv = compute_scale(channel_max_of(x), alpha);
    const std::vector<double> y = detail::matmul_nt(x.values, w.values, x.tokens, w.rows, w.cols);

    std::vector<double> xs(x.values.size());
    for (std::size_t t = 0; t < x.tokens; ++t) {
        for (std::size_t c = 0; c < x.channels; ++c) xs[t * x.channels + c] = x.values[t * x.channels + c] / sv.s[c];
    }
    const WeightTensor ws = scale_weights(w, sv);

    LayerErrorReport rep;
    rep.alpha = alpha;
    rep.fp_identity_error =
        detail::relative_error(detail::matmul_nt(xs, ws.values, x.tokens, w.rows, w.cols), y);

    std::vector<std::int8_t> qx(xs.size());
    std::vector<std::int8_t> qw(ws.values.size());
    const double x_step = quantize_symmetric(xs, qx);
    const double w_step = quantize_symmetric(ws.values, qw);
    std::vector<double> dx(qx.size());
    std::vector<double> dw(qw.size());
    std::transform(qx.begin(), qx.end(), dx.begin(), [&](std::int8_t q) { return q * x_step; });
    std::transform(qw.begin(), qw.end(), dw.begin(), [&](std::int8_t q) { return q * w_step; });
    rep.quantized_error = detail::relative_error(detail::matmul_nt(dx, dw, x.tokens, w.rows, w.cols), y);
    return rep;
}

}  // namespace dcomp
