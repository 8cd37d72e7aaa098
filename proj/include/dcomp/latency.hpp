#pragma once

// Per-sample inference latency of a chunked, partially compressed model.
//
// Three pipelined stages per chunk: loading over the slowest link of the
// memory path, decompression (compressed chunks only) and weight compute.
// Stages overlap perfectly across chunks, so the latency is the largest
// stage total:
//
//   L = max( sum_i loaded_i / B_loading, sum_{i compressed} S / D(S), N * S / I )
//
// with loaded_i = S / cr_i for compressed chunks and S for stored ones. For a
// uniform plan this is max(S'/B, S/D, S/I) * N, S' being the loaded chunk size.
//
// Rates are in GB/s (1e9 bytes per second), sizes in bytes, times in seconds.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dcomp/error.hpp"
#include "dcomp/plan.hpp"

namespace dcomp {

inline constexpr double kGB = 1e9;

enum class Architecture { gpu_only, gpu_buffer, gpu_cpu, storage };
enum class Stage { loading, decompression, compute };

constexpr std::string_view to_string(Architecture a) noexcept {
    switch (a) {
        case Architecture::gpu_only: return "gpu_only";
        case Architecture::gpu_buffer: return "gpu_buffer";
        case Architecture::gpu_cpu: return "gpu_cpu";
        case Architecture::storage: return "storage";
    }
    return "?";
}

constexpr std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::loading: return "loading";
        case Stage::decompression: return "decompression";
        case Stage::compute: return "compute";
    }
    return "?";
}

inline std::optional<Architecture> parse_architecture(std::string_view s) {
    for (auto a : {Architecture::gpu_only, Architecture::gpu_buffer, Architecture::gpu_cpu, Architecture::storage}) {
        if (s == to_string(a)) return a;
    }
    return std::nullopt;
}

struct HardwareProfile {
    double b_stoc = 3.0;     // storage -> CPU, GB/s
    double b_ctog = 25.0;    // CPU -> GPU, GB/s
    double b_gpu = 600.0;    // GPU memory access, GB/s
    double d_max = 156.08;   // peak decompression speed, GB/s
    double c_sat = 76.72e6;  // chunk size at which decompression saturates, bytes
    double i_gpu = 105.10;   // weight compute speed, GB/s
    double mem_gpu = 45e9;   // bytes
    double mem_cpu = 64e9;   // bytes

    void validate() const {
        for (double r : {b_stoc, b_ctog, b_gpu, d_max, c_sat, i_gpu}) {
            require(std::isfinite(r) && r > 0, Errc::invalid_argument, "hardware profile: rates must be positive");
        }
        require(mem_gpu >= 0 && mem_cpu >= 0, Errc::invalid_argument, "hardware profile: memory must be >= 0");
    }

    friend bool operator==(const HardwareProfile&, const HardwareProfile&) = default;
};

inline double effective_loading(const HardwareProfile& h, Architecture arch) {
    switch (arch) {
        case Architecture::gpu_only:
        case Architecture::gpu_buffer: return h.b_gpu;
        case Architecture::gpu_cpu: return std::min(h.b_ctog, h.b_gpu);
        case Architecture::storage: return std::min({h.b_stoc, h.b_ctog, h.b_gpu});
    }
    return h.b_gpu;
}

// Saturating-linear decompression speed: grows with chunk size up to c_sat.
inline double d_gpu(const HardwareProfile& h, double chunk_size) {
    require(chunk_size > 0, Errc::invalid_argument, "chunk size must be positive");
    return h.d_max * std::min(1.0, chunk_size / h.c_sat);
}

struct CurveFit {
    double d_max = 0.0;
    double c_sat = 0.0;
    double sse = 0.0;
};

// Least-squares fit of the saturating-linear curve to (chunk bytes, GB/s)
// measurements. Tries every split of the size-sorted points into a linear
// prefix and a saturated suffix and keeps the best consistent one.
inline CurveFit fit_decompression_curve(std::vector<std::pair<double, double>> points) {
    require(!points.empty(), Errc::empty_input, "empty input");
    std::sort(points.begin(), points.end());
    std::optional<CurveFit> best;
    const std::size_t n = points.size();
    for (std::size_t k = 0; k <= n; ++k) {
        // points [0, k) on the ramp y = a x, points [k, n) at y = d
        double sxx = 0, sxy = 0, sy = 0;
        for (std::size_t i = 0; i < k; ++i) {
            sxx += points[i].first * points[i].first;
            sxy += points[i].first * points[i].second;
        }
        for (std::size_t i = k; i < n; ++i) sy += points[i].second;
        CurveFit f;
        if (k == n) {
            // Pure ramp: saturation sits at the largest point.
            const double a = sxy / sxx;
            f.c_sat = points.back().first;
            f.d_max = a * f.c_sat;
        } else {
            f.d_max = sy / static_cast<double>(n - k);
            if (k == 0) {
                f.c_sat = points.front().first;
            } else {
                const double a = sxy / sxx;
                f.c_sat = f.d_max / a;
                const bool consistent = f.c_sat >= points[k - 1].first && f.c_sat <= points[k].first;
                if (!consistent) continue;
            }
        }
        for (const auto& [x, y] : points) {
            const double pred = f.d_max * std::min(1.0, x / f.c_sat);
            f.sse += (pred - y) * (pred - y);
        }
        if (!best || f.sse < best->sse) best = f;
    }
    return *best;
}

struct LatencyReport {
    Architecture architecture = Architecture::gpu_buffer;
    double per_sample_latency = 0.0;  // seconds
    Stage bottleneck = Stage::compute;
    double loading_time = 0.0;        // stage totals, seconds
    double decompression_time = 0.0;
    double compute_time = 0.0;
    double memory_used_gpu = 0.0;  // bytes
    double memory_used_cpu = 0.0;
};

// Resident bytes: compressed chunks at S / cr, stored chunks at S, plus the
// decompression buffer.
inline double memory_footprint(const CompressionPlan& plan, std::span<const double> cr_per_chunk,
                               std::size_t buffer_chunks = 1) {
    plan.validate();
    require(cr_per_chunk.size() == plan.n_chunks, Errc::dimension_mismatch,
            "cr_per_chunk length != n_chunks");
    const auto s = static_cast<double>(plan.chunk_size);
    double total = 0.0;
    for (std::size_t i = 0; i < plan.n_chunks; ++i) total += plan.compressed_mask[i] ? s / cr_per_chunk[i] : s;
    return total + static_cast<double>(buffer_chunks) * s;
}

inline LatencyReport latency(const HardwareProfile& h, const CompressionPlan& plan, Architecture arch,
                             std::span<const double> cr_per_chunk, std::size_t buffer_chunks = 1) {
    h.validate();
    plan.validate();
    require(cr_per_chunk.size() == plan.n_chunks, Errc::dimension_mismatch, "cr_per_chunk length != n_chunks");
    const auto s = static_cast<double>(plan.chunk_size);
    const double b_load = effective_loading(h, arch) * kGB;
    const double d = d_gpu(h, s) * kGB;
    const double inf = h.i_gpu * kGB;

    LatencyReport rep;
    rep.architecture = arch;
    for (std::size_t i = 0; i < plan.n_chunks; ++i) {
        const double cr = cr_per_chunk[i];
        if (plan.compressed_mask[i]) {
            if (!(std::isfinite(cr) && cr >= 1.0)) fail(Errc::invalid_argument, "compressed chunk needs cr >= 1");
            rep.loading_time += (s / cr) / b_load;
            rep.decompression_time += s / d;
        } else {
            rep.loading_time += s / b_load;
        }
        rep.compute_time += s / inf;
    }
    const std::array<double, 3> totals{rep.loading_time, rep.decompression_time, rep.compute_time};
    const auto it = std::max_element(totals.begin(), totals.end());
    rep.per_sample_latency = *it;
    rep.bottleneck = static_cast<Stage>(it - totals.begin());

    const double resident = memory_footprint(plan, cr_per_chunk, buffer_chunks);
    const double buffer = static_cast<double>(buffer_chunks) * s;
    switch (arch) {
        case Architecture::gpu_only:
        case Architecture::gpu_buffer:
            rep.memory_used_gpu = resident;
            break;
        case Architecture::gpu_cpu:
            rep.memory_used_gpu = std::min(resident, h.mem_gpu);
            rep.memory_used_cpu = resident - rep.memory_used_gpu;
            break;
        case Architecture::storage:
            // Model streams from storage; GPU keeps the buffer, CPU caches what fits.
            rep.memory_used_gpu = buffer;
            rep.memory_used_cpu = std::min(resident - buffer, h.mem_cpu);
            break;
    }
    return rep;
}

inline LatencyReport latency(const HardwareProfile& h, const CompressionPlan& plan, Architecture arch, double cr,
                             std::size_t buffer_chunks = 1) {
    const std::vector<double> crs(plan.n_chunks, cr);
    return latency(h, plan, arch, crs, buffer_chunks);
}

// Fastest memory tier that holds the compressed model (plus buffer in GPU memory).
inline Architecture choose_architecture(const HardwareProfile& h, double model_bytes_compressed, double buffer_bytes) {
    require(model_bytes_compressed > 0 && buffer_bytes >= 0, Errc::invalid_argument, "sizes must be positive");
    if (model_bytes_compressed + buffer_bytes <= h.mem_gpu) return Architecture::gpu_buffer;
    if (model_bytes_compressed + buffer_bytes <= h.mem_gpu + h.mem_cpu) return Architecture::gpu_cpu;
    return Architecture::storage;
}

struct PlanResult {
    CompressionPlan plan;
    bool feasible = false;
    LatencyReport report;
};

// Smallest-footprint block-rule plan meeting the latency budget. Block sizes
// 1..n_chunks are tried in order (smaller N compresses more), then all-store.
// If nothing meets the budget the all-store plan comes back flagged infeasible.
inline PlanResult plan_partial(const HardwareProfile& h, std::size_t n_chunks, std::uint64_t chunk_size,
                               double cr_estimate, double latency_budget, Architecture arch = Architecture::gpu_buffer) {
    require(latency_budget > 0, Errc::invalid_argument, "latency budget must be positive");
    require(cr_estimate >= 1.0, Errc::invalid_argument, "cr estimate must be >= 1");
    require(n_chunks > 0, Errc::invalid_argument, "plan needs at least one chunk");
    for (std::size_t n = 1; n <= n_chunks; ++n) {
        auto plan = CompressionPlan::block_rule(n_chunks, chunk_size, n);
        auto rep = latency(h, plan, arch, cr_estimate);
        if (rep.per_sample_latency <= latency_budget) return {std::move(plan), true, rep};
    }
    auto plan = CompressionPlan::all_store(n_chunks, chunk_size);
    auto rep = latency(h, plan, arch, cr_estimate);
    const bool ok = rep.per_sample_latency <= latency_budget;
    return {std::move(plan), ok, rep};
}

}  // namespace dcomp
