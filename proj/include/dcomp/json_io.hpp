#pragma once

// JSON documents for hardware profiles, compression plans and latency reports.

#include <string>
#include <string_view>

#include "json.hpp"

#include "dcomp/error.hpp"
#include "dcomp/latency.hpp"
#include "dcomp/plan.hpp"

namespace dcomp {

inline nlohmann::ordered_json to_json(const HardwareProfile& h) {
    return {{"B_stoc", h.b_stoc}, {"B_ctog", h.b_ctog}, {"B_gpu", h.b_gpu},     {"D_max", h.d_max},
            {"c_sat", h.c_sat},   {"I_gpu", h.i_gpu},   {"mem_gpu", h.mem_gpu}, {"mem_cpu", h.mem_cpu}};
}

inline nlohmann::ordered_json to_json(const CompressionPlan& p) {
    return {{"chunk_size", p.chunk_size},
            {"n_chunks", p.n_chunks},
            {"block_size", p.block_size},
            {"compressed_mask", p.compressed_mask}};
}

inline nlohmann::ordered_json to_json(const LatencyReport& r) {
    return {{"architecture", std::string(to_string(r.architecture))},
            {"per_sample_latency", r.per_sample_latency},
            {"bottleneck", std::string(to_string(r.bottleneck))},
            {"loading_time", r.loading_time},
            {"decompression_time", r.decompression_time},
            {"compute_time", r.compute_time},
            {"memory_used_gpu", r.memory_used_gpu},
            {"memory_used_cpu", r.memory_used_cpu}};
}

namespace detail {

inline nlohmann::json parse_json(std::string_view text, std::string_view what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::malformed, std::string(what) + ": " + e.what());
    }
}

template <typename T>
T field(const nlohmann::json& j, const char* key, std::string_view what) {
    require(j.contains(key), Errc::malformed, std::string(what) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(Errc::malformed, std::string(what) + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace detail

inline HardwareProfile profile_from_json(std::string_view text) {
    const auto j = detail::parse_json(text, "profile");
    require(j.is_object(), Errc::malformed, "profile: expected an object");
    HardwareProfile h;
    h.b_stoc = detail::field<double>(j, "B_stoc", "profile");
    h.b_ctog = detail::field<double>(j, "B_ctog", "profile");
    h.b_gpu = detail::field<double>(j, "B_gpu", "profile");
    h.d_max = detail::field<double>(j, "D_max", "profile");
    h.c_sat = detail::field<double>(j, "c_sat", "profile");
    h.i_gpu = detail::field<double>(j, "I_gpu", "profile");
    h.mem_gpu = detail::field<double>(j, "mem_gpu", "profile");
    h.mem_cpu = detail::field<double>(j, "mem_cpu", "profile");
    h.validate();
    return h;
}

inline CompressionPlan plan_from_json(std::string_view text) {
    const auto j = detail::parse_json(text, "plan");
    require(j.is_object(), Errc::malformed, "plan: expected an object");
    CompressionPlan p;
    p.chunk_size = detail::field<std::uint64_t>(j, "chunk_size", "plan");
    p.n_chunks = detail::field<std::size_t>(j, "n_chunks", "plan");
    p.block_size = detail::field<std::size_t>(j, "block_size", "plan");
    p.compressed_mask = detail::field<std::vector<bool>>(j, "compressed_mask", "plan");
    p.validate();
    return p;
}

}  // namespace dcomp
