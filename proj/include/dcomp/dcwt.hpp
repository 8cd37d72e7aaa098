#pragma once

// DCWT interchange: a binary weights file ("DCW1") plus a JSON stats file
// mapping tensor name -> per-input-channel activation maxima.
//
// weights file, all integers little-endian:
//   "DCW1" | u16 version = 1 | u32 tensor_count
//   per tensor: u16 name_len | name (UTF-8) | u8 dtype | u32 rows | u32 cols | rows*cols values
//   dtype 0 = f32, 1 = f64, 2 = i8; values row-major.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcomp/bytes.hpp"
#include "dcomp/error.hpp"
#include "dcomp/types.hpp"

namespace dcomp {

inline constexpr char kDcwtMagic[4] = {'D', 'C', 'W', '1'};
inline constexpr std::uint16_t kDcwtVersion = 1;

enum class DType : std::uint8_t { f32 = 0, f64 = 1, i8 = 2 };

inline Bytes write_dcwt(const std::vector<WeightTensor>& tensors, DType dtype = DType::f64) {
    ByteWriter w;
    w.str({kDcwtMagic, 4});
    w.u16(kDcwtVersion);
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        t.validate();
        require(t.name.size() <= UINT16_MAX, Errc::invalid_argument, "tensor name too long");
        require(t.rows <= UINT32_MAX && t.cols <= UINT32_MAX, Errc::invalid_argument, "tensor too large");
        w.u16(static_cast<std::uint16_t>(t.name.size()));
        w.str(t.name);
        w.u8(static_cast<std::uint8_t>(dtype));
        w.u32(static_cast<std::uint32_t>(t.rows));
        w.u32(static_cast<std::uint32_t>(t.cols));
        for (double v : t.values) {
            switch (dtype) {
                case DType::f32: w.f32(static_cast<float>(v)); break;
                case DType::f64: w.f64(v); break;
                case DType::i8:
                    if (!(v == std::round(v) && v >= -128 && v <= 127)) {
                        fail(Errc::invalid_argument, "tensor '" + t.name + "': value not representable as i8");
                    }
                    w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(v)));
                    break;
            }
        }
    }
    return w.take();
}

inline std::vector<WeightTensor> read_dcwt(std::span<const std::uint8_t> data) {
    ByteReader r(data, "DCWT");
    const auto magic = r.bytes(4);
    require(std::equal(magic.begin(), magic.end(), kDcwtMagic), Errc::bad_magic, "DCWT: bad magic");
    const auto version = r.u16();
    require(version == kDcwtVersion, Errc::unsupported_version,
            "DCWT: unsupported version " + std::to_string(version));
    const auto count = r.u32();

    std::vector<WeightTensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        WeightTensor t;
        t.name = r.str(r.u16());
        const auto dtype = r.u8();
        require(dtype <= 2, Errc::malformed, "DCWT: tensor '" + t.name + "' has unknown dtype tag");
        t.rows = r.u32();
        t.cols = r.u32();
        const std::size_t elem = dtype == 0 ? 4 : dtype == 1 ? 8 : 1;
        const std::size_t n = t.rows * t.cols;  // u32 x u32 fits in 64 bits
        require(n <= r.remaining() / elem, Errc::truncated, "DCWT: tensor '" + t.name + "' data truncated");
        t.values.resize(n);
        for (auto& v : t.values) {
            switch (static_cast<DType>(dtype)) {
                case DType::f32: v = r.f32(); break;
                case DType::f64: v = r.f64(); break;
                case DType::i8: v = static_cast<std::int8_t>(r.u8()); break;
            }
        }
        t.validate();
        out.push_back(std::move(t));
    }
    require(r.remaining() == 0, Errc::malformed, "DCWT: trailing bytes after last tensor");
    return out;
}

inline std::string write_stats_json(const std::vector<ActivationStats>& stats) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& s : stats) j[s.name] = s.channel_max;
    return j.dump();
}

inline std::map<std::string, ActivationStats> read_stats_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::malformed, std::string("stats JSON: ") + e.what());
    }
    require(j.is_object(), Errc::malformed, "stats JSON: top level must be an object");
    std::map<std::string, ActivationStats> out;
    for (const auto& [name, arr] : j.items()) {
        require(arr.is_array(), Errc::malformed, "stats JSON: entry '" + name + "' is not an array");
        ActivationStats s;
        s.name = name;
        for (const auto& v : arr) {
            if (!v.is_number()) fail(Errc::malformed, "stats JSON: entry '" + name + "' has a non-numeric value");
            const double d = v.get<double>();
            if (!(std::isfinite(d) && d >= 0)) {
                fail(Errc::invalid_argument, "stats JSON: entry '" + name + "' has a negative or non-finite value");
            }
            s.channel_max.push_back(d);
        }
        out.emplace(name, std::move(s));
    }
    return out;
}

}  // namespace dcomp
