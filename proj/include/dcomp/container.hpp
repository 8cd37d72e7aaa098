#pragma once

// DCC1 chunked container for quantized tensors.
//
//   "DCC1" | u16 version | u32 header_len | header | u32 chunk_count | chunk table | payloads
//
// header:
//   u64 chunk_size | u32 tensor_count
//   per tensor: u16 name_len | name | u32 rows | u32 cols | f64 w_scale | f64 alpha
//               | u32 scale_len (== cols) | scale_len x f32
//   u32 crc32 of the header bytes above
//
// chunk table entry (29 bytes): u8 codec | u64 file_offset | u64 comp_len | u64 uncomp_len | u32 crc32
//
// The tensors' INT8 values are concatenated in directory order and cut into
// chunk_size pieces (the last may be short). Payloads follow the table
// back to back, in chunk order, and end exactly at end of file. Each chunk's
// CRC covers its uncompressed bytes. All integers are little-endian.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "dcomp/ans.hpp"
#include "dcomp/bytes.hpp"
#include "dcomp/error.hpp"
#include "dcomp/parallel.hpp"
#include "dcomp/plan.hpp"
#include "dcomp/types.hpp"

namespace dcomp {

inline constexpr char kDccMagic[4] = {'D', 'C', 'C', '1'};
inline constexpr std::uint16_t kDccVersion = 1;
inline constexpr std::uint64_t kMinChunkSize = 4096;
inline constexpr std::uint64_t kDefaultChunkSize = 16ull << 20;
inline constexpr std::size_t kChunkEntryBytes = 29;

enum class Codec : std::uint8_t { store = 0, ans = 1 };

constexpr std::string_view to_string(Codec c) noexcept { return c == Codec::store ? "store" : "ans"; }

inline std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
    return static_cast<std::uint32_t>(::crc32_z(::crc32_z(0L, Z_NULL, 0), data.data(), data.size()));
}

struct Chunk {
    Codec codec = Codec::store;
    std::uint64_t uncompressed_len = 0;
    Bytes payload;
    std::uint32_t checksum = 0;
};

// Directory entry: everything about a tensor except its values.
struct TensorInfo {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    double w_scale = 0.0;
    ScaleVector scale_vec;

    [[nodiscard]] std::uint64_t bytes() const noexcept { return static_cast<std::uint64_t>(rows) * cols; }
    friend bool operator==(const TensorInfo&, const TensorInfo&) = default;
};

struct CompressedModel {
    std::uint64_t chunk_size = kDefaultChunkSize;
    std::vector<TensorInfo> tensors;
    std::vector<Chunk> chunks;

    [[nodiscard]] std::uint64_t raw_bytes() const {
        std::uint64_t n = 0;
        for (const auto& t : tensors) n += t.bytes();
        return n;
    }

    [[nodiscard]] std::uint64_t payload_bytes() const {
        std::uint64_t n = 0;
        for (const auto& c : chunks) n += c.payload.size();
        return n;
    }
};

namespace detail {

inline Bytes serialize_header(const CompressedModel& m) {
    ByteWriter w;
    w.u64(m.chunk_size);
    w.u32(static_cast<std::uint32_t>(m.tensors.size()));
    for (const auto& t : m.tensors) {
        w.u16(static_cast<std::uint16_t>(t.name.size()));
        w.str(t.name);
        w.u32(static_cast<std::uint32_t>(t.rows));
        w.u32(static_cast<std::uint32_t>(t.cols));
        w.f64(t.w_scale);
        w.f64(t.scale_vec.alpha);
        w.u32(static_cast<std::uint32_t>(t.scale_vec.s.size()));
        for (double s : t.scale_vec.s) w.f32(static_cast<float>(s));
    }
    w.u32(crc32_of(w.data()));
    return w.take();
}

inline void parse_header(std::span<const std::uint8_t> header, CompressedModel& m) {
    require(header.size() >= 4, Errc::malformed, "DCC1: header too short");
    const auto body = header.first(header.size() - 4);
    ByteReader crc_reader(header.subspan(header.size() - 4));
    require(crc_reader.u32() == crc32_of(body), Errc::checksum_mismatch, "DCC1: header checksum mismatch");

    // Header bytes are CRC-verified, so running short here means a malformed writer.
    try {
        ByteReader r(body, "DCC1 header");
        m.chunk_size = r.u64();
        require(m.chunk_size >= kMinChunkSize, Errc::malformed, "DCC1: chunk size below minimum");
        const auto count = r.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
            TensorInfo t;
            t.name = r.str(r.u16());
            t.rows = r.u32();
            t.cols = r.u32();
            t.w_scale = r.f64();
            t.scale_vec.alpha = r.f64();
            require(std::isfinite(t.w_scale) && t.w_scale > 0, Errc::malformed,
                    "DCC1: tensor '" + t.name + "' has invalid w_scale");
            require(t.scale_vec.alpha >= 0 && t.scale_vec.alpha <= 1, Errc::malformed,
                    "DCC1: tensor '" + t.name + "' has invalid alpha");
            const auto n_scale = r.u32();
            require(n_scale == t.cols, Errc::malformed, "DCC1: tensor '" + t.name + "' scale length != cols");
            require(n_scale <= r.remaining() / 4, Errc::malformed, "DCC1: scale vector overruns header");
            t.scale_vec.s.resize(n_scale);
            for (auto& s : t.scale_vec.s) {
                s = r.f32();
                if (!(std::isfinite(s) && s > 0)) fail(Errc::malformed, "DCC1: tensor '" + t.name + "' has a non-positive scale");
            }
            m.tensors.push_back(std::move(t));
        }
        require(r.remaining() == 0, Errc::malformed, "DCC1: trailing bytes in header");
    } catch (const Error& e) {
        if (e.code() == Errc::truncated) fail(Errc::malformed, e.what());
        throw;
    }
}

}  // namespace detail

inline Bytes serialize(const CompressedModel& m) {
    const Bytes header = detail::serialize_header(m);
    ByteWriter w;
    w.str({kDccMagic, 4});
    w.u16(kDccVersion);
    w.u32(static_cast<std::uint32_t>(header.size()));
    w.bytes(header);
    w.u32(static_cast<std::uint32_t>(m.chunks.size()));
    std::uint64_t offset = w.size() + m.chunks.size() * kChunkEntryBytes;
    for (const auto& c : m.chunks) {
        w.u8(static_cast<std::uint8_t>(c.codec));
        w.u64(offset);
        w.u64(c.payload.size());
        w.u64(c.uncompressed_len);
        w.u32(c.checksum);
        offset += c.payload.size();
    }
    for (const auto& c : m.chunks) w.bytes(c.payload);
    return w.take();
}

// Structural parse. Chunk payloads are not decoded here; unpack() does that and
// checks every CRC.
inline CompressedModel parse_container(std::span<const std::uint8_t> file) {
    ByteReader r(file, "DCC1");
    const auto magic = r.bytes(4);
    require(std::equal(magic.begin(), magic.end(), kDccMagic), Errc::bad_magic, "DCC1: bad magic");
    const auto version = r.u16();
    require(version == kDccVersion, Errc::unsupported_version,
            "DCC1: unsupported version " + std::to_string(version));
    const auto header_len = r.u32();
    CompressedModel m;
    m.chunk_size = 0;
    detail::parse_header(r.bytes(header_len), m);

    const auto count = r.u32();
    const std::uint64_t total = m.raw_bytes();
    require(count == chunk_count(total, m.chunk_size), Errc::malformed,
            "DCC1: chunk count " + std::to_string(count) + " does not cover " + std::to_string(total) + " bytes");
    require(count <= r.remaining() / kChunkEntryBytes, Errc::truncated, "DCC1: chunk table truncated");

    std::uint64_t expected_offset = r.pos() + static_cast<std::uint64_t>(count) * kChunkEntryBytes;
    std::uint64_t remaining_raw = total;
    struct Entry {
        std::uint64_t offset, comp_len;
    };
    std::vector<Entry> entries;
    m.chunks.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        auto& c = m.chunks[i];
        const auto codec = r.u8();
        const auto offset = r.u64();
        const auto comp_len = r.u64();
        c.uncompressed_len = r.u64();
        c.checksum = r.u32();
        if (codec > 1) throw ChunkError(Errc::malformed, i, "unknown codec tag " + std::to_string(codec));
        c.codec = static_cast<Codec>(codec);
        if (offset != expected_offset) throw ChunkError(Errc::malformed, i, "offset out of sequence");
        const std::uint64_t want = std::min(m.chunk_size, remaining_raw);
        if (c.uncompressed_len != want) throw ChunkError(Errc::malformed, i, "unexpected uncompressed length");
        if (c.codec == Codec::store && comp_len != c.uncompressed_len) {
            throw ChunkError(Errc::malformed, i, "stored chunk length mismatch");
        }
        if (c.codec == Codec::ans && comp_len < kAnsHeaderBytes) {
            throw ChunkError(Errc::malformed, i, "ans chunk shorter than its header");
        }
        if (comp_len > file.size() - std::min<std::uint64_t>(offset, file.size())) {
            throw ChunkError(Errc::truncated, i, "payload extends past end of file");
        }
        entries.push_back({offset, comp_len});
        expected_offset = offset + comp_len;
        remaining_raw -= want;
    }
    require(expected_offset == file.size(), Errc::malformed, "DCC1: trailing bytes after last chunk");
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto p = file.subspan(entries[i].offset, entries[i].comp_len);
        m.chunks[i].payload.assign(p.begin(), p.end());
    }
    return m;
}

namespace detail {

inline Chunk encode_chunk(std::span<const std::uint8_t> raw, Codec codec) {
    Chunk c;
    c.uncompressed_len = raw.size();
    c.checksum = crc32_of(raw);
    if (codec == Codec::ans) {
        auto enc = ans_compress(raw);
        if (enc.stream.size() < raw.size()) {
            c.codec = Codec::ans;
            c.payload = std::move(enc.stream);
            return c;
        }
        // ANS did not shrink the chunk; fall through to store.
    }
    c.codec = Codec::store;
    c.payload.assign(raw.begin(), raw.end());
    return c;
}

inline Bytes serialize_values(const std::vector<QuantizedTensor>& tensors) {
    Bytes stream;
    std::size_t total = 0;
    for (const auto& t : tensors) total += t.qvalues.size();
    stream.reserve(total);
    for (const auto& t : tensors) {
        for (auto q : t.qvalues) stream.push_back(static_cast<std::uint8_t>(q));
    }
    return stream;
}

}  // namespace detail

inline CompressedModel pack(const std::vector<QuantizedTensor>& tensors, const CompressionPlan& plan) {
    require(plan.chunk_size >= kMinChunkSize, Errc::invalid_argument,
            "chunk size must be >= " + std::to_string(kMinChunkSize));
    plan.validate();
    CompressedModel m;
    m.chunk_size = plan.chunk_size;
    for (const auto& t : tensors) {
        t.validate();
        require(t.name.size() <= UINT16_MAX && t.rows <= UINT32_MAX && t.cols <= UINT32_MAX, Errc::invalid_argument,
                "tensor '" + t.name + "' exceeds container limits");
        m.tensors.push_back({t.name, t.rows, t.cols, t.w_scale, t.scale_vec});
    }
    const Bytes stream = detail::serialize_values(tensors);
    const std::size_t n = chunk_count(stream.size(), plan.chunk_size);
    require(plan.n_chunks == n, Errc::invalid_argument,
            "plan has " + std::to_string(plan.n_chunks) + " chunks, data needs " + std::to_string(n));

    m.chunks.resize(n);
    parallel_for(n, [&](std::size_t i) {
        const std::size_t begin = i * plan.chunk_size;
        const std::size_t len = std::min<std::size_t>(plan.chunk_size, stream.size() - begin);
        m.chunks[i] = detail::encode_chunk({stream.data() + begin, len}, plan.compressed_mask[i] ? Codec::ans : Codec::store);
    });
    return m;
}

// Decodes every chunk, verifies CRCs and rebuilds the tensors. On failure the
// error for the lowest failing chunk index is reported.
inline std::vector<QuantizedTensor> unpack(const CompressedModel& m) {
    const std::uint64_t total = m.raw_bytes();
    require(m.chunks.size() == chunk_count(total, m.chunk_size), Errc::malformed, "DCC1: chunk count mismatch");
    Bytes stream(total);
    std::vector<std::exception_ptr> errors(m.chunks.size());
    parallel_for(m.chunks.size(), [&](std::size_t i) {
        try {
            const auto& c = m.chunks[i];
            const std::uint64_t begin = i * m.chunk_size;
            if (c.uncompressed_len != std::min(m.chunk_size, total - begin)) {
                throw ChunkError(Errc::malformed, i, "unexpected uncompressed length");
            }
            Bytes raw;
            if (c.codec == Codec::store) {
                if (c.payload.size() != c.uncompressed_len) throw ChunkError(Errc::malformed, i, "stored length mismatch");
                raw = c.payload;
            } else {
                try {
                    raw = ans_decompress(c.payload, c.uncompressed_len);
                } catch (const Error& e) {
                    throw ChunkError(e.code(), i, e.what());
                }
            }
            if (crc32_of(raw) != c.checksum) throw ChunkError(Errc::checksum_mismatch, i, "checksum mismatch");
            std::copy(raw.begin(), raw.end(), stream.begin() + static_cast<std::ptrdiff_t>(begin));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<QuantizedTensor> out;
    std::uint64_t pos = 0;
    for (const auto& info : m.tensors) {
        QuantizedTensor q;
        q.name = info.name;
        q.rows = info.rows;
        q.cols = info.cols;
        q.w_scale = info.w_scale;
        q.scale_vec = info.scale_vec;
        q.qvalues.resize(info.bytes());
        for (auto& v : q.qvalues) v = static_cast<std::int8_t>(stream[pos++]);
        try {
            q.validate();
        } catch (const Error& e) {
            fail(Errc::malformed, std::string("DCC1: ") + e.what());
        }
        out.push_back(std::move(q));
    }
    return out;
}

inline std::vector<QuantizedTensor> unpack(std::span<const std::uint8_t> file) { return unpack(parse_container(file)); }

}  // namespace dcomp
