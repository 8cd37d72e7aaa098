#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dcomp {

// Error categories. Container parsing uses the distinct format codes so callers
// (and the CLI exit code mapping) can tell a truncated file from a bad checksum.
enum class Errc {
    invalid_argument,
    dimension_mismatch,
    empty_input,
    zero_dynamic_range,
    corrupt_stream,
    bad_magic,
    unsupported_version,
    checksum_mismatch,
    truncated,
    malformed,
    missing_entry,
    io,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_argument: return "invalid argument";
        case Errc::dimension_mismatch: return "dimension mismatch";
        case Errc::empty_input: return "empty input";
        case Errc::zero_dynamic_range: return "zero dynamic range";
        case Errc::corrupt_stream: return "corrupt stream";
        case Errc::bad_magic: return "bad magic";
        case Errc::unsupported_version: return "unsupported version";
        case Errc::checksum_mismatch: return "checksum mismatch";
        case Errc::truncated: return "truncated";
        case Errc::malformed: return "malformed";
        case Errc::missing_entry: return "missing entry";
        case Errc::io: return "io error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Error raised for a specific chunk of a container; the index is part of the message too.
class ChunkError : public Error {
public:
    ChunkError(Errc code, std::size_t chunk_index, const std::string& what)
        : Error(code, "chunk " + std::to_string(chunk_index) + ": " + what), chunk_index_(chunk_index) {}

    [[nodiscard]] std::size_t chunk_index() const noexcept { return chunk_index_; }

private:
    std::size_t chunk_index_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace dcomp
