#pragma once

#include <cstdint>
#include <vector>

#include "dcomp/error.hpp"

namespace dcomp {

// Which chunks of the serialized weight stream get entropy coded.
// block_size N >= 1 means the block rule: chunk i is compressed iff (i + 1) % N == 0,
// i.e. the last chunk of every complete block. block_size 0 marks a plan that
// compresses nothing (all-store) or one built from an arbitrary mask.
struct CompressionPlan {
    std::uint64_t chunk_size = 0;
    std::size_t n_chunks = 0;
    std::size_t block_size = 0;
    std::vector<bool> compressed_mask;

    static CompressionPlan block_rule(std::size_t n_chunks, std::uint64_t chunk_size, std::size_t block_size) {
        require(block_size >= 1, Errc::invalid_argument, "block size must be >= 1");
        CompressionPlan p{chunk_size, n_chunks, block_size, std::vector<bool>(n_chunks, false)};
        for (std::size_t i = 0; i < n_chunks; ++i) p.compressed_mask[i] = (i + 1) % block_size == 0;
        return p;
    }

    static CompressionPlan all_compressed(std::size_t n_chunks, std::uint64_t chunk_size) {
        return block_rule(n_chunks, chunk_size, 1);
    }

    static CompressionPlan all_store(std::size_t n_chunks, std::uint64_t chunk_size) {
        return {chunk_size, n_chunks, 0, std::vector<bool>(n_chunks, false)};
    }

    [[nodiscard]] std::size_t compressed_count() const {
        std::size_t n = 0;
        for (bool b : compressed_mask) n += b ? 1 : 0;
        return n;
    }

    [[nodiscard]] double compressed_fraction() const {
        return n_chunks == 0 ? 0.0 : static_cast<double>(compressed_count()) / static_cast<double>(n_chunks);
    }

    void validate() const {
        require(compressed_mask.size() == n_chunks, Errc::invalid_argument,
                "plan: mask length " + std::to_string(compressed_mask.size()) + " != n_chunks " +
                    std::to_string(n_chunks));
        require(chunk_size > 0, Errc::invalid_argument, "plan: chunk size must be positive");
    }

    friend bool operator==(const CompressionPlan&, const CompressionPlan&) = default;
};

inline std::size_t chunk_count(std::uint64_t total_bytes, std::uint64_t chunk_size) {
    require(chunk_size > 0, Errc::invalid_argument, "chunk size must be positive");
    return static_cast<std::size_t>((total_bytes + chunk_size - 1) / chunk_size);
}

}  // namespace dcomp
