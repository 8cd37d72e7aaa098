#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcomp/ans.hpp"
#include "dcomp/container.hpp"
#include "dcomp/error.hpp"
#include "dcomp/parallel.hpp"

namespace dcomp {

struct BenchRow {
    Codec codec = Codec::store;
    double compression_ratio = 1.0;
    double compress_mbps = 0.0;    // timing, MB = 1e6 bytes
    double decompress_mbps = 0.0;  // timing, one thread
    double parallel_decompress_mbps = 0.0;  // timing, chunks spread over `threads` workers
    std::size_t threads = 1;
};

namespace detail {

template <typename Fn>
double median_seconds(int reps, Fn&& fn) {
    std::vector<double> t;
    for (int i = 0; i < reps; ++i) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

}  // namespace detail

// Throughput of each backend over `data` cut into chunk_size pieces; median
// wall time of `reps` runs. Compression and the first decompression figure are
// single-threaded; the parallel figure decodes chunks concurrently with
// thread_budget() workers. Decoded output is checked against the input.
inline std::vector<BenchRow> bench_codecs(std::span<const std::uint8_t> data, std::uint64_t chunk_size = kDefaultChunkSize,
                                          int reps = 3) {
    require(!data.empty(), Errc::empty_input, "empty input");
    require(reps >= 1, Errc::invalid_argument, "reps must be >= 1");
    const std::size_t n = chunk_count(data.size(), chunk_size);
    auto chunk = [&](std::size_t i) {
        const std::size_t begin = i * chunk_size;
        return data.subspan(begin, std::min<std::size_t>(chunk_size, data.size() - begin));
    };
    const double mb = static_cast<double>(data.size()) / 1e6;
    const std::size_t workers = std::min(thread_budget(), n);
    std::vector<BenchRow> rows;

    {
        std::vector<Bytes> stored(n);
        const double tc = detail::median_seconds(reps, [&] {
            for (std::size_t i = 0; i < n; ++i) stored[i].assign(chunk(i).begin(), chunk(i).end());
        });
        Bytes out(data.size());
        const double td = detail::median_seconds(reps, [&] {
            std::size_t pos = 0;
            for (const auto& s : stored) {
                std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(pos));
                pos += s.size();
            }
        });
        const double tp = detail::median_seconds(reps, [&] {
            parallel_for(n, [&](std::size_t i) {
                std::copy(stored[i].begin(), stored[i].end(), out.begin() + static_cast<std::ptrdiff_t>(i * chunk_size));
            });
        });
        require(std::equal(out.begin(), out.end(), data.begin()), Errc::corrupt_stream, "store round trip failed");
        rows.push_back({Codec::store, 1.0, mb / tc, mb / td, mb / tp, workers});
    }
    {
        std::vector<Bytes> encoded(n);
        const double tc = detail::median_seconds(reps, [&] {
            for (std::size_t i = 0; i < n; ++i) encoded[i] = ans_compress(chunk(i)).stream;
        });
        std::vector<Bytes> decoded(n);
        const double td = detail::median_seconds(reps, [&] {
            for (std::size_t i = 0; i < n; ++i) decoded[i] = ans_decompress(encoded[i], chunk(i).size());
        });
        const double tp = detail::median_seconds(reps, [&] {
            parallel_for(n, [&](std::size_t i) { decoded[i] = ans_decompress(encoded[i], chunk(i).size()); });
        });
        std::uint64_t comp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            comp += encoded[i].size();
            require(std::equal(decoded[i].begin(), decoded[i].end(), chunk(i).begin()), Errc::corrupt_stream,
                    "ans round trip failed");
        }
        rows.push_back({Codec::ans, static_cast<double>(data.size()) / static_cast<double>(comp), mb / tc, mb / td,
                        mb / tp, workers});
    }
    return rows;
}

}  // namespace dcomp
