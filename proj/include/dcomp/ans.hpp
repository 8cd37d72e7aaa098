#pragma once

// Static-table byte-wise rANS over 8-bit symbols.
//
// Stream layout (all little-endian):
//   [384 B] frequency table, 256 x 12-bit entries, two entries per 3 bytes
//   [  4 B] final encoder state
//   [ ...]  renormalization bytes, in the order the decoder consumes them
//
// State x lives in [L, 256 L) with L = 2^20; frequencies sum to M = 2^12.
// Encoding runs back to front so decoding runs front to back. Before encoding
// symbol s, bytes are shifted out while x >= freq[s] << 16.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dcomp/bytes.hpp"
#include "dcomp/error.hpp"

namespace dcomp {

inline constexpr std::uint32_t kAnsScaleBits = 12;
inline constexpr std::uint32_t kAnsTotal = 1u << kAnsScaleBits;
inline constexpr std::uint32_t kAnsLowerBound = 1u << 20;
inline constexpr std::uint32_t kAnsUpperBound = kAnsLowerBound << 8;
inline constexpr std::size_t kAnsTableBytes = 384;
inline constexpr std::size_t kAnsHeaderBytes = kAnsTableBytes + 4;

struct AnsTable {
    // Sum is exactly kAnsTotal; each entry fits in 12 bits, so a lone symbol gets
    // 4095 and one neighbouring slot holds the remaining unit.
    std::array<std::uint16_t, 256> freq{};

    // Largest-remainder normalization of a histogram to kAnsTotal. Every present
    // symbol gets at least 1. Ties break toward the lower symbol value.
    static AnsTable from_histogram(const std::array<std::uint64_t, 256>& counts) {
        std::uint64_t n = 0;
        for (auto c : counts) n += c;
        require(n > 0, Errc::empty_input, "empty input");

        AnsTable t;
        std::array<double, 256> remainder{};
        std::int64_t assigned = 0;
        int present = 0;
        for (int s = 0; s < 256; ++s) {
            if (counts[s] == 0) continue;
            ++present;
            const double exact = static_cast<double>(counts[s]) * kAnsTotal / static_cast<double>(n);
            const double base = std::floor(exact);
            remainder[s] = exact - base;
            t.freq[s] = static_cast<std::uint16_t>(std::max(1.0, base));
            assigned += t.freq[s];
        }

        if (present == 1) {
            const int s = static_cast<int>(std::find_if(counts.begin(), counts.end(), [](auto c) { return c != 0; }) -
                                           counts.begin());
            t.freq.fill(0);
            t.freq[s] = kAnsTotal - 1;
            t.freq[(s + 1) & 255] = 1;
            return t;
        }

        std::array<int, 256> order{};
        for (int s = 0; s < 256; ++s) order[s] = s;
        std::int64_t delta = static_cast<std::int64_t>(kAnsTotal) - assigned;
        if (delta > 0) {
            // Hand out the missing units by largest fractional remainder.
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
            for (std::size_t i = 0; delta > 0; i = (i + 1) % 256) {
                const int s = order[i];
                if (counts[s] == 0) continue;
                ++t.freq[s];
                --delta;
            }
        } else if (delta < 0) {
            // Forced minimums overshot: take units back where rounding gained least.
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] < remainder[b]; });
            for (std::size_t i = 0; delta < 0; i = (i + 1) % 256) {
                const int s = order[i];
                if (t.freq[s] <= 1) continue;
                --t.freq[s];
                ++delta;
            }
        }
        return t;
    }

    void validate() const {
        std::uint32_t sum = 0;
        for (auto f : freq) {
            require(f < kAnsTotal, Errc::corrupt_stream, "corrupt stream: frequency out of range");
            sum += f;
        }
        require(sum == kAnsTotal, Errc::corrupt_stream, "corrupt stream: frequency table does not sum to 4096");
    }

    void serialize(ByteWriter& w) const {
        for (std::size_t i = 0; i < 256; i += 2) {
            const std::uint32_t packed = static_cast<std::uint32_t>(freq[i]) | (static_cast<std::uint32_t>(freq[i + 1]) << 12);
            w.u8(static_cast<std::uint8_t>(packed));
            w.u8(static_cast<std::uint8_t>(packed >> 8));
            w.u8(static_cast<std::uint8_t>(packed >> 16));
        }
    }

    static AnsTable parse(std::span<const std::uint8_t> bytes) {
        require(bytes.size() >= kAnsTableBytes, Errc::corrupt_stream, "corrupt stream: truncated frequency table");
        AnsTable t;
        for (std::size_t i = 0; i < 256; i += 2) {
            const std::size_t o = i / 2 * 3;
            const std::uint32_t packed = bytes[o] | (bytes[o + 1] << 8) | (bytes[o + 2] << 16);
            t.freq[i] = static_cast<std::uint16_t>(packed & 0xFFF);
            t.freq[i + 1] = static_cast<std::uint16_t>(packed >> 12);
        }
        return t;
    }

    [[nodiscard]] std::array<std::uint32_t, 257> cumulative() const {
        std::array<std::uint32_t, 257> cum{};
        for (int s = 0; s < 256; ++s) cum[s + 1] = cum[s] + freq[s];
        return cum;
    }

    friend bool operator==(const AnsTable&, const AnsTable&) = default;
};

struct AnsEncoded {
    AnsTable table;
    Bytes stream;  // table + state + renormalization bytes
};

inline AnsEncoded ans_compress(std::span<const std::uint8_t> data) {
    require(!data.empty(), Errc::empty_input, "empty input");
    std::array<std::uint64_t, 256> counts{};
    for (auto b : data) ++counts[b];
    const AnsTable table = AnsTable::from_histogram(counts);
    const auto cum = table.cumulative();

    // Emitted back to front, reversed at the end.
    Bytes emitted;
    emitted.reserve(data.size() / 2 + 16);
    std::uint32_t x = kAnsLowerBound;
    for (std::size_t i = data.size(); i-- > 0;) {
        const std::uint8_t s = data[i];
        const std::uint32_t f = table.freq[s];
        const std::uint32_t x_max = f << 16;
        while (x >= x_max) {
            emitted.push_back(static_cast<std::uint8_t>(x));
            x >>= 8;
        }
        x = ((x / f) << kAnsScaleBits) + (x % f) + cum[s];
    }

    ByteWriter w;
    table.serialize(w);
    w.u32(x);
    std::reverse(emitted.begin(), emitted.end());
    w.bytes(emitted);
    return {table, w.take()};
}

// Decodes `out_len` symbols coded with `table` from `body` (state + renormalization bytes).
inline Bytes ans_decompress(const AnsTable& table, std::span<const std::uint8_t> body, std::size_t out_len) {
    table.validate();
    require(body.size() >= 4, Errc::corrupt_stream, "corrupt stream: missing state");
    // A symbol costs at least -log2(4095/4096) bits, about 1/2839 bit.
    require(out_len / 2840 / 8 <= body.size() + 4, Errc::corrupt_stream,
            "corrupt stream: output length exceeds what the payload can encode");

    // slot -> freq (bits 0-11) | slot - cum[sym] (bits 12-23) | sym (bits 24-31)
    std::vector<std::uint32_t> slot_table(kAnsTotal);
    std::uint32_t* const slots = slot_table.data();
    {
        std::uint32_t start = 0;
        for (std::uint32_t s = 0; s < 256; ++s) {
            for (std::uint32_t j = 0; j < table.freq[s]; ++j) slots[start + j] = table.freq[s] | (j << 12) | (s << 24);
            start += table.freq[s];
        }
    }

    std::uint32_t x = body[0] | (body[1] << 8) | (body[2] << 16) | (static_cast<std::uint32_t>(body[3]) << 24);
    require(x >= kAnsLowerBound && x < kAnsUpperBound, Errc::corrupt_stream, "corrupt stream: bad initial state");

    const std::uint8_t* in = body.data() + 4;
    const std::uint8_t* const end = body.data() + body.size();
    Bytes out(out_len);
    std::uint8_t* dst = out.data();
    std::uint8_t* const dst_end = dst + out_len;

    // After one step x >= 2^8, so at most two bytes restore x >= L. The fast
    // loop runs while two input bytes remain and skips the bounds checks.
    while (dst != dst_end && end - in >= 2) {
        const std::uint32_t e = slots[x & (kAnsTotal - 1)];
        *dst++ = static_cast<std::uint8_t>(e >> 24);
        x = (e & 0xFFF) * (x >> kAnsScaleBits) + ((e >> 12) & 0xFFF);
        if (x < kAnsLowerBound) {
            x = (x << 8) | *in++;
            if (x < kAnsLowerBound) x = (x << 8) | *in++;
        }
    }
    while (dst != dst_end) {
        const std::uint32_t e = slots[x & (kAnsTotal - 1)];
        *dst++ = static_cast<std::uint8_t>(e >> 24);
        x = (e & 0xFFF) * (x >> kAnsScaleBits) + ((e >> 12) & 0xFFF);
        while (x < kAnsLowerBound) {
            if (in == end) fail(Errc::corrupt_stream, "corrupt stream: payload exhausted");
            x = (x << 8) | *in++;
        }
    }
    // The encoder started from x = L; anything else means the stream was altered.
    require(x == kAnsLowerBound && in == end, Errc::corrupt_stream, "corrupt stream: final state mismatch");
    return out;
}

inline Bytes ans_decompress(std::span<const std::uint8_t> stream, std::size_t out_len) {
    require(stream.size() >= kAnsHeaderBytes, Errc::corrupt_stream, "corrupt stream: shorter than header");
    return ans_decompress(AnsTable::parse(stream), stream.subspan(kAnsTableBytes), out_len);
}

}  // namespace dcomp
