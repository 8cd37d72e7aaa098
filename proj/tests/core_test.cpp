#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "support.hpp"

namespace dcomp {
namespace {

using testing::entropy_oracle;

TEST(CompressionRatio, Definition) {
    EXPECT_DOUBLE_EQ(compression_ratio(1000, 500), 2.0);
    EXPECT_DOUBLE_EQ(compression_ratio(1000, 1000), 1.0);
    EXPECT_THROW(compression_ratio(1000, 0), Error);
}

TEST(CompressionRatio, ReportedInt8WeightRatio) {
    // 1540 raw bytes over 1000 compressed: the 1.54 published for INT8 weights of a 1.3B model.
    EXPECT_DOUBLE_EQ(compression_ratio(1540, 1000), 1.54);
}

TEST(CompressionRatio, ChainsMultiplicatively) {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t a = 1 + rng.below(1u << 30);
        const std::uint64_t b = 1 + rng.below(1u << 30);
        const std::uint64_t c = 1 + rng.below(1u << 30);
        EXPECT_LE(testing::rel_diff(compression_ratio(a, b) * compression_ratio(b, c), compression_ratio(a, c)), 1e-12);
    }
}

TEST(Entropy, EquiprobableSymbolsGiveLog2K) {
    for (int k = 1; k <= 256; ++k) {
        Bytes data;
        for (int rep = 0; rep < 3; ++rep) {
            for (int s = 0; s < k; ++s) data.push_back(static_cast<std::uint8_t>(s));
        }
        EXPECT_NEAR(byte_entropy(data), std::log2(static_cast<double>(k)), 1e-9) << "k=" << k;
    }
}

TEST(Entropy, BoundedAndMatchesOracle) {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Bytes data = testing::random_stream(rng, testing::random_length(rng, 1 << 14));
        const double h = byte_entropy(data);
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, 8.0);
        EXPECT_NEAR(h, entropy_oracle(data), 1e-9);
    }
}

TEST(AnalyzeQuantized, AllZeros) {
    const std::vector<std::int8_t> q(1000, 0);
    const auto r = analyze_quantized(q);
    EXPECT_EQ(r.near_zero_fraction, 1.0);
    EXPECT_EQ(r.byte_entropy, 0.0);
    EXPECT_EQ(r.count, 1000u);
}

TEST(AnalyzeQuantized, UnitBandIsNearZero) {
    const std::vector<std::int8_t> q{-1, 0, 1, 1, 0, -1};
    EXPECT_EQ(analyze_quantized(q).near_zero_fraction, 1.0);
    const std::vector<std::int8_t> q2{-2, 0, 2, 1};
    EXPECT_EQ(analyze_quantized(q2).near_zero_fraction, 0.5);
}

TEST(AnalyzeQuantized, EmptyInputThrows) {
    EXPECT_THROW(analyze_quantized(std::span<const std::int8_t>{}), Error);
    EXPECT_THROW(analyze_float(std::span<const double>{}), Error);
}

TEST(AnalyzeQuantized, DiscretizedLaplaceMatchesHistogramOracle) {
    Rng rng(2024);
    std::vector<std::int8_t> q(100000);
    for (auto& v : q) v = static_cast<std::int8_t>(std::clamp(std::round(rng.laplace(8.0)), -127.0, 127.0));
    std::size_t near = 0;
    Bytes bytes;
    for (auto v : q) {
        near += (v >= -1 && v <= 1) ? 1 : 0;
        bytes.push_back(static_cast<std::uint8_t>(v));
    }
    const auto r = analyze_quantized(q);
    EXPECT_NEAR(r.near_zero_fraction, static_cast<double>(near) / 100000.0, 0.01);
    EXPECT_NEAR(r.byte_entropy, entropy_oracle(bytes), 0.01);
    // Laplace(8): P(|X| <= 1.5) = 1 - exp(-1.5/8), about 0.171
    EXPECT_NEAR(r.near_zero_fraction, 1.0 - std::exp(-1.5 / 8.0), 0.01);
}

TEST(AnalyzeQuantized, OutliersUseUpperWhiskerOfMagnitudes) {
    // |v| = {0,1,2,3,4,5,6,7,100}: Q1 = 2, Q3 = 6, whisker = 12
    const std::vector<std::int8_t> q{0, -1, 2, -3, 4, -5, 6, -7, 100};
    const auto r = analyze_quantized(q);
    EXPECT_EQ(r.outlier_count, 1u);
    EXPECT_EQ(r.min, -7.0);
    EXPECT_EQ(r.max, 100.0);
}

TEST(AnalyzeFloat, NearZeroBandAndConstantEntropy) {
    const std::vector<double> v{0.0, 0.005, -0.0099, 0.01, 0.5};
    const auto r = analyze_float(v);
    EXPECT_DOUBLE_EQ(r.near_zero_fraction, 3.0 / 5.0);
    const std::vector<double> c(10, 3.25);
    const auto rc = analyze_float(c);
    EXPECT_EQ(rc.byte_entropy, 0.0);
    EXPECT_EQ(rc.stddev, 0.0);
}

TEST(AnalyzeProperties, PermutationInvariant) {
    Rng rng(5);
    for (int iter = 0; iter < 50; ++iter) {
        const std::size_t n = 1 + rng.below(3000);
        std::vector<double> v(n);
        for (auto& x : v) x = rng.normal(0.0, 0.3);
        std::vector<std::int8_t> q(n);
        for (auto& x : q) x = static_cast<std::int8_t>(static_cast<int>(rng.below(255)) - 127);
        auto vs = v;
        auto qs = q;
        for (std::size_t i = n; i > 1; --i) {
            const auto j = rng.below(i);
            std::swap(vs[i - 1], vs[j]);
            std::swap(qs[i - 1], qs[j]);
        }
        const auto a = analyze_float(v);
        const auto b = analyze_float(vs);
        EXPECT_EQ(a.near_zero_fraction, b.near_zero_fraction);
        EXPECT_EQ(a.byte_entropy, b.byte_entropy);
        EXPECT_EQ(a.min, b.min);
        EXPECT_EQ(a.max, b.max);
        EXPECT_EQ(a.outlier_count, b.outlier_count);
        EXPECT_NEAR(a.mean, b.mean, 1e-12);
        EXPECT_NEAR(a.stddev, b.stddev, 1e-12);
        const auto c = analyze_quantized(q);
        const auto d = analyze_quantized(qs);
        EXPECT_EQ(c.near_zero_fraction, d.near_zero_fraction);
        EXPECT_EQ(c.byte_entropy, d.byte_entropy);
        EXPECT_EQ(c.outlier_count, d.outlier_count);
        EXPECT_NEAR(c.mean, d.mean, 1e-12);
    }
}

TEST(Rng, FixedSequence) {
    // mt19937_64 default-seed 10000th output is fixed by the standard.
    Rng rng(std::mt19937_64::default_seed);
    for (int i = 0; i < 9999; ++i) rng.next_u64();
    EXPECT_EQ(rng.next_u64(), 9981545732273789042ull);
    Rng a(3), b(3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(a.normal()), std::bit_cast<std::uint64_t>(b.normal()));
}

TEST(Rng, UniformAndBelowRanges) {
    Rng rng(9);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        ASSERT_LT(rng.below(7), 7u);
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Synth, DeterministicForSeed) {
    SynthSpec spec;
    spec.rows = 64;
    spec.cols = 48;
    const auto a = synth_ensemble(spec, 123);
    const auto b = synth_ensemble(spec, 123);
    const auto c = synth_ensemble(spec, 124);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.stats, b.stats);
    EXPECT_NE(a.weights, c.weights);
}

TEST(Synth, NoOutliersStaysWithinSixSigma) {
    SynthSpec spec;
    spec.rows = 8;
    spec.cols = 5000;
    spec.outlier_fraction = 0.0;
    const auto s = synth_ensemble(spec, 1).stats;
    for (double m : s.channel_max) {
        EXPECT_GE(m, std::exp(spec.act_mu - 6 * spec.act_sigma));
        EXPECT_LE(m, std::exp(spec.act_mu + 6 * spec.act_sigma));
    }
}

TEST(Synth, DefaultShapeActivationsDwarfWeights) {
    const auto l = synth_ensemble(SynthSpec{}, 42);
    const auto w = analyze_float(l.weights);
    const auto a = analyze_float(l.stats.channel_max);
    EXPECT_LT(std::max(std::fabs(w.min), std::fabs(w.max)), 1.0 + 1e-12);
    EXPECT_GT(a.max - a.min, 10.0 * (w.max - w.min));
    // llround(0.02 * 768) = 15 channels were scaled by 20
    EXPECT_GT(a.outlier_count, 0u);
}

TEST(Synth, InvalidDimensionsThrow) {
    SynthSpec spec;
    spec.rows = 0;
    EXPECT_THROW(synth_ensemble(spec, 1), Error);
}

TEST(Synth, DefaultBlockShapes) {
    const auto specs = default_block_specs(768, 2);
    ASSERT_EQ(specs.size(), 12u);
    EXPECT_EQ(specs[0].name, "block0.q_proj");
    EXPECT_EQ(specs[4].rows, 3072u);
    EXPECT_EQ(specs[5].cols, 3072u);
    EXPECT_EQ(specs[11].name, "block1.fc2");
}

// --- DCWT interchange -----------------------------------------------------------

// Hand-assembled file: "DCW1", v1, one f32 tensor "ab" of 1x2 = {1.0, -2.0}.
const Bytes kGoldenF32 = {'D', 'C', 'W', '1', 0x01, 0x00, 0x01, 0x00, 0x00, 0x00, 0x02, 0x00, 'a', 'b',
                          0x00, 0x01, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00,
                          0x00, 0x00, 0x80, 0x3f,  // 1.0f
                          0x00, 0x00, 0x00, 0xc0};  // -2.0f

TEST(Dcwt, GoldenBytesF32) {
    const WeightTensor t{"ab", 1, 2, {1.0, -2.0}, std::nullopt};
    EXPECT_EQ(write_dcwt({t}, DType::f32), kGoldenF32);
    const auto back = read_dcwt(kGoldenF32);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], t);
}

TEST(Dcwt, GoldenBytesF64AndI8) {
    const WeightTensor t{"x", 1, 1, {0.5}, std::nullopt};
    const Bytes f64 = {'D', 'C', 'W', '1', 1, 0, 1, 0, 0, 0, 1, 0, 'x', 1, 1, 0, 0, 0, 1, 0, 0, 0,
                       0, 0, 0, 0, 0, 0, 0xe0, 0x3f};
    EXPECT_EQ(write_dcwt({t}, DType::f64), f64);
    const WeightTensor i{"q", 1, 3, {-128, 0, 127}, std::nullopt};
    const Bytes i8 = {'D', 'C', 'W', '1', 1, 0, 1, 0, 0, 0, 1, 0, 'q', 2, 1, 0, 0, 0, 3, 0, 0, 0, 0x80, 0x00, 0x7f};
    EXPECT_EQ(write_dcwt({i}, DType::i8), i8);
    EXPECT_EQ(read_dcwt(i8)[0], i);
    EXPECT_THROW(write_dcwt({t}, DType::i8), Error);
}

TEST(Dcwt, RoundTripIsBitExact) {
    Rng rng(3);
    std::vector<WeightTensor> ts;
    for (int i = 0; i < 5; ++i) {
        WeightTensor t{"layer" + std::to_string(i), 1 + rng.below(20), 1 + rng.below(20), {}, std::nullopt};
        for (std::size_t k = 0; k < t.rows * t.cols; ++k) t.values.push_back(rng.normal(0, 1));
        ts.push_back(t);
    }
    EXPECT_EQ(read_dcwt(write_dcwt(ts, DType::f64)), ts);
    // f32 files round-trip exactly at f32 precision
    auto narrowed = ts;
    for (auto& t : narrowed) {
        for (auto& v : t.values) v = static_cast<float>(v);
    }
    EXPECT_EQ(read_dcwt(write_dcwt(ts, DType::f32)), narrowed);
    EXPECT_EQ(read_dcwt(write_dcwt({}, DType::f32)).size(), 0u);
}

TEST(Dcwt, RejectsDamage) {
    auto expect_code = [](Bytes b, Errc code) {
        try {
            read_dcwt(b);
            ADD_FAILURE() << "accepted damaged file";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), code) << e.what();
        }
    };
    Bytes bad = kGoldenF32;
    bad[0] = 'X';
    expect_code(bad, Errc::bad_magic);
    bad = kGoldenF32;
    bad[4] = 2;
    expect_code(bad, Errc::unsupported_version);
    bad = kGoldenF32;
    bad[14] = 9;
    expect_code(bad, Errc::malformed);
    for (std::size_t n = 0; n < kGoldenF32.size(); ++n) {
        EXPECT_THROW(read_dcwt(std::span(kGoldenF32).first(n)), Error) << "prefix " << n;
    }
    bad = kGoldenF32;
    bad.push_back(0);
    expect_code(bad, Errc::malformed);
}

TEST(StatsJson, RoundTripAndErrors) {
    const std::vector<ActivationStats> s{{"a", {1.0, 0.25}}, {"b", {3.5}}};
    const auto text = write_stats_json(s);
    EXPECT_EQ(text, R"({"a":[1.0,0.25],"b":[3.5]})");
    const auto m = read_stats_json(text);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.at("a"), s[0]);
    EXPECT_EQ(m.at("b"), s[1]);
    EXPECT_THROW(read_stats_json("[1,2]"), Error);
    EXPECT_THROW(read_stats_json(R"({"a": [1, "x"]})"), Error);
    EXPECT_THROW(read_stats_json(R"({"a": [-1]})"), Error);
    EXPECT_THROW(read_stats_json("{"), Error);
}

}  // namespace
}  // namespace dcomp
