#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "modsamp/adc.hpp"
#include "modsamp/analog_chain.hpp"

using namespace modsamp;

TEST(Quantize, ZeroIsACode) {
    const Quantized q = quantize(0.0, QuantizerSpec(8, 0.5));
    EXPECT_EQ(q.code, 0);
    EXPECT_EQ(q.value, 0.0);
    EXPECT_FALSE(q.saturated);
}

TEST(Quantize, HalfStepRoundsAwayFromZero) {
    for (int b : {1, 3, 8, 12}) {
        const QuantizerSpec spec(b, 0.8);
        const double d = spec.step();
        EXPECT_EQ(quantize(d / 2, spec).value, d);
        EXPECT_EQ(quantize(-d / 2, spec).value, -d);
    }
}

TEST(Quantize, EightBitExample) {
    const QuantizerSpec spec(8, 0.5);
    const double expected = std::round(0.123 * 255 / 0.5) * (0.5 / 255);
    EXPECT_EQ(quantize(0.123, spec).code, 63);
    EXPECT_NEAR(quantize(0.123, spec).value, expected, 1e-15);
    EXPECT_NEAR(quantize(0.123, spec).value, 0.12353, 1e-5);
}

TEST(Quantize, StepFollowsHalfRangeOverLevels) {
    EXPECT_DOUBLE_EQ(QuantizerSpec(6, 1.0).step(), 1.0 / 63);
    EXPECT_DOUBLE_EQ(QuantizerSpec(6, 1.0, 0.01).step(), 0.01);
    EXPECT_EQ(QuantizerSpec(6, 1.0).max_code(), 63);
}

TEST(Quantize, ErrorBoundMonotonicityAndSaturation) {
    const QuantizerSpec spec(5, 0.3);
    const double d = spec.step();
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    for (int i = -4000; i <= 4000; ++i) {
        const double v = 0.3 * i / 4000.0;
        const Quantized q = quantize(v, spec);
        EXPECT_LE(std::abs(v - q.value), d / 2 * (1 + 1e-12));
        EXPECT_GE(q.code, last);
        EXPECT_FALSE(q.saturated);
        last = q.code;
    }
    const Quantized hi = quantize(0.31 + d, spec);
    EXPECT_TRUE(hi.saturated);
    EXPECT_EQ(hi.code, 31);
    EXPECT_EQ(quantize(-5.0, spec).code, -31);
}

TEST(Quantize, UniformNoiseMatchesStepSquaredOverTwelve) {
    for (int b : {4, 6, 8}) {
        const QuantizerSpec spec(b, 1.0);
        std::mt19937_64 gen(100 + b);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double acc = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double v = u(gen);
            const double e = v - quantize(v, spec).value;
            acc += e * e;
        }
        const double model = spec.step() * spec.step() / 12;
        EXPECT_NEAR(acc / n / model, 1.0, 0.03) << "b=" << b;
    }
}

TEST(Quantize, FoldedInputsNeverSaturate) {
    const double lam = 0.173;
    const QuantizerSpec spec(7, lam);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> folded;
    for (int i = 0; i < 20000; ++i) folded.push_back(modulo_fold(u(gen), ModuloSpec(lam)));
    const QuantizedSequence q = quantize_sequence(SampleSequence(folded, 1.0), {}, spec, false);
    EXPECT_EQ(q.saturated, 0u);
}

TEST(WordFormat, Widths) {
    EXPECT_EQ((WordFormat{6, true}).width(), 8);
    EXPECT_EQ((WordFormat{7, false}).width(), 8);
    EXPECT_EQ(sequence_format(QuantizerSpec(7, 1.0), true).width(), 8);
    EXPECT_EQ(sequence_format(QuantizerSpec(7, 1.0), false).width(), 8);
    EXPECT_THROW(sequence_format(QuantizerSpec(1, 1.0), true), ParameterError);
}

TEST(PackWord, ExhaustiveEightBitRoundTrip) {
    const WordFormat fmt{6, true};
    for (std::uint32_t w = 0; w < 256; ++w) {
        const UnpackedWord u = unpack_word(w, fmt);
        EXPECT_EQ(u.fold, (w & 1U) != 0);
        EXPECT_GE(u.code, -64);
        EXPECT_LE(u.code, 63);
        EXPECT_EQ(pack_word(u.code, u.fold, fmt), w);
    }
    EXPECT_THROW(unpack_word(256, fmt), FormatError);
}

TEST(PackWord, LayoutIsOffsetBinaryAboveTheFlag) {
    const WordFormat fmt{6, true};
    EXPECT_EQ(pack_word(0, false, fmt), 128u);
    EXPECT_EQ(pack_word(0, true, fmt), 129u);
    EXPECT_EQ(pack_word(-63, false, fmt), 2u);
    EXPECT_EQ(pack_word(63, true, fmt), 255u);
    EXPECT_THROW(pack_word(64, false, fmt), ParameterError);
    EXPECT_THROW(pack_word(1, true, WordFormat{6, false}), ParameterError);
}

TEST(QuantizeSequence, ZeroSequenceWithoutExtraBitIsMidScale) {
    const QuantizerSpec spec(8, 1.0);
    const QuantizedSequence q = quantize_sequence(SampleSequence(std::vector<double>(10, 0.0), 1.0), {}, spec, false);
    for (const SampleRecord& r : q.records) EXPECT_EQ(r.word, 256u);
    const UnpackedSequence u = unpack(q.records, spec, false, 1.0);
    for (double v : u.samples.values()) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(u.folds.empty());
}

TEST(QuantizeSequence, AllFlagsSetMakesOddWords) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(300);
    for (double& x : v) x = u(gen);
    const std::vector<bool> flags(v.size(), true);
    const QuantizedSequence q = quantize_sequence(SampleSequence(v, 1.0), flags, QuantizerSpec(8, 1.0), true);
    for (const SampleRecord& r : q.records) EXPECT_EQ(r.word % 2, 1u);
    const UnpackedSequence back = unpack(q.records, QuantizerSpec(8, 1.0), true, 1.0);
    EXPECT_EQ(back.folds, flags);
}

TEST(QuantizeSequence, ExtraBitRoundTripMatchesNarrowQuantizer) {
    const QuantizerSpec spec(7, 0.4);
    const QuantizerSpec narrow(6, 0.4);
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    std::vector<double> v(2000);
    std::vector<bool> flags(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = u(gen);
        flags[i] = (gen() & 1U) != 0;
    }
    const QuantizedSequence q = quantize_sequence(SampleSequence(v, 2e-5, 0.1), flags, spec, true);
    EXPECT_EQ(q.format.width(), 8);
    const UnpackedSequence back = unpack(q.records, spec, true, 2e-5, 0.1);
    EXPECT_EQ(back.folds, flags);
    EXPECT_EQ(back.samples.t0(), 0.1);
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_LT(q.records[i].word, 256u);
        EXPECT_EQ(back.samples[i], quantize(v[i], narrow).value);
    }
}

TEST(QuantizeSequence, WithoutExtraBitUsesAllBits) {
    const QuantizerSpec spec(8, 1.0);
    std::vector<double> v{0.5, -0.25, 0.9};
    const QuantizedSequence q =
        quantize_sequence(SampleSequence(v, 1.0), {true, false, true}, spec, false);
    const UnpackedSequence back = unpack(q.records, spec, false, 1.0);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(back.samples[i], quantize(v[i], spec).value);
}

TEST(QuantizeSequence, LengthMismatch) {
    const SampleSequence s({0.1, 0.2}, 1.0);
    EXPECT_THROW(quantize_sequence(s, {true}, QuantizerSpec(4, 1.0), true), ParameterError);
    EXPECT_THROW(quantize_sequence(s, {true}, QuantizerSpec(4, 1.0), false), ParameterError);
}

TEST(Unpack, RejectsOversizedWords) {
    EXPECT_THROW(unpack({SampleRecord{512}}, QuantizerSpec(8, 1.0), false, 1.0), FormatError);
    EXPECT_THROW(unpack({SampleRecord{256}}, QuantizerSpec(7, 1.0), true, 1.0), FormatError);
}

TEST(QuantizerSpec, Validation) {
    EXPECT_THROW(QuantizerSpec(0, 1.0), ParameterError);
    EXPECT_THROW(QuantizerSpec(4, 0.0), ParameterError);
    EXPECT_THROW(QuantizerSpec(4, 1.0, -1.0), ParameterError);
}
