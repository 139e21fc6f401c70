#pragma once

// Uniform mid-tread quantizer and the extra-bit word format.
//
// A b-bit quantizer has step half_range / (2^b - 1) and codes
// -(2^b - 1) .. 2^b - 1. Codes are stored offset-binary in a (b+1)-bit
// field, field = code + 2^b. With the extra bit enabled the field is shifted
// up by one and bit 0 carries the fold flag:
//
//     word = (field << 1) | fold        (extra bit)
//     word = field                      (no extra bit)
//
// quantize_sequence spends one of its b bits on the flag when the extra bit is
// enabled, so the amplitude is quantized with b - 1 bits and words are b + 1
// bits wide either way.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modsamp/errors.hpp"
#include "modsamp/signal_core.hpp"

namespace modsamp {

struct QuantizerSpec {
    int bits;
    double half_range;
    std::optional<double> step_override;

    QuantizerSpec(int b, double range, std::optional<double> step = std::nullopt)
        : bits(b), half_range(range), step_override(step) {
        if (bits < 1 || bits > 30) throw ParameterError("quantizer bits must lie in 1..30");
        if (!(half_range > 0.0) || !std::isfinite(half_range))
            throw ParameterError("quantizer half range must be positive and finite");
        if (step_override && !(*step_override > 0.0)) throw ParameterError("quantizer step must be positive");
    }

    std::int64_t max_code() const noexcept { return (std::int64_t{1} << bits) - 1; }
    double step() const noexcept { return step_override.value_or(half_range / static_cast<double>(max_code())); }
};

struct Quantized {
    std::int64_t code;
    double value;
    bool saturated;
};

/// round(v / step), ties away from zero, clamped to +-(2^b - 1).
inline Quantized quantize(double v, const QuantizerSpec& spec) {
    const double step = spec.step();
    const double limit = static_cast<double>(spec.max_code());
    double r = std::round(v / step);
    bool saturated = false;
    if (r > limit) {
        r = limit;
        saturated = true;
    } else if (r < -limit) {
        r = -limit;
        saturated = true;
    }
    const auto code = static_cast<std::int64_t>(r);
    return {code, static_cast<double>(code) * step, saturated};
}

inline double dequantize(std::int64_t code, const QuantizerSpec& spec) {
    return static_cast<double>(code) * spec.step();
}

/// Bit layout of one ADC word.
struct WordFormat {
    int amplitude_bits;  // quantizer bits; the code field is one bit wider
    bool extra_bit;

    int field_bits() const noexcept { return amplitude_bits + 1; }
    int width() const noexcept { return field_bits() + (extra_bit ? 1 : 0); }
    std::uint32_t limit() const noexcept { return std::uint32_t{1} << width(); }
};

/// One ADC output word.
struct SampleRecord {
    std::uint32_t word = 0;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

inline std::uint32_t pack_word(std::int64_t code, bool fold, const WordFormat& fmt) {
    const std::int64_t offset = std::int64_t{1} << fmt.amplitude_bits;
    if (code < -offset || code >= offset) throw ParameterError("code does not fit the word's amplitude field");
    if (fold && !fmt.extra_bit) throw ParameterError("fold flag needs the extra bit");
    const auto field = static_cast<std::uint32_t>(code + offset);
    return fmt.extra_bit ? (field << 1) | (fold ? 1U : 0U) : field;
}

struct UnpackedWord {
    std::int64_t code;
    bool fold;
};

inline UnpackedWord unpack_word(std::uint32_t word, const WordFormat& fmt) {
    if (word >= fmt.limit()) throw FormatError("word " + std::to_string(word) + " exceeds " +
                                               std::to_string(fmt.width()) + " bits");
    const std::int64_t offset = std::int64_t{1} << fmt.amplitude_bits;
    const std::uint32_t field = fmt.extra_bit ? word >> 1 : word;
    return {static_cast<std::int64_t>(field) - offset, fmt.extra_bit && (word & 1U) != 0};
}

/// Format of words produced by quantize_sequence for `spec` and `extra_bit`.
inline WordFormat sequence_format(const QuantizerSpec& spec, bool extra_bit) {
    if (extra_bit && spec.bits < 2) throw ParameterError("the extra bit needs at least 2 quantizer bits");
    return {extra_bit ? spec.bits - 1 : spec.bits, extra_bit};
}

/// The quantizer actually applied to amplitudes by quantize_sequence.
inline QuantizerSpec amplitude_quantizer(const QuantizerSpec& spec, bool extra_bit) {
    if (!extra_bit) return spec;
    if (spec.bits < 2) throw ParameterError("the extra bit needs at least 2 quantizer bits");
    return QuantizerSpec(spec.bits - 1, spec.half_range, spec.step_override);
}

struct QuantizedSequence {
    std::vector<SampleRecord> records;
    WordFormat format;
    std::size_t saturated = 0;
};

/// Quantizes every sample and packs it into a word. With the extra bit, the
/// amplitude gets spec.bits - 1 bits and bit 0 carries folds[n]; without it,
/// folds are ignored (and may be empty).
inline QuantizedSequence quantize_sequence(const SampleSequence& s, const std::vector<bool>& folds,
                                           const QuantizerSpec& spec, bool extra_bit) {
    if (extra_bit && folds.size() != s.size()) throw ParameterError("fold flags and samples differ in length");
    if (!extra_bit && !folds.empty() && folds.size() != s.size())
        throw ParameterError("fold flags and samples differ in length");
    const QuantizerSpec q = amplitude_quantizer(spec, extra_bit);
    QuantizedSequence out{{}, sequence_format(spec, extra_bit), 0};
    out.records.reserve(s.size());
    for (std::size_t n = 0; n < s.size(); ++n) {
        const Quantized v = quantize(s[n], q);
        if (v.saturated) ++out.saturated;
        out.records.push_back({pack_word(v.code, extra_bit && folds[n], out.format)});
    }
    return out;
}

struct UnpackedSequence {
    SampleSequence samples;
    std::vector<bool> folds;  // empty without the extra bit
};

/// Inverse of quantize_sequence on the code domain.
inline UnpackedSequence unpack(const std::vector<SampleRecord>& records, const QuantizerSpec& spec, bool extra_bit,
                               double period, double t0 = 0.0) {
    const QuantizerSpec q = amplitude_quantizer(spec, extra_bit);
    const WordFormat fmt = sequence_format(spec, extra_bit);
    std::vector<double> values(records.size());
    std::vector<bool> folds;
    if (extra_bit) folds.assign(records.size(), false);
    for (std::size_t n = 0; n < records.size(); ++n) {
        const UnpackedWord w = unpack_word(records[n].word, fmt);
        values[n] = dequantize(w.code, q);
        if (extra_bit) folds[n] = w.fold;
    }
    return {SampleSequence(std::move(values), period, t0), std::move(folds)};
}

}  // namespace modsamp
