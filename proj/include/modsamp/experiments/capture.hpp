#pragma once

// Multi-channel capture files: a key=value header followed by one row of
// integer words per sample instant, one column per channel.
//
//     # comment
//     bits=8
//     ts_seconds=2.0000000000000002e-05
//     lambda=0.123
//     extra_bit=1
//     full_scale=0.37
//     channels=comb_modulo,ideal_modulo,direct_lpf_modulo,classical
//     129 128 131 140
//     ...
//
// `bits` is the word width W. Modulo channels are W-1 bit quantizers over
// [-lambda, lambda] (one of those bits becomes the fold flag when extra_bit is
// set); the classical channel is a W-1 bit quantizer over [-full_scale,
// full_scale] without the flag. Either way each word holds W bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modsamp/adc.hpp"
#include "modsamp/analog_chain.hpp"
#include "modsamp/errors.hpp"
#include "modsamp/experiments/text.hpp"
#include "modsamp/metrics.hpp"
#include "modsamp/recovery.hpp"
#include "modsamp/signal_core.hpp"

namespace modsamp {

struct CaptureFile {
    int bits = 8;
    double ts_seconds = 0.0;
    double lambda = 0.0;
    bool extra_bit = true;
    std::optional<double> full_scale;
    std::vector<ChannelKind> channels;
    std::vector<std::vector<std::uint32_t>> words;  // words[channel][sample]

    std::size_t samples() const noexcept { return words.empty() ? 0 : words.front().size(); }

    void validate() const {
        if (bits < 2 || bits > 31) throw ParameterError("capture word width must lie in 2..31");
        if (extra_bit && bits < 3) throw ParameterError("extra-bit captures need words of at least 3 bits");
        if (!(ts_seconds > 0.0)) throw ParameterError("capture sample period must be positive");
        if (!(lambda > 0.0)) throw ParameterError("capture lambda must be positive");
        if (channels.empty()) throw ParameterError("capture has no channels");
        if (channels.size() != words.size()) throw ParameterError("capture channel list and columns disagree");
        std::set<ChannelKind> seen(channels.begin(), channels.end());
        if (seen.size() != channels.size()) throw ParameterError("capture lists a channel twice");
        if (seen.count(ChannelKind::classical) && !(full_scale && *full_scale > 0.0))
            throw ParameterError("a classical channel needs a positive full_scale");
        const std::uint64_t limit = std::uint64_t{1} << bits;
        for (const auto& col : words) {
            if (col.size() != samples()) throw ParameterError("capture columns differ in length");
            for (std::uint32_t w : col)
                if (w >= limit) throw ParameterError("capture word exceeds the word width");
        }
    }
};

/// Quantizer a capture channel was written with.
inline QuantizerSpec capture_quantizer(const CaptureFile& c, ChannelKind kind) {
    if (kind == ChannelKind::classical) return QuantizerSpec(c.bits - 1, c.full_scale.value());
    return QuantizerSpec(c.bits - 1, c.lambda);
}

inline bool capture_uses_flag(const CaptureFile& c, ChannelKind kind) {
    return c.extra_bit && kind != ChannelKind::classical;
}

inline void write_capture(const CaptureFile& c, std::ostream& out) {
    c.validate();
    out << "bits=" << c.bits << '\n';
    out << "ts_seconds=" << text::format_double(c.ts_seconds) << '\n';
    out << "lambda=" << text::format_double(c.lambda) << '\n';
    out << "extra_bit=" << (c.extra_bit ? 1 : 0) << '\n';
    if (c.full_scale) out << "full_scale=" << text::format_double(*c.full_scale) << '\n';
    out << "channels=";
    for (std::size_t i = 0; i < c.channels.size(); ++i) out << (i ? "," : "") << to_string(c.channels[i]);
    out << '\n';
    for (std::size_t n = 0; n < c.samples(); ++n) {
        for (std::size_t ch = 0; ch < c.words.size(); ++ch) out << (ch ? " " : "") << c.words[ch][n];
        out << '\n';
    }
}

inline void write_capture(const CaptureFile& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
    write_capture(c, out);
    if (!out) throw ParameterError("failed writing " + path.string());
}

inline CaptureFile read_capture(std::istream& in) {
    CaptureFile c;
    std::map<std::string, std::size_t> seen;
    bool body = false;
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t limit = 0;

    const auto require = [&](const char* key) {
        if (!seen.count(key)) throw FormatError(std::string("missing header key '") + key + "'", line_no);
    };
    const auto start_body = [&] {
        for (const char* key : {"bits", "ts_seconds", "lambda", "extra_bit", "channels"}) require(key);
        if (std::count(c.channels.begin(), c.channels.end(), ChannelKind::classical) && !c.full_scale)
            throw FormatError("a classical channel needs a full_scale header", line_no);
        limit = std::uint64_t{1} << c.bits;
        c.words.assign(c.channels.size(), {});
        body = true;
    };

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view s = text::trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        if (!body && eq != std::string_view::npos) {
            const std::string key(text::trim(s.substr(0, eq)));
            const std::string_view value = text::trim(s.substr(eq + 1));
            if (seen.count(key)) throw FormatError("duplicate header key '" + key + "'", line_no);
            seen[key] = line_no;
            if (key == "bits") {
                c.bits = text::require_number<int>(value, "bits", line_no);
                if (c.bits < 2 || c.bits > 31) throw FormatError("bits must lie in 2..31", line_no);
            } else if (key == "ts_seconds") {
                c.ts_seconds = text::require_number<double>(value, "ts_seconds", line_no);
                if (!(c.ts_seconds > 0.0) || !std::isfinite(c.ts_seconds))
                    throw FormatError("ts_seconds must be positive", line_no);
            } else if (key == "lambda") {
                c.lambda = text::require_number<double>(value, "lambda", line_no);
                if (!(c.lambda > 0.0) || !std::isfinite(c.lambda))
                    throw FormatError("lambda must be positive", line_no);
            } else if (key == "extra_bit") {
                const int v = text::require_number<int>(value, "extra_bit", line_no);
                if (v != 0 && v != 1) throw FormatError("extra_bit must be 0 or 1", line_no);
                c.extra_bit = v == 1;
            } else if (key == "full_scale") {
                const double v = text::require_number<double>(value, "full_scale", line_no);
                if (!(v > 0.0) || !std::isfinite(v)) throw FormatError("full_scale must be positive", line_no);
                c.full_scale = v;
            } else if (key == "channels") {
                for (std::string_view name : text::split(value, ',')) {
                    const auto kind = parse_channel_kind(text::trim(name));
                    if (!kind) throw FormatError("unknown channel '" + std::string(text::trim(name)) + "'", line_no);
                    if (std::count(c.channels.begin(), c.channels.end(), *kind))
                        throw FormatError("channel listed twice", line_no);
                    c.channels.push_back(*kind);
                }
                if (c.channels.size() > 4) throw FormatError("at most 4 channels", line_no);
            } else {
                throw FormatError("unknown header key '" + key + "'", line_no);
            }
            continue;
        }
        if (!body) start_body();
        const auto cells = text::fields(s);
        if (cells.size() != c.channels.size())
            throw FormatError("expected " + std::to_string(c.channels.size()) + " words, found " +
                                  std::to_string(cells.size()),
                              line_no);
        for (std::size_t ch = 0; ch < cells.size(); ++ch) {
            const auto w = text::require_number<std::uint64_t>(cells[ch], "word", line_no);
            if (w >= limit)
                throw FormatError("word " + std::to_string(w) + " does not fit " + std::to_string(c.bits) + " bits",
                                  line_no);
            c.words[ch].push_back(static_cast<std::uint32_t>(w));
        }
    }
    if (!body) start_body();
    if (c.extra_bit && c.bits < 3) throw FormatError("extra-bit captures need words of at least 3 bits");
    return c;
}

inline CaptureFile read_capture(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open " + path.string());
    return read_capture(in);
}

/// Settings for a synthetic four-channel capture of a 1 kHz-band signal.
struct FixtureConfig {
    double sample_rate_hz = 50'000.0;
    double max_frequency_hz = 1'000.0;
    std::size_t n_terms = 38;
    double amp_low = -0.5;
    double amp_high = 0.5;
    std::uint64_t seed = 7;
    int word_bits = 8;
    bool extra_bit = true;
    int comb_n = 2000;
    double lambda_ratio = 3.0;  // lambda = ||x||_inf / lambda_ratio
    std::size_t comb_delay = 1;  // samples by which the comb path lags
    std::size_t refine = 64;

    void validate() const {
        if (!(sample_rate_hz > 0.0) || !(max_frequency_hz > 0.0)) throw ParameterError("rates must be positive");
        if (sample_rate_hz <= 2.0 * max_frequency_hz) throw ParameterError("sample rate must exceed twice the band");
        if (n_terms < 1) throw ParameterError("n_terms must be at least 1");
        if (!(amp_low < amp_high)) throw ParameterError("amp_low must be below amp_high");
        if (word_bits < 3 || word_bits > 31) throw ParameterError("word bits must lie in 3..31");
        if (comb_n < 0) throw ParameterError("comb_n must be non-negative");
        if (!(lambda_ratio > 0.0)) throw ParameterError("lambda ratio must be positive");
        if (refine < 1) throw ParameterError("refine must be at least 1");
    }
};

struct Fixture {
    CaptureFile capture;
    BandlimitedSignal signal;
    SampleSequence truth;
};

/// Simulates comb, ideal, direct low-pass and classical channels of one
/// signal and quantizes them into a capture. The comb channel is sampled
/// comb_delay periods late to mimic hardware delay.
inline Fixture make_fixture(const FixtureConfig& cfg) {
    cfg.validate();
    const double nyquist_period = 1.0 / (2.0 * cfg.max_frequency_hz);
    const double ts = 1.0 / cfg.sample_rate_hz;
    const BandlimitedSignal signal =
        generate_random_bl_signal(cfg.n_terms, nyquist_period, cfg.amp_low, cfg.amp_high, cfg.seed);
    const double norm = inf_norm(signal, 0.0, signal.duration(), ts / static_cast<double>(cfg.refine));
    if (!(norm > 0.0)) throw ParameterError("fixture signal is identically zero");
    const ModuloSpec mod(norm / cfg.lambda_ratio);

    const SampleGrid grid = window_grid(signal, ts);
    const ChannelSimulator sim(signal, mod, grid, cfg.refine);
    const SampleGrid late{ts, -static_cast<double>(cfg.comb_delay) * ts, grid.count};
    const ChannelSimulator delayed(signal, mod, late, cfg.refine);

    CaptureFile c;
    c.bits = cfg.word_bits;
    c.ts_seconds = ts;
    c.lambda = mod.lambda;
    c.extra_bit = cfg.extra_bit;
    c.full_scale = norm;
    c.channels = {ChannelKind::comb_modulo, ChannelKind::ideal_modulo, ChannelKind::direct_lpf_modulo,
                  ChannelKind::classical};

    const auto pack = [&](ChannelKind kind, const SampleSequence& s, const std::vector<bool>& flags) {
        const QuantizedSequence q =
            quantize_sequence(s, flags, capture_quantizer(c, kind), capture_uses_flag(c, kind));
        std::vector<std::uint32_t> col;
        col.reserve(q.records.size());
        for (const SampleRecord& r : q.records) col.push_back(r.word);
        return col;
    };
    c.words.push_back(pack(ChannelKind::comb_modulo, delayed.comb(cfg.comb_n), delayed.folds().sample_flags));
    c.words.push_back(pack(ChannelKind::ideal_modulo, sim.ideal(), sim.folds().sample_flags));
    c.words.push_back(pack(ChannelKind::direct_lpf_modulo, sim.direct_lpf(), sim.folds().sample_flags));
    c.words.push_back(pack(ChannelKind::classical, sim.truth(), {}));
    c.validate();
    return {std::move(c), signal, sim.truth()};
}

struct RecoverOptions {
    UnwrapMode mode = UnwrapMode::extra_bit_gated;
    double cutoff_hz = 1000.0;
    std::size_t max_lag = 8;
    double guard = 0.1;
    int max_folds_per_step = 4;
};

struct RecoveredChannel {
    ChannelKind kind;
    SampleSequence dequantized;
    SampleSequence unwrapped;
    SampleSequence filtered;
    std::ptrdiff_t lag = 0;
    std::optional<double> mse;  // against the filtered classical channel
    std::size_t clamped_steps = 0;
};

struct CaptureRecovery {
    std::vector<RecoveredChannel> channels;
};

/// Dequantizes, unwraps and low-passes every channel. When a classical channel
/// is present, each modulo channel is aligned to it by integer lag, shifted by
/// the multiple of 2 lambda that best matches it, and scored by guarded MSE.
inline CaptureRecovery recover_capture(const CaptureFile& c, const RecoverOptions& opt) {
    c.validate();
    if (!(opt.cutoff_hz > 0.0)) throw ParameterError("cutoff must be positive");
    if (needs_flags(opt.mode) && !c.extra_bit) throw ParameterError("gated recovery needs an extra-bit capture");
    const double cutoff = 2.0 * std::numbers::pi * opt.cutoff_hz;

    RecoveryConfig rc;
    rc.lambda = c.lambda;
    rc.mode = opt.mode;
    rc.post_lpf_cutoff = cutoff;
    rc.max_folds_per_step = opt.max_folds_per_step;

    CaptureRecovery out;
    std::optional<SampleSequence> reference;
    for (std::size_t ch = 0; ch < c.channels.size(); ++ch) {
        const ChannelKind kind = c.channels[ch];
        std::vector<SampleRecord> records;
        records.reserve(c.samples());
        for (std::uint32_t w : c.words[ch]) records.push_back({w});
        const UnpackedSequence u =
            unpack(records, capture_quantizer(c, kind), capture_uses_flag(c, kind), c.ts_seconds);
        if (kind == ChannelKind::classical) {
            const Reconstruction r = reconstruct(u.samples, rc);
            reference = r.filtered;
            out.channels.push_back({kind, u.samples, u.samples, r.filtered, 0, std::nullopt, 0});
        } else {
            const UnwrapResult uw = unwrap(u.samples, needs_flags(opt.mode) ? &u.folds : nullptr, rc);
            const Reconstruction r = reconstruct(uw.values, rc);
            out.channels.push_back({kind, u.samples, uw.values, r.filtered, 0, std::nullopt, uw.clamped_steps});
        }
    }
    if (!reference) return out;

    for (RecoveredChannel& rec : out.channels) {
        if (rec.kind == ChannelKind::classical) {
            rec.mse = 0.0;
            continue;
        }
        const AlignedPair a = align_delay(*reference, rec.filtered, opt.max_lag);
        const SampleSequence shifted = remove_congruent_offset(a.aligned, a.reference, c.lambda);
        const double shift = shifted.empty() ? 0.0 : a.aligned[0] - shifted[0];
        const auto apply = [shift](const SampleSequence& s) {
            std::vector<double> v(s.values().begin(), s.values().end());
            for (double& x : v) x -= shift;
            return SampleSequence(std::move(v), s.period(), s.t0());
        };
        rec.unwrapped = apply(rec.unwrapped);
        rec.filtered = apply(rec.filtered);
        rec.lag = a.lag;
        rec.mse = guarded_mse(shifted, a.reference, opt.guard);
    }
    return out;
}

/// MSE between two recovered channels after aligning `b` to `a`.
inline double aligned_mse(const SampleSequence& a, const SampleSequence& b, std::size_t max_lag, double guard) {
    const AlignedPair p = align_delay(a, b, max_lag);
    return guarded_mse(p.aligned, p.reference, guard);
}

}  // namespace modsamp
