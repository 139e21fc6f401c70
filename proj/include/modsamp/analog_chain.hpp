#pragma once

// Analog front end: centered modulo folding, truncated comb generation,
// mixing, low-pass filtering and the four acquisition channels.
//
// Channel outputs are computed from an exact continuous-time model rather
// than from a dense grid. Writing the folded input as
//
//     M(x)(t) = x(t) - 2 lambda c(t),
//
// where c(t) is the integer fold count, c is a staircase whose steps sit at
// the threshold crossings of x. x is bandlimited below the sampling rate, so
// a brick-wall low-pass at cutoff W leaves x untouched and turns each unit
// step at tau into 1/2 + Si(W (t - tau)) / pi. Mixing with the truncated comb
// sum_{|k|<=N} exp(i 2 pi k t / Ts) and low-passing at pi/Ts, then sampling at
// n Ts, equals low-passing the folded signal at (2N+1) pi/Ts and sampling
// (every shifted band copy lands on the same samples). So every channel
// reduces to folded samples plus a sum of sine-integral residuals over the
// crossing list, for any N.
//
// Crossings are located on a dense grid of `refine` points per sample period
// and polished by bracketing root search on x(t). Pairs of crossings that
// enter and leave a fold boundary between two adjacent dense points are not
// resolved.
//
// The dense-grid mix-then-filter path (comb_waveform, mix, ideal_lowpass) and
// its frequency-domain twin are kept for cross-checks at small N.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "modsamp/errors.hpp"
#include "modsamp/signal_core.hpp"
#include "modsamp/special_functions.hpp"
#include "modsamp/spectral.hpp"

namespace modsamp {

/// Folding threshold lambda: the modulo output lives in [-lambda, lambda).
struct ModuloSpec {
    double lambda;

    explicit ModuloSpec(double threshold) : lambda(threshold) {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive and finite");
    }
};

struct FoldResult {
    double value;        // in [-lambda, lambda)
    std::int64_t count;  // x = value + 2 lambda count
};

/// ((x + lambda) mod 2 lambda) - lambda, together with the integer fold count.
inline FoldResult fold(double x, const ModuloSpec& spec) {
    const double lam = spec.lambda;
    const double width = 2.0 * lam;
    double k = std::floor((x + lam) / width);
    double r = x - width * k;
    // Rounding in the division can leave r a hair outside the half-open range.
    if (r >= lam) {
        r -= width;
        k += 1.0;
    } else if (r < -lam) {
        r += width;
        k -= 1.0;
    }
    return {r, static_cast<std::int64_t>(k)};
}

inline double modulo_fold(double x, const ModuloSpec& spec) { return fold(x, spec).value; }
inline std::int64_t fold_count(double x, const ModuloSpec& spec) { return fold(x, spec).count; }

/// Per-dense-index fold flags: flags[k] is set when the fold count differs
/// between indices k-1 and k.
struct FoldEventTrace {
    std::vector<bool> flags;

    std::size_t size() const noexcept { return flags.size(); }
    std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true)); }
};

struct FoldedWaveform {
    DenseWaveform folded;
    FoldEventTrace trace;
};

inline FoldedWaveform fold_waveform(const DenseWaveform& w, const ModuloSpec& spec) {
    std::vector<double> out(w.size());
    FoldEventTrace trace{std::vector<bool>(w.size(), false)};
    std::int64_t previous = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const FoldResult f = fold(w[k], spec);
        out[k] = f.value;
        if (k > 0 && f.count != previous) trace.flags[k] = true;
        previous = f.count;
    }
    return {DenseWaveform(std::move(out), w.dense_period(), w.t0()), std::move(trace)};
}

/// Truncated comb p(t) = sum_{k=-N..N} exp(i 2 pi k t / Ts).
struct CombSpec {
    int harmonics;
    double period;

    CombSpec(int n, double ts) : harmonics(n), period(ts) {
        if (harmonics < 0) throw ParameterError("comb harmonics must be non-negative");
        if (!(period > 0.0)) throw ParameterError("comb period must be positive");
    }

    /// Cutoff whose low-pass reproduces mixing with this comb followed by an
    /// ideal low-pass at pi/Ts, as seen at the sample instants.
    double equivalent_cutoff() const {
        return (2.0 * static_cast<double>(harmonics) + 1.0) * std::numbers::pi / period;
    }
};

namespace detail {

inline std::size_t points_per_period(double period, double dense_period) {
    const double ratio = period / dense_period;
    const double r = std::round(ratio);
    if (r < 1.0 || std::abs(ratio - r) > 1e-9 * r)
        throw ParameterError("dense grid period must divide the comb period");
    return static_cast<std::size_t>(r);
}

}  // namespace detail

/// The comb evaluated on a dense grid as the Dirichlet kernel
/// sin((2N+1) pi t/Ts) / sin(pi t/Ts); 2N+1 at multiples of Ts.
inline DenseWaveform comb_waveform(const CombSpec& spec, const GridShape& grid) {
    if (grid.size < 2) throw ParameterError("comb grid needs at least two points");
    const std::size_t per = detail::points_per_period(spec.period, grid.dense_period);
    const double start = grid.t0 / spec.period;
    const double start_phase = start - std::floor(start);
    const double order = 2.0 * static_cast<double>(spec.harmonics) + 1.0;
    std::vector<double> values(grid.size);
    for (std::size_t k = 0; k < grid.size; ++k) {
        double phase = start_phase + static_cast<double>(k % per) / static_cast<double>(per);
        phase -= std::round(phase);
        if (std::abs(phase) < 1e-12) {
            values[k] = order;
        } else {
            values[k] = std::sin(order * std::numbers::pi * phase) / std::sin(std::numbers::pi * phase);
        }
    }
    return DenseWaveform(std::move(values), grid.dense_period, grid.t0);
}

/// Pointwise product of two waveforms on the same grid.
inline DenseWaveform mix(const DenseWaveform& a, const DenseWaveform& b) {
    if (!a.same_grid(b)) throw ParameterError("mix requires matching grids");
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
    return DenseWaveform(std::move(out), a.dense_period(), a.t0());
}

enum class ChannelKind { classical, ideal_modulo, direct_lpf_modulo, comb_modulo };

inline std::string_view to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::classical: return "classical";
        case ChannelKind::ideal_modulo: return "ideal_modulo";
        case ChannelKind::direct_lpf_modulo: return "direct_lpf_modulo";
        case ChannelKind::comb_modulo: return "comb_modulo";
    }
    return "unknown";
}

inline std::optional<ChannelKind> parse_channel_kind(std::string_view name) {
    for (ChannelKind k : {ChannelKind::classical, ChannelKind::ideal_modulo, ChannelKind::direct_lpf_modulo,
                          ChannelKind::comb_modulo})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

inline bool is_modulo(ChannelKind kind) { return kind != ChannelKind::classical; }

/// One acquisition channel.
///
/// - classical: pointwise samples of x.
/// - ideal_modulo: pointwise samples of the folded signal.
/// - direct_lpf_modulo: folded signal through a low-pass (pi/Ts by default).
/// - comb_modulo: folded signal mixed with the comb, then low-passed at pi/Ts.
struct ChannelConfig {
    ChannelKind kind = ChannelKind::classical;
    std::optional<ModuloSpec> modulo;
    std::optional<CombSpec> comb;
    double sample_period = 0.0;
    std::optional<double> lpf_cutoff;

    static ChannelConfig classical(double ts) { return {ChannelKind::classical, std::nullopt, std::nullopt, ts, {}}; }
    static ChannelConfig ideal_modulo(ModuloSpec m, double ts) {
        return {ChannelKind::ideal_modulo, m, std::nullopt, ts, {}};
    }
    static ChannelConfig direct_lpf_modulo(ModuloSpec m, double ts) {
        return {ChannelKind::direct_lpf_modulo, m, std::nullopt, ts, std::numbers::pi / ts};
    }
    static ChannelConfig comb_modulo(ModuloSpec m, int harmonics, double ts) {
        return {ChannelKind::comb_modulo, m, CombSpec(harmonics, ts), ts, std::numbers::pi / ts};
    }

    void validate() const {
        if (!(sample_period > 0.0)) throw ParameterError("channel sample period must be positive");
        const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::abs(b); };
        switch (kind) {
            case ChannelKind::classical:
                if (modulo || comb || lpf_cutoff)
                    throw ParameterError("classical channel takes no modulo, comb or low-pass");
                break;
            case ChannelKind::ideal_modulo:
                if (!modulo || comb || lpf_cutoff)
                    throw ParameterError("ideal modulo channel takes a modulo threshold only");
                break;
            case ChannelKind::direct_lpf_modulo:
                if (!modulo || comb || !lpf_cutoff)
                    throw ParameterError("direct low-pass modulo channel needs a threshold and a cutoff, no comb");
                if (!(*lpf_cutoff > 0.0)) throw ParameterError("low-pass cutoff must be positive");
                break;
            case ChannelKind::comb_modulo:
                if (!modulo || !comb || !lpf_cutoff)
                    throw ParameterError("comb modulo channel needs a threshold, a comb and a cutoff");
                if (!near(comb->period, sample_period))
                    throw ParameterError("comb period must equal the sample period");
                if (!near(*lpf_cutoff, std::numbers::pi / sample_period))
                    throw ParameterError("comb channel low-pass must sit at pi/Ts");
                break;
        }
    }
};

/// Sample instants t0 + n * period, n = 0..count-1.
struct SampleGrid {
    double period;
    double t0;
    std::size_t count;
};

/// Sample grid spanning the signal's acquisition window.
inline SampleGrid window_grid(const BandlimitedSignal& signal, double sample_period) {
    if (!(sample_period > 0.0)) throw ParameterError("sample period must be positive");
    const double periods = signal.duration() / sample_period;
    const auto count = static_cast<std::size_t>(std::floor(periods * (1.0 + 1e-12))) + 1;
    if (count < 2) throw ParameterError("sample period longer than the signal window");
    return {sample_period, 0.0, count};
}

struct FoldCrossing {
    double time;
    int direction;  // +1 when the fold count increments
};

/// Fold structure of a signal on one acquisition window.
struct FoldAnalysis {
    double lambda = 0.0;
    std::int64_t initial_count = 0;
    std::vector<FoldCrossing> crossings;
    /// flag n: a fold happened in ((n-1) Ts, n Ts]. Flag 0 is always false.
    std::vector<bool> sample_flags;
    std::size_t dense_events = 0;
};

/// Scans the dense grid for fold-count changes and locates each crossing.
/// Throws ParameterError when a dense step moves the signal by lambda or
/// more (the grid would be too coarse to see every crossing).
inline FoldAnalysis analyze_folds(const BandlimitedSignal& signal, const ModuloSpec& spec, const SampleGrid& grid,
                                  std::size_t refine) {
    if (refine < 1) throw ParameterError("refine must be at least 1");
    if (grid.count < 2) throw ParameterError("sample grid needs at least two instants");
    const std::size_t dense = (grid.count - 1) * refine + 1;
    const double lam = spec.lambda;

    FoldAnalysis out;
    out.lambda = lam;
    out.sample_flags.assign(grid.count, false);

    double t_prev = grid_time(grid.t0, grid.period, refine, 0);
    double x_prev = signal(t_prev);
    std::int64_t c_prev = fold_count(x_prev, spec);
    out.initial_count = c_prev;

    for (std::size_t k = 1; k < dense; ++k) {
        const double t = grid_time(grid.t0, grid.period, refine, k);
        const double x = signal(t);
        if (std::abs(x - x_prev) >= lam)
            throw ParameterError("refine too coarse: a dense step exceeds lambda (increase --refine)");
        const std::int64_t c = fold_count(x, spec);
        if (c != c_prev) {
            ++out.dense_events;
            out.sample_flags[(k + refine - 1) / refine] = true;
            const int direction = c > c_prev ? 1 : -1;
            const double boundary = (2.0 * static_cast<double>(std::max(c, c_prev)) - 1.0) * lam;
            const auto g = [&](double tt) { return signal(tt) - boundary; };
            const double ga = x_prev - boundary;
            const double gb = x - boundary;
            double tau;
            if (ga == 0.0) {
                tau = t_prev;
            } else if (gb == 0.0) {
                tau = t;
            } else {
                std::uintmax_t iters = 100;
                const auto bracket = boost::math::tools::toms748_solve(
                    g, t_prev, t, ga, gb, boost::math::tools::eps_tolerance<double>(50), iters);
                tau = 0.5 * (bracket.first + bracket.second);
            }
            out.crossings.push_back({tau, direction});
        }
        t_prev = t;
        x_prev = x;
        c_prev = c;
    }
    return out;
}

struct ChannelOutput {
    SampleSequence samples;
    std::vector<bool> fold_flags;  // empty for the classical channel
};

/// Simulates the acquisition channels for one signal, threshold and sample
/// grid, sharing the fold analysis between channels.
class ChannelSimulator {
public:
    ChannelSimulator(const BandlimitedSignal& signal, std::optional<ModuloSpec> modulo, const SampleGrid& grid,
                     std::size_t refine = 64)
        : signal_(&signal), modulo_(modulo), grid_(grid),
          truth_(sample_signal(signal, grid.period, grid.count, grid.t0)) {
        if (modulo_) {
            folds_ = analyze_folds(signal, *modulo_, grid, refine);
            std::vector<double> folded(grid.count);
            for (std::size_t n = 0; n < grid.count; ++n) folded[n] = modulo_fold(truth_[n], *modulo_);
            ideal_ = SampleSequence(std::move(folded), grid.period, grid.t0);
        }
    }

    const SampleGrid& grid() const noexcept { return grid_; }
    const SampleSequence& truth() const noexcept { return truth_; }
    const std::optional<ModuloSpec>& modulo() const noexcept { return modulo_; }

    const FoldAnalysis& folds() const {
        require_modulo();
        return *folds_;
    }

    const SampleSequence& ideal() const {
        require_modulo();
        return *ideal_;
    }

    /// Folded signal low-passed at `cutoff` and sampled on the grid.
    SampleSequence lowpassed(double cutoff) const {
        require_modulo();
        check_cutoff(cutoff);
        std::vector<double> out(grid_.count);
        for (std::size_t n = 0; n < grid_.count; ++n)
            out[n] = (*ideal_)[n] - lowpass_correction(grid_.t0 + static_cast<double>(n) * grid_.period, cutoff);
        return SampleSequence(std::move(out), grid_.period, grid_.t0);
    }

    /// The low-passed folded waveform at an arbitrary time t.
    double lowpassed_at(double t, double cutoff) const {
        require_modulo();
        check_cutoff(cutoff);
        return modulo_fold((*signal_)(t), *modulo_) - lowpass_correction(t, cutoff);
    }

    SampleSequence comb(int harmonics) const { return lowpassed(CombSpec(harmonics, grid_.period).equivalent_cutoff()); }
    SampleSequence direct_lpf() const { return lowpassed(std::numbers::pi / grid_.period); }

    ChannelOutput run(const ChannelConfig& cfg) const {
        cfg.validate();
        if (std::abs(cfg.sample_period - grid_.period) > 1e-12 * grid_.period)
            throw ParameterError("channel sample period differs from the simulator grid");
        if (cfg.kind == ChannelKind::classical) return {truth_, {}};
        require_modulo();
        if (cfg.modulo->lambda != modulo_->lambda)
            throw ParameterError("channel threshold differs from the simulator threshold");
        switch (cfg.kind) {
            case ChannelKind::ideal_modulo: return {*ideal_, folds_->sample_flags};
            case ChannelKind::direct_lpf_modulo: return {lowpassed(*cfg.lpf_cutoff), folds_->sample_flags};
            case ChannelKind::comb_modulo: return {comb(cfg.comb->harmonics), folds_->sample_flags};
            case ChannelKind::classical: break;
        }
        return {truth_, {}};
    }

private:
    void require_modulo() const {
        if (!modulo_) throw ParameterError("channel simulator was built without a modulo threshold");
    }

    void check_cutoff(double cutoff) const {
        if (!(cutoff * signal_->nyquist_period() >= std::numbers::pi * (1.0 - 1e-12)))
            throw ParameterError("low-pass cutoff lies inside the signal band");
    }

    // 2 lambda * sum_j direction_j * (Si(W (t - tau_j)) - sign(t - tau_j) pi/2) / pi:
    // the amount by which the low-passed staircase departs from the exact
    // fold count at t.
    double lowpass_correction(double t, double cutoff) const {
        double acc = 0.0;
        for (const FoldCrossing& c : folds_->crossings)
            acc += static_cast<double>(c.direction) * sine_integral_residual(cutoff * (t - c.time));
        return 2.0 * folds_->lambda * acc / std::numbers::pi;
    }

    const BandlimitedSignal* signal_;
    std::optional<ModuloSpec> modulo_;
    SampleGrid grid_;
    SampleSequence truth_;
    std::optional<FoldAnalysis> folds_;
    std::optional<SampleSequence> ideal_;
};

/// Runs one channel over the signal's acquisition window.
inline ChannelOutput run_channel(const BandlimitedSignal& signal, const ChannelConfig& cfg, std::size_t refine = 64) {
    cfg.validate();
    const ChannelSimulator sim(signal, cfg.modulo, window_grid(signal, cfg.sample_period), refine);
    return sim.run(cfg);
}

enum class CombPath { time_domain, alias_sum };

/// Comb channel on a dense grid holding a whole number of sample periods.
///
/// time_domain mixes with comb_waveform and applies ideal_lowpass at pi/Ts;
/// alias_sum adds the folded spectrum shifted by multiples of the sampling
/// rate (|l| <= N) into the baseband. Both work on the periodic extension of
/// the grid, so they agree to rounding for every N; harmonics above half the
/// grid rate alias on the grid.
inline SampleSequence dense_comb_channel(const DenseWaveform& folded, const CombSpec& comb, CombPath path) {
    const std::size_t per = detail::points_per_period(comb.period, folded.dense_period());
    if (folded.size() % per != 0) throw ParameterError("dense grid must hold a whole number of sample periods");
    const std::size_t samples = folded.size() / per;
    std::vector<double> out(samples);

    if (path == CombPath::time_domain) {
        const DenseWaveform mixed = mix(comb_waveform(comb, folded.shape()), folded);
        const DenseWaveform filtered = ideal_lowpass(mixed, std::numbers::pi / comb.period);
        for (std::size_t n = 0; n < samples; ++n) out[n] = filtered[n * per];
        return SampleSequence(std::move(out), comb.period, folded.t0());
    }

    const std::size_t m_total = folded.size();
    std::vector<std::complex<double>> time(m_total);
    for (std::size_t k = 0; k < m_total; ++k) time[k] = folded[k];
    const spectral::Spectrum spec = spectral::complex_transform(time, false);

    const auto wrap = [](std::int64_t i, std::int64_t m) { return static_cast<std::size_t>(((i % m) + m) % m); };
    const auto s = static_cast<std::int64_t>(samples);
    const auto m = static_cast<std::int64_t>(m_total);
    const std::int64_t half = s / 2;
    std::vector<std::complex<double>> baseband(samples, 0.0);
    for (std::int64_t bin = -half; bin <= half; ++bin) {
        std::complex<double> acc = 0.0;
        for (std::int64_t l = -comb.harmonics; l <= comb.harmonics; ++l) acc += spec[wrap(bin - l * s, m)];
        baseband[wrap(bin, s)] += acc;
    }
    const spectral::Spectrum back = spectral::complex_transform(baseband, true);
    const double scale = static_cast<double>(samples) / static_cast<double>(m_total);
    for (std::size_t n = 0; n < samples; ++n) out[n] = back[n].real() * scale;
    return SampleSequence(std::move(out), comb.period, folded.t0());
}

}  // namespace modsamp
