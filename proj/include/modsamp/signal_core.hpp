#pragma once

// Bandlimited test signals and their sampled / densely rendered forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modsamp/errors.hpp"
#include "modsamp/spectral.hpp"

namespace modsamp {

/// Normalized sinc, sin(pi u) / (pi u), with sinc(0) = 1.
inline double sinc(double u) {
    if (u == 0.0) return 1.0;
    const double a = std::numbers::pi * u;
    return std::sin(a) / a;
}

/// x(t) = sum_{i=1..n} a_i sinc((t - i T) / T): a finite sinc series whose
/// spectrum lies in [-pi/T, pi/T]. T is the Nyquist period.
///
/// The series is defined for every t; `duration` only names the acquisition
/// window [0, duration] used by channel simulations. By default the window is
/// [0, (n + 1) T], on whose end points every sinc term vanishes.
class BandlimitedSignal {
public:
    BandlimitedSignal(std::vector<double> coeffs, double nyquist_period,
                      std::optional<double> duration = std::nullopt)
        : coeffs_(std::move(coeffs)), period_(nyquist_period) {
        if (coeffs_.empty()) throw ParameterError("a bandlimited signal needs at least one term");
        if (!(period_ > 0.0) || !std::isfinite(period_))
            throw ParameterError("nyquist period must be positive and finite");
        for (double a : coeffs_)
            if (!std::isfinite(a)) throw ParameterError("signal coefficients must be finite");
        duration_ = duration.value_or(static_cast<double>(coeffs_.size() + 1) * period_);
        if (!(duration_ > 0.0)) throw ParameterError("signal duration must be positive");
    }

    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::size_t n_terms() const noexcept { return coeffs_.size(); }
    double nyquist_period() const noexcept { return period_; }
    double duration() const noexcept { return duration_; }

    /// Exact series value at time t.
    double operator()(double t) const {
        // sinc(u - i) = (-1)^i sin(pi u) / (pi (u - i)); one sine serves all
        // terms except those close to their centre, which are evaluated
        // directly to keep full relative accuracy there.
        const double u = t / period_;
        const double s = std::sin(std::numbers::pi * u);
        double sum = 0.0;
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            const double i = static_cast<double>(k + 1);
            const double d = u - i;
            if (std::abs(d) < 0.25) {
                sum += coeffs_[k] * sinc(d);
            } else {
                const double sign = ((k + 1) % 2 == 0) ? 1.0 : -1.0;
                sum += coeffs_[k] * sign * s / (std::numbers::pi * d);
            }
        }
        return sum;
    }

private:
    std::vector<double> coeffs_;
    double period_;
    double duration_;
};

inline double evaluate(const BandlimitedSignal& signal, double t) { return signal(t); }

/// Draws n_terms coefficients i.i.d. uniform on [amp_low, amp_high).
///
/// Uses mt19937_64 and an explicit 53-bit mantissa mapping so that the same
/// seed gives bit-identical signals on every standard library.
inline BandlimitedSignal generate_random_bl_signal(std::size_t n_terms, double nyquist_period,
                                                   double amp_low, double amp_high, std::uint64_t seed) {
    if (n_terms < 1) throw ParameterError("n_terms must be at least 1");
    if (!(amp_low < amp_high)) throw ParameterError("amp_low must be below amp_high");
    if (!(nyquist_period > 0.0)) throw ParameterError("nyquist period must be positive");
    std::mt19937_64 gen(seed);
    std::vector<double> coeffs(n_terms);
    for (double& a : coeffs) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        a = amp_low + (amp_high - amp_low) * u;
    }
    return BandlimitedSignal(std::move(coeffs), nyquist_period);
}

/// Size and timing of a dense grid, without values.
struct GridShape {
    std::size_t size;
    double dense_period;
    double t0;
};

/// Uniform high-resolution stand-in for a continuous-time waveform.
class DenseWaveform {
public:
    DenseWaveform(std::vector<double> values, double dense_period, double t0 = 0.0)
        : values_(std::move(values)), period_(dense_period), t0_(t0) {
        if (!(period_ > 0.0)) throw ParameterError("dense period must be positive");
        if (values_.size() < 2) throw ParameterError("a dense waveform needs at least two samples");
    }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double dense_period() const noexcept { return period_; }
    double t0() const noexcept { return t0_; }
    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * period_; }
    double operator[](std::size_t k) const { return values_[k]; }

    GridShape shape() const noexcept { return {values_.size(), period_, t0_}; }

    bool same_grid(const DenseWaveform& other) const noexcept {
        return size() == other.size() && period_ == other.period_ && t0_ == other.t0_;
    }

private:
    std::vector<double> values_;
    double period_;
    double t0_;
};

/// Samples taken every `period` seconds starting at t0.
class SampleSequence {
public:
    SampleSequence(std::vector<double> values, double period, double t0 = 0.0)
        : values_(std::move(values)), period_(period), t0_(t0) {
        if (!(period_ > 0.0)) throw ParameterError("sample period must be positive");
        for (double v : values_)
            if (!std::isfinite(v)) throw ParameterError("sample values must be finite");
    }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double period() const noexcept { return period_; }
    double t0() const noexcept { return t0_; }
    double time(std::size_t n) const noexcept { return t0_ + static_cast<double>(n) * period_; }
    double operator[](std::size_t n) const { return values_[n]; }

    bool same_grid(const SampleSequence& other) const noexcept {
        return size() == other.size() && period_ == other.period_ && t0_ == other.t0_;
    }

private:
    std::vector<double> values_;
    double period_;
    double t0_;
};

/// Time of dense index k on a grid of `refine` points per sample period.
/// Whole-period indices reproduce t0 + n * sample_period bit for bit.
inline double grid_time(double t0, double sample_period, std::size_t refine, std::size_t k) {
    const double whole = static_cast<double>(k / refine) * sample_period;
    const double frac = static_cast<double>(k % refine) * (sample_period / static_cast<double>(refine));
    return t0 + whole + frac;
}

/// Renders `signal` on (n_samples - 1) * refine + 1 points spaced
/// sample_period / refine apart, so that every refine-th point lands on
/// t0 + n * sample_period.
inline DenseWaveform render_dense(const BandlimitedSignal& signal, double sample_period, std::size_t refine,
                                  double t0, std::size_t n_samples) {
    if (refine < 1) throw ParameterError("refine must be at least 1");
    if (n_samples < 2) throw ParameterError("n_samples must be at least 2");
    if (!(sample_period > 0.0)) throw ParameterError("sample period must be positive");
    if (n_samples - 1 > (std::numeric_limits<std::size_t>::max() - 1) / refine)
        throw CapacityError("n_samples * refine overflows");
    const std::size_t count = (n_samples - 1) * refine + 1;
    std::vector<double> values(count);
    for (std::size_t k = 0; k < count; ++k) values[k] = signal(grid_time(t0, sample_period, refine, k));
    return DenseWaveform(std::move(values), sample_period / static_cast<double>(refine), t0);
}

/// Samples of `signal` at t0 + n * period, n = 0..count-1.
inline SampleSequence sample_signal(const BandlimitedSignal& signal, double period, std::size_t count,
                                    double t0 = 0.0) {
    std::vector<double> values(count);
    for (std::size_t n = 0; n < count; ++n) values[n] = signal(t0 + static_cast<double>(n) * period);
    return SampleSequence(std::move(values), period, t0);
}

inline double inf_norm(std::span<const double> values) {
    if (values.empty()) throw ParameterError("inf_norm of an empty sequence");
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

/// Maximum |value| on the dense grid; a grid approximation of the sup-norm.
inline double inf_norm(const DenseWaveform& w) { return inf_norm(w.values()); }
inline double inf_norm(const SampleSequence& s) { return inf_norm(s.values()); }

/// Grid approximation of sup |x(t)| over [t_begin, t_end] with spacing <= step.
inline double inf_norm(const BandlimitedSignal& signal, double t_begin, double t_end, double step) {
    if (!(t_end > t_begin)) throw ParameterError("inf_norm interval is empty");
    if (!(step > 0.0)) throw ParameterError("inf_norm step must be positive");
    const auto intervals = static_cast<std::size_t>(std::ceil((t_end - t_begin) / step));
    const double h = (t_end - t_begin) / static_cast<double>(intervals);
    double m = 0.0;
    for (std::size_t k = 0; k <= intervals; ++k)
        m = std::max(m, std::abs(signal(t_begin + static_cast<double>(k) * h)));
    return m;
}

/// Brick-wall low-pass of a dense waveform (periodic extension).
inline DenseWaveform ideal_lowpass(const DenseWaveform& w, double cutoff) {
    return DenseWaveform(spectral::brickwall(w.values(), w.dense_period(), cutoff), w.dense_period(), w.t0());
}

/// Brick-wall low-pass of a sample sequence (periodic extension).
inline SampleSequence digital_lowpass(const SampleSequence& s, double cutoff) {
    return SampleSequence(spectral::brickwall(s.values(), s.period(), cutoff), s.period(), s.t0());
}

}  // namespace modsamp
