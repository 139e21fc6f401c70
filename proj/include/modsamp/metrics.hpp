#pragma once

// Theoretical and measured error quantities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "modsamp/errors.hpp"
#include "modsamp/signal_core.hpp"

namespace modsamp {

/// Per-trial error decomposition, all in squared amplitude units.
struct ErrorBreakdown {
    std::size_t trial = 0;
    int bits = 0;
    double of = 0.0;
    std::optional<int> comb_n;
    double e_classical_theory = 0.0;
    double e_classical_live = 0.0;
    double e_mod_q_theory = 0.0;
    double e_mod_hf = 0.0;
    double e_mod_live = 0.0;
    double e_mod_ideal_sampler = 0.0;
    bool recovery_warning = false;

    friend bool operator==(const ErrorBreakdown&, const ErrorBreakdown&) = default;
};

inline double oversampling_factor(double nyquist_period, double sample_period) {
    if (!(nyquist_period > 0.0) || !(sample_period > 0.0)) throw ParameterError("periods must be positive");
    return nyquist_period / sample_period;
}

struct LambdaChoice {
    double lambda;
    bool degenerate;  // zero input: lambda is 0 and unusable as a threshold
};

/// lambda = ||x||_inf / (OF - 2).
inline LambdaChoice lambda_rule(double inf_norm, double of) {
    if (!(of > 2.0)) throw ParameterError("the lambda rule needs OF > 2");
    if (!(inf_norm >= 0.0) || !std::isfinite(inf_norm)) throw ParameterError("inf_norm must be finite and non-negative");
    if (inf_norm == 0.0) return {0.0, true};
    return {inf_norm / (of - 2.0), false};
}

namespace detail {

inline double levels(int bits) {
    if (bits < 1 || bits > 62) throw ParameterError("bits must lie in 1..62");
    return static_cast<double>((std::int64_t{1} << bits) - 1);
}

}  // namespace detail

/// (1/OF) (1/12) (||x||_inf / (2^b - 1))^2.
inline double classical_mse_theory(double inf_norm, int bits, double of) {
    if (!(of > 0.0)) throw ParameterError("OF must be positive");
    const double step = inf_norm / detail::levels(bits);
    return step * step / (12.0 * of);
}

/// (1/OF) (1 / (12 (2^b - 1)^2)) (||x||_inf / (OF - 2))^2, with b the amplitude
/// bits left after any extra-bit allocation.
inline double modulo_q_mse_theory(double inf_norm, int bits, double of) {
    if (!(of > 2.0)) throw ParameterError("modulo quantization theory needs OF > 2");
    const double lam = inf_norm / (of - 2.0);
    const double l = detail::levels(bits);
    return lam * lam / (12.0 * l * l * of);
}

struct IndexRange {
    std::size_t lo;
    std::size_t hi;  // one past the last index

    std::size_t size() const noexcept { return hi > lo ? hi - lo : 0; }
};

/// Central part of n samples with a fraction `guard` of the span dropped at
/// each end.
inline IndexRange guarded_range(std::size_t n, double guard) {
    if (!(guard >= 0.0) || !(guard < 0.5)) throw ParameterError("guard fraction must lie in [0, 0.5)");
    if (n == 0) throw ParameterError("guarded range of an empty sequence");
    const double span = static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::ceil(guard * span));
    const auto hi = static_cast<std::size_t>(std::floor((1.0 - guard) * span)) + 1;
    return {lo, std::min(hi, n)};
}

/// Mean squared difference over the guarded interior.
inline double guarded_mse(std::span<const double> a, std::span<const double> b, double guard) {
    if (a.size() != b.size()) throw ParameterError("sequences differ in length");
    const IndexRange r = guarded_range(a.size(), guard);
    if (r.size() == 0) throw ParameterError("guarded interior is empty");
    double acc = 0.0;
    for (std::size_t i = r.lo; i < r.hi; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(r.size());
}

inline double guarded_mse(const SampleSequence& a, const SampleSequence& b, double guard) {
    if (!a.same_grid(b)) throw ParameterError("sequences are on different sample grids");
    return guarded_mse(a.values(), b.values(), guard);
}

/// E_mod-HF: guarded mean squared gap between a band-limited modulo channel
/// and the ideal pointwise modulo samples.
inline double mod_hf_mse(const SampleSequence& comb_samples, const SampleSequence& ideal_samples, double guard) {
    return guarded_mse(comb_samples, ideal_samples, guard);
}

/// Guarded MSE of the error after a digital low-pass at `cutoff`. Filtering
/// the difference (rather than the estimate) keeps the truth's own window
/// truncation out of the result.
inline double filtered_mse(const SampleSequence& estimate, const SampleSequence& truth, double cutoff, double guard) {
    if (!estimate.same_grid(truth)) throw ParameterError("sequences are on different sample grids");
    std::vector<double> diff(estimate.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = estimate[i] - truth[i];
    const SampleSequence err(std::move(diff), estimate.period(), estimate.t0());
    const SampleSequence smooth = digital_lowpass(err, cutoff);
    const std::vector<double> zero(smooth.size(), 0.0);
    return guarded_mse(smooth.values(), zero, guard);
}

/// Removes the global 2 lambda Z offset that unwrapping cannot observe: shifts
/// `recovered` by the multiple of 2 lambda nearest the median gap to `truth`.
inline SampleSequence remove_congruent_offset(const SampleSequence& recovered, const SampleSequence& truth,
                                              double lambda) {
    if (!recovered.same_grid(truth)) throw ParameterError("sequences are on different sample grids");
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    if (recovered.empty()) return recovered;
    const double width = 2.0 * lambda;
    std::vector<double> gaps(recovered.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) gaps[i] = (recovered[i] - truth[i]) / width;
    const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    const double shift = width * std::round(*mid);
    std::vector<double> out(recovered.values().begin(), recovered.values().end());
    for (double& v : out) v -= shift;
    return SampleSequence(std::move(out), recovered.period(), recovered.t0());
}

struct DecompositionCheck {
    double relative_gap;
    bool flagged;  // gap above 25%
};

/// |e_mod_live - (e_mod_hf + e_mod_q_theory)| / e_mod_live.
inline DecompositionCheck total_mod_mse_check(const ErrorBreakdown& b) {
    const double model = b.e_mod_hf + b.e_mod_q_theory;
    const double gap = std::abs(b.e_mod_live - model);
    double rel;
    if (b.e_mod_live > 0.0) {
        rel = gap / b.e_mod_live;
    } else {
        rel = gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return {rel, rel > 0.25};
}

/// Least-squares slope of log(mse) against log(of).
inline double loglog_slope(std::span<const double> of_values, std::span<const double> mse_values) {
    if (of_values.size() != mse_values.size()) throw ParameterError("slope inputs differ in length");
    if (of_values.size() < 3) throw ParameterError("slope fit needs at least 3 points");
    const auto n = static_cast<double>(of_values.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < of_values.size(); ++i) {
        if (!(of_values[i] > 0.0) || !(mse_values[i] > 0.0))
            throw ParameterError("slope fit needs positive values");
        mx += std::log(of_values[i]);
        my += std::log(mse_values[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < of_values.size(); ++i) {
        const double dx = std::log(of_values[i]) - mx;
        sxy += dx * (std::log(mse_values[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) throw ParameterError("slope fit needs distinct OF values");
    return sxy / sxx;
}

}  // namespace modsamp
