#pragma once

// Unfolding of modulo samples, integer delay alignment and final low-pass
// reconstruction.
//
// Every unwrap mode tracks an integer fold count K[n] and returns
// folded[n] + 2 lambda K[n], so outputs stay congruent to the inputs. The
// first sample is taken as unfolded (K[0] = 0).
//
// - itoh: K steps by round(-d / 2 lambda) where d is the folded first
//   difference. Exact when every true step is below lambda.
// - extra_bit_gated: as itoh, but K only steps where the fold flag is set.
// - predictive_gated: where the fold flag is set, K is chosen so the output
//   lands nearest a linear extrapolation of the recovered samples. A sample
//   spoiled near a fold (band-limited channels ring there) is detected by a
//   five-point quadratic fit and skipped. When the nearest candidate is still
//   far off, the next unflagged sample decides. Flags before sample 3 fall
//   back to itoh forced to a nonzero count. Tolerates true steps above lambda
//   while the signal is locally smooth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modsamp/errors.hpp"
#include "modsamp/signal_core.hpp"

namespace modsamp {

enum class UnwrapMode { itoh, extra_bit_gated, predictive_gated };

inline std::string_view to_string(UnwrapMode mode) {
    switch (mode) {
        case UnwrapMode::itoh: return "itoh";
        case UnwrapMode::extra_bit_gated: return "extra_bit_gated";
        case UnwrapMode::predictive_gated: return "predictive_gated";
    }
    return "unknown";
}

inline std::optional<UnwrapMode> parse_unwrap_mode(std::string_view name) {
    for (UnwrapMode m : {UnwrapMode::itoh, UnwrapMode::extra_bit_gated, UnwrapMode::predictive_gated})
        if (to_string(m) == name) return m;
    return std::nullopt;
}

inline bool needs_flags(UnwrapMode mode) { return mode != UnwrapMode::itoh; }

struct RecoveryConfig {
    double lambda = 1.0;
    UnwrapMode mode = UnwrapMode::itoh;
    std::optional<double> post_lpf_cutoff;
    int max_folds_per_step = 4;

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("recovery lambda must be positive");
        if (max_folds_per_step < 1) throw ParameterError("max_folds_per_step must be at least 1");
        if (post_lpf_cutoff && !(*post_lpf_cutoff > 0.0)) throw ParameterError("recovery cutoff must be positive");
    }
};

struct UnwrapResult {
    SampleSequence values;
    std::vector<std::int64_t> fold_counts;
    std::size_t clamped_steps = 0;

    bool warning() const noexcept { return clamped_steps > 0; }
};

namespace detail {

inline std::int64_t round_to_count(double v) {
    const double r = std::round(v);
    constexpr double bound = 9.0e15;
    if (!(std::abs(r) < bound)) throw ParameterError("fold count out of range");
    return static_cast<std::int64_t>(r);
}

// Residual sum of squares of the least-squares quadratic through v[lo, hi)
// at unit spacing, leaving out index `skip` (out of range keeps all).
inline double quadratic_rss(std::span<const double> v, std::size_t lo, std::size_t hi, std::size_t skip) {
    double tm = 0.0;
    double count = 0.0;
    for (std::size_t j = lo; j < hi; ++j)
        if (j != skip) tm += static_cast<double>(j), count += 1.0;
    tm /= count;
    // Normal equations in (1, u, u^2) with u = j - tm.
    double s[5] = {};
    double r[3] = {};
    for (std::size_t j = lo; j < hi; ++j) {
        if (j == skip) continue;
        const double u = static_cast<double>(j) - tm;
        double p = 1.0;
        for (double& sk : s) sk += p, p *= u;
        r[0] += v[j];
        r[1] += v[j] * u;
        r[2] += v[j] * u * u;
    }
    double a[3][4] = {{s[0], s[1], s[2], r[0]}, {s[1], s[2], s[3], r[1]}, {s[2], s[3], s[4], r[2]}};
    for (int c = 0; c < 3; ++c) {
        int pivot = c;
        for (int k = c + 1; k < 3; ++k)
            if (std::abs(a[k][c]) > std::abs(a[pivot][c])) pivot = k;
        std::swap(a[c], a[pivot]);
        for (int k = 0; k < 3; ++k) {
            if (k == c) continue;
            const double f = a[k][c] / a[c][c];
            for (int m = c; m < 4; ++m) a[k][m] -= f * a[c][m];
        }
    }
    const double c0 = a[0][3] / a[0][0];
    const double c1 = a[1][3] / a[1][1];
    const double c2 = a[2][3] / a[2][2];
    double rss = 0.0;
    for (std::size_t j = lo; j < hi; ++j) {
        if (j == skip) continue;
        const double u = static_cast<double>(j) - tm;
        const double e = v[j] - (c0 + u * (c1 + u * c2));
        rss += e * e;
    }
    return rss;
}

// Absolute fold count at flagged sample i (i >= 3) for predictive_gated.
inline std::int64_t predictive_count(const SampleSequence& folded, const std::vector<bool>& flags,
                                     std::span<const double> v, std::size_t i, double lambda) {
    const double width = 2.0 * lambda;
    if (i < 5) return round_to_count((2.0 * v[i - 1] - v[i - 2] - folded[i]) / width);

    constexpr double spoiled_floor = 0.2;
    constexpr double spoiled_ratio = 0.05;
    constexpr double ambiguous = 0.85;
    const double r0 = quadratic_rss(v, i - 5, i, i);
    const double r1 = quadratic_rss(v, i - 5, i, i - 1);
    const double r2 = quadratic_rss(v, i - 5, i, i - 2);
    int spoiled = 0;
    if (r0 > spoiled_floor * spoiled_floor * lambda * lambda && std::min(r1, r2) < spoiled_ratio * r0)
        spoiled = r1 <= r2 ? 1 : 2;

    // Predictions for samples i and i + 1 that avoid the spoiled sample.
    double p1 = 2.0 * v[i - 1] - v[i - 2];
    double p2 = 3.0 * v[i - 1] - 2.0 * v[i - 2];
    if (spoiled == 1) {
        p1 = 3.0 * v[i - 2] - 2.0 * v[i - 3];
        p2 = 4.0 * v[i - 2] - 3.0 * v[i - 3];
    } else if (spoiled == 2) {
        p1 = 1.5 * v[i - 1] - 0.5 * v[i - 3];
        p2 = 2.0 * v[i - 1] - v[i - 3];
    }
    std::int64_t k = round_to_count((p1 - folded[i]) / width);
    const double miss = folded[i] + width * static_cast<double>(k) - p1;
    if (std::abs(miss) > ambiguous * lambda && i + 1 < folded.size() && !flags[i + 1]) {
        const std::int64_t k2 = round_to_count((p2 - folded[i + 1]) / width);
        const double miss2 = folded[i + 1] + width * static_cast<double>(k2) - p2;
        if (std::abs(miss2) < std::abs(miss)) k = k2;
    }
    return k;
}

}  // namespace detail

/// Unwraps `folded` using fold flags where the mode needs them.
inline UnwrapResult unwrap(const SampleSequence& folded, const std::vector<bool>* flags, const RecoveryConfig& cfg) {
    cfg.validate();
    if (needs_flags(cfg.mode)) {
        if (!flags) throw ParameterError(std::string(to_string(cfg.mode)) + " unwrapping needs fold flags");
        if (flags->size() != folded.size()) throw ParameterError("fold flags and samples differ in length");
    }
    const std::size_t n = folded.size();
    const double width = 2.0 * cfg.lambda;
    const std::int64_t cap = cfg.max_folds_per_step;

    UnwrapResult out{folded, std::vector<std::int64_t>(n, 0), 0};
    std::vector<double> values(folded.values().begin(), folded.values().end());

    for (std::size_t i = 1; i < n; ++i) {
        const std::int64_t previous = out.fold_counts[i - 1];
        const bool flagged = flags && (*flags)[i];
        std::int64_t step = 0;
        switch (cfg.mode) {
            case UnwrapMode::itoh:
            case UnwrapMode::extra_bit_gated:
                if (cfg.mode == UnwrapMode::itoh || flagged)
                    step = detail::round_to_count(-(folded[i] - folded[i - 1]) / width);
                break;
            case UnwrapMode::predictive_gated:
                if (!flagged) break;
                if (i < 3) {
                    const double d = folded[i] - folded[i - 1];
                    step = detail::round_to_count(-d / width);
                    if (step == 0) step = d > 0.0 ? -1 : 1;
                } else {
                    step = detail::predictive_count(folded, *flags, values, i, cfg.lambda) - previous;
                }
                break;
        }
        if (step > cap || step < -cap) {
            step = std::clamp(step, -cap, cap);
            ++out.clamped_steps;
        }
        out.fold_counts[i] = previous + step;
        values[i] = folded[i] + width * static_cast<double>(out.fold_counts[i]);
    }
    out.values = SampleSequence(std::move(values), folded.period(), folded.t0());
    return out;
}

inline UnwrapResult unwrap(const SampleSequence& folded, const RecoveryConfig& cfg) {
    return unwrap(folded, nullptr, cfg);
}

inline UnwrapResult unwrap(const SampleSequence& folded, const std::vector<bool>& flags, const RecoveryConfig& cfg) {
    return unwrap(folded, &flags, cfg);
}

struct AlignedPair {
    std::ptrdiff_t lag = 0;
    SampleSequence reference;
    SampleSequence aligned;
    double correlation = 0.0;
};

namespace detail {

// Pearson correlation of reference[n] with candidate[n + lag] over the
// overlap; nullopt when the overlap is too short or flat.
inline std::optional<double> lagged_correlation(std::span<const double> ref, std::span<const double> cand,
                                                std::ptrdiff_t lag) {
    const auto nr = static_cast<std::ptrdiff_t>(ref.size());
    const auto nc = static_cast<std::ptrdiff_t>(cand.size());
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -lag);
    const std::ptrdiff_t hi = std::min(nr, nc - lag);
    if (hi - lo < 2) return std::nullopt;
    const double count = static_cast<double>(hi - lo);
    double ma = 0.0;
    double mb = 0.0;
    for (std::ptrdiff_t n = lo; n < hi; ++n) {
        ma += ref[static_cast<std::size_t>(n)];
        mb += cand[static_cast<std::size_t>(n + lag)];
    }
    ma /= count;
    mb /= count;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::ptrdiff_t n = lo; n < hi; ++n) {
        const double a = ref[static_cast<std::size_t>(n)] - ma;
        const double b = cand[static_cast<std::size_t>(n + lag)] - mb;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

inline bool has_variance(std::span<const double> v) {
    return !v.empty() && std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); });
}

}  // namespace detail

/// Integer lag in [-max_lag, max_lag] maximizing the normalized
/// cross-correlation of reference[n] and candidate[n + lag]. Ties go to the
/// smaller |lag|, then to the positive lag. Both sequences are trimmed to the
/// common support.
inline AlignedPair align_delay(const SampleSequence& reference, const SampleSequence& candidate,
                               std::size_t max_lag) {
    if (reference.period() != candidate.period()) throw ParameterError("aligned sequences need the same period");
    const std::size_t shortest = std::min(reference.size(), candidate.size());
    if (2 * max_lag >= shortest) throw ParameterError("max_lag must be below half the sequence length");
    if (!detail::has_variance(reference.values()) || !detail::has_variance(candidate.values()))
        throw AlignmentError("cannot align a constant sequence");

    std::optional<double> best;
    std::ptrdiff_t best_lag = 0;
    const auto consider = [&](std::ptrdiff_t lag) {
        const auto c = detail::lagged_correlation(reference.values(), candidate.values(), lag);
        if (c && (!best || *c > *best)) {
            best = c;
            best_lag = lag;
        }
    };
    consider(0);
    for (std::size_t m = 1; m <= max_lag; ++m) {
        consider(static_cast<std::ptrdiff_t>(m));
        consider(-static_cast<std::ptrdiff_t>(m));
    }
    if (!best) throw AlignmentError("no lag gives a defined correlation");

    const auto nr = static_cast<std::ptrdiff_t>(reference.size());
    const auto nc = static_cast<std::ptrdiff_t>(candidate.size());
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -best_lag);
    const std::ptrdiff_t hi = std::min(nr, nc - best_lag);
    std::vector<double> ref(reference.values().begin() + lo, reference.values().begin() + hi);
    std::vector<double> cand(candidate.values().begin() + lo + best_lag, candidate.values().begin() + hi + best_lag);
    const double t0 = reference.time(static_cast<std::size_t>(lo));
    return {best_lag, SampleSequence(std::move(ref), reference.period(), t0),
            SampleSequence(std::move(cand), reference.period(), t0), *best};
}

struct Reconstruction {
    SampleSequence unwrapped;
    SampleSequence filtered;
};

/// Applies the configured digital low-pass to an unwrapped sequence.
inline Reconstruction reconstruct(const SampleSequence& unwrapped, const RecoveryConfig& cfg) {
    cfg.validate();
    if (!cfg.post_lpf_cutoff) throw ParameterError("reconstruction needs a low-pass cutoff");
    return {unwrapped, digital_lowpass(unwrapped, *cfg.post_lpf_cutoff)};
}

}  // namespace modsamp
