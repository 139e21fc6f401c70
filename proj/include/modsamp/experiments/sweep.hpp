#pragma once

// Monte-Carlo sweep over trials, bit depths and oversampling factors.
//
// Each trial draws one signal (seed + trial index) and, for every OF, runs the
// classical channel, the ideal modulo sampler and one band-limited modulo
// channel (comb when comb_n is set, direct low-pass otherwise). Modulo
// thresholds follow the lambda rule. Trials run on worker threads and land in
// fixed slots, so output order and content do not depend on scheduling.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <numbers>
#include <optional>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "modsamp/adc.hpp"
#include "modsamp/analog_chain.hpp"
#include "modsamp/errors.hpp"
#include "modsamp/metrics.hpp"
#include "modsamp/recovery.hpp"
#include "modsamp/signal_core.hpp"

namespace modsamp {

struct ExperimentConfig {
    std::size_t trials = 100;
    std::vector<int> bits_list{6, 8};
    std::vector<double> of_list{4, 5, 6, 8, 10, 16, 32};
    std::optional<int> comb_n = 2000;
    std::size_t n_terms = 98;
    double nyquist_period = 1e-4;
    double amp_low = -0.5;
    double amp_high = 0.5;
    std::uint64_t seed = 1;
    std::size_t refine = 64;
    double guard = 0.1;
    bool extra_bit = true;
    bool quantize = true;
    std::size_t threads = 1;
    UnwrapMode mode = UnwrapMode::predictive_gated;
    int max_folds_per_step = 4;

    void validate() const {
        if (trials < 1) throw ParameterError("trials must be at least 1");
        if (bits_list.empty()) throw ParameterError("bits list is empty");
        if (of_list.empty()) throw ParameterError("OF list is empty");
        for (int b : bits_list) {
            if (b < 1 || b > 30) throw ParameterError("bits must lie in 1..30");
            if (extra_bit && b < 2) throw ParameterError("the extra bit needs bits >= 2");
        }
        for (double of : of_list)
            if (!(of > 2.0) || !std::isfinite(of)) throw ParameterError("every OF must exceed 2");
        if (comb_n && *comb_n < 0) throw ParameterError("comb_n must be non-negative");
        if (n_terms < 1) throw ParameterError("n_terms must be at least 1");
        if (!(nyquist_period > 0.0)) throw ParameterError("nyquist period must be positive");
        if (!(amp_low < amp_high)) throw ParameterError("amp_low must be below amp_high");
        if (refine < 1) throw ParameterError("refine must be at least 1");
        if (!(guard >= 0.0) || !(guard < 0.5)) throw ParameterError("guard must lie in [0, 0.5)");
        if (max_folds_per_step < 1) throw ParameterError("max_folds_per_step must be at least 1");
        if (needs_flags(mode) && !extra_bit) throw ParameterError("gated recovery needs the extra bit");
    }
};

/// Amplitude of the modulo channel after a quantize-and-pack round trip, with
/// the fold flags the receiver sees.
struct ReceivedChannel {
    SampleSequence samples;
    std::vector<bool> flags;
};

inline ReceivedChannel receive(const SampleSequence& s, const std::vector<bool>& flags, int bits, double half_range,
                               bool extra_bit, bool quantize) {
    if (!quantize) return {s, extra_bit ? flags : std::vector<bool>{}};
    const QuantizerSpec q(bits, half_range);
    const QuantizedSequence words = quantize_sequence(s, flags, q, extra_bit);
    UnpackedSequence back = unpack(words.records, q, extra_bit, s.period(), s.t0());
    return {std::move(back.samples), std::move(back.folds)};
}

struct ModuloRecovery {
    SampleSequence recovered;
    bool warning;
};

/// Unwraps a received modulo channel and removes the unobservable 2 lambda Z
/// offset against the ground truth.
inline ModuloRecovery recover_modulo(const ReceivedChannel& rx, const SampleSequence& truth, double lambda,
                                     UnwrapMode mode, int max_folds) {
    RecoveryConfig rc;
    rc.lambda = lambda;
    rc.mode = mode;
    rc.max_folds_per_step = max_folds;
    const UnwrapResult u = needs_flags(mode) ? unwrap(rx.samples, rx.flags, rc) : unwrap(rx.samples, rc);
    return {remove_congruent_offset(u.values, truth, lambda), u.warning()};
}

/// Error breakdown of one (signal, bits, OF) point from a prepared simulator.
/// `live` is the band-limited modulo channel on the simulator grid.
inline ErrorBreakdown measure_point(const ChannelSimulator& sim, const SampleSequence& live, double inf_norm,
                                    int bits, double of, const ExperimentConfig& cfg, std::size_t trial) {
    const double lam = sim.modulo()->lambda;
    const double cutoff = std::numbers::pi / cfg.nyquist_period;
    const SampleSequence& truth = sim.truth();
    const std::vector<bool>& flags = sim.folds().sample_flags;

    ErrorBreakdown row;
    row.trial = trial;
    row.bits = bits;
    row.of = of;
    row.comb_n = cfg.comb_n;
    row.e_classical_theory = classical_mse_theory(inf_norm, bits, of);
    row.e_mod_q_theory = modulo_q_mse_theory(inf_norm, cfg.extra_bit ? bits - 1 : bits, of);

    const ReceivedChannel classical = receive(truth, {}, bits, inf_norm, false, cfg.quantize);
    row.e_classical_live = filtered_mse(classical.samples, truth, cutoff, cfg.guard);

    std::vector<double> gap(live.size());
    for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = live[i] - sim.ideal()[i];
    row.e_mod_hf = filtered_mse(SampleSequence(std::move(gap), live.period(), live.t0()),
                                SampleSequence(std::vector<double>(live.size(), 0.0), live.period(), live.t0()),
                                cutoff, cfg.guard);

    const ReceivedChannel live_rx = receive(live, flags, bits, lam, cfg.extra_bit, cfg.quantize);
    const ModuloRecovery live_rec = recover_modulo(live_rx, truth, lam, cfg.mode, cfg.max_folds_per_step);
    row.e_mod_live = filtered_mse(live_rec.recovered, truth, cutoff, cfg.guard);

    const ReceivedChannel ideal_rx = receive(sim.ideal(), flags, bits, lam, cfg.extra_bit, cfg.quantize);
    const ModuloRecovery ideal_rec = recover_modulo(ideal_rx, truth, lam, cfg.mode, cfg.max_folds_per_step);
    row.e_mod_ideal_sampler = filtered_mse(ideal_rec.recovered, truth, cutoff, cfg.guard);

    row.recovery_warning = live_rec.warning || ideal_rec.warning;
    return row;
}

/// Signal of trial `trial` under `cfg`.
inline BandlimitedSignal trial_signal(const ExperimentConfig& cfg, std::size_t trial) {
    return generate_random_bl_signal(cfg.n_terms, cfg.nyquist_period, cfg.amp_low, cfg.amp_high,
                                     cfg.seed + static_cast<std::uint64_t>(trial));
}

/// Grid estimate of ||x||_inf over the acquisition window, at the finest
/// dense spacing any OF of the sweep uses.
inline double trial_inf_norm(const BandlimitedSignal& signal, const ExperimentConfig& cfg) {
    const double of_max = *std::max_element(cfg.of_list.begin(), cfg.of_list.end());
    const double step = cfg.nyquist_period / of_max / static_cast<double>(cfg.refine);
    return inf_norm(signal, 0.0, signal.duration(), step);
}

/// All rows of one trial, ordered by bits then OF as listed in the config.
inline std::vector<ErrorBreakdown> run_trial(const ExperimentConfig& cfg, std::size_t trial) {
    const BandlimitedSignal signal = trial_signal(cfg, trial);
    const double norm = trial_inf_norm(signal, cfg);
    const LambdaChoice probe = lambda_rule(norm, cfg.of_list.front());
    if (probe.degenerate) throw ParameterError("trial signal is identically zero");

    std::vector<std::vector<ErrorBreakdown>> by_of;
    for (double of : cfg.of_list) {
        const double ts = cfg.nyquist_period / of;
        const ModuloSpec mod(lambda_rule(norm, of).lambda);
        const ChannelSimulator sim(signal, mod, window_grid(signal, ts), cfg.refine);
        const SampleSequence live = cfg.comb_n ? sim.comb(*cfg.comb_n) : sim.direct_lpf();
        std::vector<ErrorBreakdown> rows;
        for (int bits : cfg.bits_list) rows.push_back(measure_point(sim, live, norm, bits, of, cfg, trial));
        by_of.push_back(std::move(rows));
    }
    std::vector<ErrorBreakdown> out;
    for (std::size_t b = 0; b < cfg.bits_list.size(); ++b)
        for (const auto& rows : by_of) out.push_back(rows[b]);
    return out;
}

/// Runs every trial; rows come out sorted by trial, then bits, then OF in
/// config order, independent of the thread count.
inline std::vector<ErrorBreakdown> run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<ErrorBreakdown>> slots(cfg.trials);
    std::vector<std::exception_ptr> errors(cfg.trials);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t = next++; t < cfg.trials; t = next++) {
            try {
                slots[t] = run_trial(cfg, t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    std::size_t threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    threads = std::min(threads, cfg.trials);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<ErrorBreakdown> rows;
    for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
    return rows;
}

/// Mean and standard error of each error field for one (bits, OF, comb_n).
struct AggregateRow {
    int bits = 0;
    double of = 0.0;
    std::optional<int> comb_n;
    std::size_t trials = 0;
    std::size_t warnings = 0;
    std::array<double, 6> mean{};
    std::array<double, 6> std_error{};
};

inline constexpr std::array<const char*, 6> error_field_names{
    "e_classical_theory", "e_classical_live", "e_mod_q_theory", "e_mod_hf", "e_mod_live", "e_mod_ideal_sampler"};

inline std::array<double, 6> error_fields(const ErrorBreakdown& r) {
    return {r.e_classical_theory, r.e_classical_live, r.e_mod_q_theory, r.e_mod_hf, r.e_mod_live,
            r.e_mod_ideal_sampler};
}

/// Groups rows by (bits, OF, comb_n) in order of first appearance and sums in
/// row order.
inline std::vector<AggregateRow> aggregate(const std::vector<ErrorBreakdown>& rows) {
    using Key = std::tuple<int, double, int>;
    std::map<Key, std::size_t> index;
    std::vector<AggregateRow> out;
    std::vector<std::vector<std::array<double, 6>>> samples;
    for (const ErrorBreakdown& r : rows) {
        const Key key{r.bits, r.of, r.comb_n.value_or(-1)};
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.size()).first;
            out.push_back({r.bits, r.of, r.comb_n, 0, 0, {}, {}});
            samples.emplace_back();
        }
        AggregateRow& agg = out[it->second];
        ++agg.trials;
        if (r.recovery_warning) ++agg.warnings;
        samples[it->second].push_back(error_fields(r));
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
        const auto& s = samples[g];
        const auto n = static_cast<double>(s.size());
        for (std::size_t f = 0; f < 6; ++f) {
            double sum = 0.0;
            for (const auto& v : s) sum += v[f];
            const double mean = sum / n;
            double ss = 0.0;
            for (const auto& v : s) ss += (v[f] - mean) * (v[f] - mean);
            out[g].mean[f] = mean;
            out[g].std_error[f] = s.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        }
    }
    return out;
}

}  // namespace modsamp
