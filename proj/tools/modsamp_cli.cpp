#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "modsamp/modsamp.hpp"

namespace {

using namespace modsamp;

constexpr int exit_ok = 0;
constexpr int exit_parameter = 1;
constexpr int exit_format = 2;

// Loads key=value lines into options of `cmd` that were not given on the
// command line. Keys are long option names without dashes; '_' and '-' are
// interchangeable.
void apply_config_file(CLI::App& cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("--config: cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view s = text::trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        const std::string where = path + " line " + std::to_string(line_no);
        if (eq == std::string_view::npos) throw ParameterError(where + ": expected key=value");
        std::string key(text::trim(s.substr(0, eq)));
        for (char& ch : key)
            if (ch == '_') ch = '-';
        const std::string value(text::trim(s.substr(eq + 1)));
        if (key == "config") throw ParameterError(where + ": config files cannot nest");
        CLI::Option* opt = cmd.get_option_no_throw("--" + key);
        if (!opt) throw ParameterError(where + ": unknown key '" + key + "'");
        if (opt->count() > 0) continue;
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::ParseError& e) {
            throw ParameterError(where + ": " + e.what());
        }
    }
}

std::optional<int> parse_comb_n(const std::string& s) {
    if (s == "none") return std::nullopt;
    int n = 0;
    if (!text::parse_number(s, n) || n < 0) throw ParameterError("--comb-n: expected a count or 'none', got '" + s + "'");
    return n;
}

UnwrapMode parse_mode(const std::string& s) {
    const auto m = parse_unwrap_mode(s);
    if (!m) throw ParameterError("--mode: unknown unwrap mode '" + s + "'");
    return *m;
}

void write_file(const std::filesystem::path& path, const std::string& what, auto&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError(what + ": cannot open " + path.string() + " for writing");
    body(out);
    if (!out) throw ParameterError(what + ": failed writing " + path.string());
}

struct SweepArgs {
    ExperimentConfig cfg;
    std::string comb_n = "2000";
    std::string mode = "predictive_gated";
    std::string out;
    std::string summary;
    std::string config;
};

void setup_sweep(CLI::App& app, SweepArgs& a) {
    auto* cmd = app.add_subcommand("sweep", "Monte-Carlo error sweep over bits and oversampling factors");
    ExperimentConfig& c = a.cfg;
    cmd->add_option("--config", a.config, "key=value file; command-line flags take precedence");
    cmd->add_option("--bits", c.bits_list, "total bits per sample")->delimiter(',')->capture_default_str();
    cmd->add_option("--of", c.of_list, "oversampling factors (each > 2)")->delimiter(',')->capture_default_str();
    cmd->add_option("--trials", c.trials, "signals per point")->capture_default_str();
    cmd->add_option("--comb-n", a.comb_n, "comb harmonics N, or 'none' for the direct low-pass channel")
        ->capture_default_str();
    cmd->add_option("--seed", c.seed, "base seed; trial i uses seed + i")->capture_default_str();
    cmd->add_option("--n-terms", c.n_terms, "sinc terms per signal")->capture_default_str();
    cmd->add_option("--nyquist-period", c.nyquist_period, "Nyquist period T in seconds")->capture_default_str();
    cmd->add_option("--amp-low", c.amp_low, "lower coefficient bound")->capture_default_str();
    cmd->add_option("--amp-high", c.amp_high, "upper coefficient bound")->capture_default_str();
    cmd->add_option("--refine", c.refine, "dense points per sample period for fold detection")
        ->capture_default_str();
    cmd->add_option("--guard", c.guard, "fraction dropped at each end before averaging")->capture_default_str();
    cmd->add_option("--extra-bit", c.extra_bit, "spend one bit on the fold flag (0 or 1)")->capture_default_str();
    cmd->add_option("--quantize", c.quantize, "quantize channels (0 disables quantization)")->capture_default_str();
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--mode", a.mode, "unwrap mode: itoh, extra_bit_gated, predictive_gated")->capture_default_str();
    cmd->add_option("--max-folds", c.max_folds_per_step, "fold-count step clamp")->capture_default_str();
    cmd->add_option("--out", a.out, "results CSV")->required();
    cmd->add_option("--summary", a.summary, "summary CSV (default: <out stem>_summary.csv)");
    cmd->callback([&a, cmd] {
        if (!a.config.empty()) apply_config_file(*cmd, a.config);
        a.cfg.comb_n = parse_comb_n(a.comb_n);
        a.cfg.mode = parse_mode(a.mode);
        a.cfg.validate();
        const std::vector<ErrorBreakdown> rows = run_sweep(a.cfg);
        write_results_csv(rows, std::filesystem::path(a.out));
        const std::filesystem::path summary = a.summary.empty() ? summary_path_for(a.out) : std::filesystem::path(a.summary);
        write_summary_csv(aggregate(rows), summary);
        std::cout << "wrote " << rows.size() << " rows to " << a.out << " and summary to " << summary.string()
                  << '\n';
    });
}

struct SimulateArgs {
    std::uint64_t seed = 1;
    double of = 10.0;
    std::string comb_n = "2000";
    std::size_t n_terms = 98;
    double nyquist_period = 1e-4;
    double amp_low = -0.5;
    double amp_high = 0.5;
    std::size_t refine = 64;
    double lambda = 0.0;
    std::string out_prefix;
    std::string config;
};

void run_simulate(const SimulateArgs& a) {
    if (!(a.of > 2.0)) throw ParameterError("--of must exceed 2");
    const std::optional<int> comb_n = parse_comb_n(a.comb_n);
    const BandlimitedSignal signal =
        generate_random_bl_signal(a.n_terms, a.nyquist_period, a.amp_low, a.amp_high, a.seed);
    const double ts = a.nyquist_period / a.of;
    const double norm = inf_norm(signal, 0.0, signal.duration(), ts / static_cast<double>(a.refine));
    const double lam = a.lambda > 0.0 ? a.lambda : lambda_rule(norm, a.of).lambda;
    const ModuloSpec mod(lam);
    const SampleGrid grid = window_grid(signal, ts);
    const ChannelSimulator sim(signal, mod, grid, a.refine);
    const SampleSequence direct = sim.direct_lpf();
    const SampleSequence live = comb_n ? sim.comb(*comb_n) : direct;

    const DenseWaveform dense = render_dense(signal, ts, a.refine, 0.0, grid.count);
    const FoldedWaveform folded = fold_waveform(dense, mod);
    const DenseWaveform comb = comb_waveform(CombSpec(comb_n.value_or(0), ts), dense.shape());
    const DenseWaveform mixed = mix(comb, folded.folded);

    write_file(a.out_prefix + "_dense.csv", "--out-prefix", [&](std::ostream& out) {
        out << "time,x,folded,comb_mixed,post_lpf,fold_event\n";
        for (std::size_t k = 0; k < dense.size(); ++k) {
            const double t = dense.time(k);
            // The low-passed output is bandlimited to pi/Ts, so its samples
            // determine it everywhere.
            double y = 0.0;
            for (std::size_t n = 0; n < live.size(); ++n) y += live[n] * sinc((t - live.time(n)) / ts);
            out << text::format_double(t) << ',' << text::format_double(dense[k]) << ','
                << text::format_double(folded.folded[k]) << ',' << text::format_double(mixed[k]) << ','
                << text::format_double(y) << ',' << (folded.trace.flags[k] ? 1 : 0) << '\n';
        }
    });
    write_file(a.out_prefix + "_samples.csv", "--out-prefix", [&](std::ostream& out) {
        out << "index,time,truth,ideal_modulo,direct_lpf_modulo,comb_modulo,fold_flag\n";
        for (std::size_t n = 0; n < grid.count; ++n) {
            out << n << ',' << text::format_double(sim.truth().time(n)) << ','
                << text::format_double(sim.truth()[n]) << ',' << text::format_double(sim.ideal()[n]) << ','
                << text::format_double(direct[n]) << ',' << text::format_double(live[n]) << ','
                << (sim.folds().sample_flags[n] ? 1 : 0) << '\n';
        }
    });
    std::cout << "lambda " << text::format_double(lam) << ", " << sim.folds().crossings.size() << " crossings, "
              << grid.count << " samples\n";
    std::cout << "E_mod-HF comb " << text::format_double(mod_hf_mse(live, sim.ideal(), 0.1)) << ", direct "
              << text::format_double(mod_hf_mse(direct, sim.ideal(), 0.1)) << '\n';
}

void setup_simulate(CLI::App& app, SimulateArgs& a) {
    auto* cmd = app.add_subcommand("simulate", "Run one trial and dump dense and sampled waveforms");
    cmd->add_option("--config", a.config, "key=value file; command-line flags take precedence");
    cmd->add_option("--seed", a.seed, "signal seed")->capture_default_str();
    cmd->add_option("--of", a.of, "oversampling factor")->capture_default_str();
    cmd->add_option("--comb-n", a.comb_n, "comb harmonics N, or 'none'")->capture_default_str();
    cmd->add_option("--n-terms", a.n_terms, "sinc terms")->capture_default_str();
    cmd->add_option("--nyquist-period", a.nyquist_period, "Nyquist period T in seconds")->capture_default_str();
    cmd->add_option("--amp-low", a.amp_low, "lower coefficient bound")->capture_default_str();
    cmd->add_option("--amp-high", a.amp_high, "upper coefficient bound")->capture_default_str();
    cmd->add_option("--refine", a.refine, "dense points per sample period")->capture_default_str();
    cmd->add_option("--lambda", a.lambda, "modulo threshold (default: ||x||_inf / (OF - 2))");
    cmd->add_option("--out-prefix", a.out_prefix, "writes <prefix>_dense.csv and <prefix>_samples.csv")
        ->required();
    cmd->callback([&a, cmd] {
        if (!a.config.empty()) apply_config_file(*cmd, a.config);
        run_simulate(a);
    });
}

struct RecoverArgs {
    std::string in;
    std::string mode = "extra_bit_gated";
    RecoverOptions opt;
    std::string out;
    std::string config;
};

void run_recover(const RecoverArgs& a) {
    RecoverOptions opt = a.opt;
    opt.mode = parse_mode(a.mode);
    const CaptureFile capture = read_capture(std::filesystem::path(a.in));
    const CaptureRecovery rec = recover_capture(capture, opt);

    std::printf("%-18s %5s %24s %8s\n", "channel", "lag", "mse_vs_classical", "clamped");
    for (const RecoveredChannel& ch : rec.channels) {
        const std::string mse = ch.mse ? text::format_double(*ch.mse) : std::string("n/a");
        std::printf("%-18s %5td %24s %8zu\n", std::string(to_string(ch.kind)).c_str(), ch.lag, mse.c_str(),
                    ch.clamped_steps);
    }
    if (a.out.empty()) return;
    write_file(a.out, "--out", [&](std::ostream& out) {
        out << "index,time";
        for (const RecoveredChannel& ch : rec.channels) {
            const std::string name(to_string(ch.kind));
            out << ',' << name << "_dequantized," << name << "_unwrapped," << name << "_filtered";
        }
        out << '\n';
        for (std::size_t n = 0; n < capture.samples(); ++n) {
            out << n << ',' << text::format_double(static_cast<double>(n) * capture.ts_seconds);
            for (const RecoveredChannel& ch : rec.channels)
                out << ',' << text::format_double(ch.dequantized[n]) << ',' << text::format_double(ch.unwrapped[n])
                    << ',' << text::format_double(ch.filtered[n]);
            out << '\n';
        }
    });
}

void setup_recover(CLI::App& app, RecoverArgs& a) {
    auto* cmd = app.add_subcommand("recover", "Unwrap, align and low-pass the channels of a capture file");
    cmd->add_option("--config", a.config, "key=value file; command-line flags take precedence");
    cmd->add_option("--in", a.in, "capture file")->required();
    cmd->add_option("--mode", a.mode, "unwrap mode: itoh, extra_bit_gated, predictive_gated")->capture_default_str();
    cmd->add_option("--cutoff-hz", a.opt.cutoff_hz, "digital low-pass cutoff in Hz")->capture_default_str();
    cmd->add_option("--max-lag", a.opt.max_lag, "largest alignment lag in samples")->capture_default_str();
    cmd->add_option("--guard", a.opt.guard, "fraction dropped at each end before averaging")->capture_default_str();
    cmd->add_option("--max-folds", a.opt.max_folds_per_step, "fold-count step clamp")->capture_default_str();
    cmd->add_option("--out", a.out, "recovered waveforms CSV");
    cmd->callback([&a, cmd] {
        if (!a.config.empty()) apply_config_file(*cmd, a.config);
        run_recover(a);
    });
}

struct FixtureArgs {
    FixtureConfig cfg;
    bool no_extra_bit = false;
    std::string out;
    std::string truth_out;
    std::string config;
};

void setup_fixture(CLI::App& app, FixtureArgs& a) {
    auto* cmd = app.add_subcommand("make-fixture", "Write a synthetic four-channel capture file");
    FixtureConfig& c = a.cfg;
    cmd->add_option("--config", a.config, "key=value file; command-line flags take precedence");
    cmd->add_option("--seed", c.seed, "signal seed")->capture_default_str();
    cmd->add_option("--sample-rate-hz", c.sample_rate_hz, "sampling rate")->capture_default_str();
    cmd->add_option("--max-frequency-hz", c.max_frequency_hz, "signal band edge")->capture_default_str();
    cmd->add_option("--n-terms", c.n_terms, "sinc terms")->capture_default_str();
    cmd->add_option("--word-bits", c.word_bits, "bits per word, fold flag included")->capture_default_str();
    cmd->add_flag("--no-extra-bit", a.no_extra_bit, "use every bit for amplitude");
    cmd->add_option("--comb-n", c.comb_n, "comb harmonics N")->capture_default_str();
    cmd->add_option("--lambda-ratio", c.lambda_ratio, "lambda = ||x||_inf / ratio")->capture_default_str();
    cmd->add_option("--comb-delay", c.comb_delay, "comb channel delay in samples")->capture_default_str();
    cmd->add_option("--refine", c.refine, "dense points per sample period")->capture_default_str();
    cmd->add_option("--out", a.out, "capture file")->required();
    cmd->add_option("--truth-out", a.truth_out, "optional CSV of the true samples");
    cmd->callback([&a, cmd] {
        if (!a.config.empty()) apply_config_file(*cmd, a.config);
        a.cfg.extra_bit = !a.no_extra_bit;
        const Fixture f = make_fixture(a.cfg);
        write_capture(f.capture, std::filesystem::path(a.out));
        if (!a.truth_out.empty()) {
            write_file(a.truth_out, "--truth-out", [&](std::ostream& out) {
                out << "index,time,truth\n";
                for (std::size_t n = 0; n < f.truth.size(); ++n)
                    out << n << ',' << text::format_double(f.truth.time(n)) << ','
                        << text::format_double(f.truth[n]) << '\n';
            });
        }
        std::cout << "wrote " << f.capture.samples() << " samples x " << f.capture.channels.size()
                  << " channels to " << a.out << '\n';
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Modulo sampling simulation, measurement and recovery"};
    app.require_subcommand(1);
    SweepArgs sweep;
    SimulateArgs simulate;
    RecoverArgs recover;
    FixtureArgs fixture;
    setup_sweep(app, sweep);
    setup_simulate(app, simulate);
    setup_recover(app, recover);
    setup_fixture(app, fixture);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_parameter;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return exit_format;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_parameter;
    }
    return exit_ok;
}
