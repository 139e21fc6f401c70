#pragma once

// Results table (one row per trial point) and per-group summary as CSV.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "modsamp/errors.hpp"
#include "modsamp/experiments/sweep.hpp"
#include "modsamp/experiments/text.hpp"
#include "modsamp/metrics.hpp"

namespace modsamp {

inline constexpr std::string_view results_header =
    "trial,bits,of,comb_n,e_classical_theory,e_classical_live,e_mod_q_theory,e_mod_hf,e_mod_live,"
    "e_mod_ideal_sampler,recovery_warning";

inline void write_results_csv(const std::vector<ErrorBreakdown>& rows, std::ostream& out) {
    out << results_header << '\n';
    for (const ErrorBreakdown& r : rows) {
        out << r.trial << ',' << r.bits << ',' << text::format_double(r.of) << ','
            << (r.comb_n ? std::to_string(*r.comb_n) : std::string("none"));
        for (double v : error_fields(r)) out << ',' << text::format_double(v);
        out << ',' << (r.recovery_warning ? 1 : 0) << '\n';
    }
}

inline void write_results_csv(const std::vector<ErrorBreakdown>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
    write_results_csv(rows, out);
    if (!out) throw ParameterError("failed writing " + path.string());
}

inline std::vector<ErrorBreakdown> read_results_csv(std::istream& in) {
    std::vector<ErrorBreakdown> rows;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw FormatError("missing header row", 1);
    ++line_no;
    if (text::trim(line) != results_header) throw FormatError("unexpected header row", line_no);
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto cells = text::split(text::trim(line), ',');
        if (cells.size() != 11)
            throw FormatError("expected 11 columns, found " + std::to_string(cells.size()), line_no);
        ErrorBreakdown r;
        r.trial = text::require_number<std::size_t>(cells[0], "trial", line_no);
        r.bits = text::require_number<int>(cells[1], "bits", line_no);
        r.of = text::require_number<double>(cells[2], "of", line_no);
        if (text::trim(cells[3]) != "none") r.comb_n = text::require_number<int>(cells[3], "comb_n", line_no);
        double* targets[] = {&r.e_classical_theory, &r.e_classical_live, &r.e_mod_q_theory,
                             &r.e_mod_hf,           &r.e_mod_live,       &r.e_mod_ideal_sampler};
        for (std::size_t f = 0; f < 6; ++f) {
            *targets[f] = text::require_number<double>(cells[4 + f], error_field_names[f], line_no);
            if (!(*targets[f] >= 0.0)) throw FormatError(std::string(error_field_names[f]) + " is negative", line_no);
        }
        const int warn = text::require_number<int>(cells[10], "recovery_warning", line_no);
        if (warn != 0 && warn != 1) throw FormatError("recovery_warning must be 0 or 1", line_no);
        r.recovery_warning = warn == 1;
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<ErrorBreakdown> read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open " + path.string());
    return read_results_csv(in);
}

inline void write_summary_csv(const std::vector<AggregateRow>& groups, std::ostream& out) {
    out << "bits,of,comb_n,trials,warnings";
    for (const char* name : error_field_names) out << ',' << name << "_mean," << name << "_stderr";
    out << '\n';
    for (const AggregateRow& g : groups) {
        out << g.bits << ',' << text::format_double(g.of) << ','
            << (g.comb_n ? std::to_string(*g.comb_n) : std::string("none")) << ',' << g.trials << ',' << g.warnings;
        for (std::size_t f = 0; f < 6; ++f)
            out << ',' << text::format_double(g.mean[f]) << ',' << text::format_double(g.std_error[f]);
        out << '\n';
    }
}

inline void write_summary_csv(const std::vector<AggregateRow>& groups, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
    write_summary_csv(groups, out);
    if (!out) throw ParameterError("failed writing " + path.string());
}

/// Companion summary path: results.csv -> results_summary.csv.
inline std::filesystem::path summary_path_for(const std::filesystem::path& results) {
    std::filesystem::path p = results;
    const std::string ext = p.has_extension() ? p.extension().string() : std::string(".csv");
    p.replace_filename(p.stem().string() + "_summary" + ext);
    return p;
}

}  // namespace modsamp
