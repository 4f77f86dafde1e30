#pragma once

// Cross-validation report CSV, the wall-time companion CSV, and per-channel CSV
// interchange for snapshot data.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "romforge/dataset.hpp"
#include "romforge/error.hpp"
#include "romforge/io/config.hpp"
#include "romforge/io/files.hpp"
#include "romforge/rom/cv.hpp"

namespace romforge::io {

inline const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols{"method",       "fold",          "k",      "channel", "eps_rom",
                                               "eps_proj",     "sqrt_eps_rom", "sqrt_eps_proj", "epochs",
                                               "points"};
    return cols;
}

namespace detail {

inline std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
}

inline std::string fold_label(std::size_t fold) {
    return fold == rom::kFolds ? "mean" : std::to_string(fold);
}

/// Splits CSV text into trimmed cells per nonblank line, keeping 1-based line numbers.
struct CsvLine {
    std::size_t number;
    std::vector<std::string> cells;
};

inline std::vector<CsvLine> csv_lines(const std::string& text) {
    std::vector<CsvLine> out;
    std::istringstream in(text);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (trim(line).empty()) continue;
        out.push_back({no, split(line, ',')});
    }
    return out;
}

}  // namespace detail

/// Deterministic report rows; wall times go to report_timing_csv.
inline std::string report_csv(const rom::CvReport& r) {
    std::string s = detail::join(report_columns());
    for (const rom::CvRow& row : r.rows)
        s += detail::join({row.method, detail::fold_label(row.fold), std::to_string(row.k),
                           r.channel_names.at(row.channel), detail::format_double(row.eps_rom),
                           detail::format_double(row.eps_proj), detail::format_double(row.sqrt_eps_rom),
                           detail::format_double(row.sqrt_eps_proj), detail::format_double(row.epochs),
                           std::to_string(row.points)});
    return s;
}

inline std::string report_timing_csv(const rom::CvReport& r) {
    std::string s = detail::join({"method", "fold", "k", "wall_time_s"});
    for (const rom::CvTiming& t : r.timings)
        s += detail::join({t.method, std::to_string(t.fold), std::to_string(t.k), detail::format_double(t.wall_time_s)});
    return s;
}

inline std::string timing_path(const std::string& report_path) { return report_path + ".timing.csv"; }

inline void write_report(const std::string& path, const rom::CvReport& r) {
    write_file_atomic(path, report_csv(r));
    write_file_atomic(timing_path(path), report_timing_csv(r));
}

/// Parses a report CSV. Channel names are collected in order of first appearance.
inline rom::CvReport parse_report_csv(const std::string& text, const std::string& what = "report") {
    const auto lines = detail::csv_lines(text);
    if (lines.empty()) throw FormatError(what + ": empty report");
    if (lines[0].cells != report_columns())
        throw FormatError(what + ":" + std::to_string(lines[0].number) + ": unexpected header, expected " +
                          detail::join(report_columns()).substr(0, detail::join(report_columns()).size() - 1));
    rom::CvReport r;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [no, c] = lines[i];
        const std::string where = what + ":" + std::to_string(no) + ": ";
        if (c.size() != report_columns().size())
            throw FormatError(where + "expected " + std::to_string(report_columns().size()) + " fields, found " +
                              std::to_string(c.size()));
        rom::CvRow row;
        try {
            row.method = rom::to_string(rom::surrogate_kind_from_string(c[0]));
            row.fold = c[1] == "mean" ? rom::kFolds : static_cast<std::size_t>(detail::parse_u64(c[1]));
            if (row.fold > rom::kFolds) throw ArgumentError("fold " + c[1] + " out of range");
            row.k = static_cast<std::size_t>(detail::parse_u64(c[2]));
            if (c[3].empty()) throw ArgumentError("empty channel name");
            std::size_t ch = 0;
            while (ch < r.channel_names.size() && r.channel_names[ch] != c[3]) ++ch;
            if (ch == r.channel_names.size()) r.channel_names.push_back(c[3]);
            row.channel = ch;
            row.eps_rom = detail::parse_double(c[4]);
            row.eps_proj = detail::parse_double(c[5]);
            row.sqrt_eps_rom = detail::parse_double(c[6]);
            row.sqrt_eps_proj = detail::parse_double(c[7]);
            row.epochs = detail::parse_double(c[8]);
            row.points = static_cast<std::size_t>(detail::parse_u64(c[9]));
        } catch (const ArgumentError& e) {
            throw FormatError(where + e.what());
        }
        r.rows.push_back(row);
    }
    if (r.rows.empty()) throw FormatError(what + ": report has no rows");
    return r;
}

inline rom::CvReport read_report(const std::string& path) { return parse_report_csv(read_file(path), path); }

/// One channel as CSV: a header row whose cells are the design points (components joined
/// by ';'), then one row per state entry.
inline std::string channel_csv(const Dataset& d, std::size_t c) {
    d.validate();
    std::vector<std::string> header;
    for (const auto& mu : d.params) {
        std::string cell;
        for (std::size_t j = 0; j < mu.size(); ++j) cell += (j ? ";" : "") + detail::format_double(mu[j]);
        header.push_back(cell);
    }
    std::string s = detail::join(header);
    const Eigen::MatrixXd& m = d.channels.at(c);
    std::vector<std::string> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = detail::format_double(m(i, j));
        s += detail::join(row);
    }
    return s;
}

/// Builds a dataset from per-channel CSV texts (see channel_csv). Every file must carry
/// the same header. ny = nx = 0 marks unstructured data.
inline Dataset dataset_from_channel_csvs(const std::vector<std::string>& texts, const std::vector<std::string>& names,
                                         std::size_t ny, std::size_t nx) {
    if (texts.empty()) throw ArgumentError("import needs at least one channel file");
    Dataset d;
    d.ny = ny;
    d.nx = nx;
    for (std::size_t c = 0; c < texts.size(); ++c) {
        const std::string& what = names.at(c);
        const auto lines = detail::csv_lines(texts[c]);
        if (lines.size() < 2) throw FormatError(what + ": needs a header row and at least one state row");
        std::vector<std::vector<double>> params;
        for (const std::string& cell : lines[0].cells) {
            std::vector<double> mu;
            try {
                for (const std::string& v : detail::split(cell, ';')) mu.push_back(detail::parse_double(v));
            } catch (const ArgumentError& e) {
                throw FormatError(what + ":" + std::to_string(lines[0].number) + ": " + e.what());
            }
            params.push_back(std::move(mu));
        }
        if (c == 0) {
            d.params = params;
        } else if (params != d.params) {
            throw FormatError(what + ":" + std::to_string(lines[0].number) + ": design header differs from " + names[0]);
        }
        const auto n = static_cast<Eigen::Index>(params.size());
        Eigen::MatrixXd m(static_cast<Eigen::Index>(lines.size() - 1), n);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto& [no, cells] = lines[i];
            if (static_cast<Eigen::Index>(cells.size()) != n)
                throw FormatError(what + ":" + std::to_string(no) + ": expected " + std::to_string(n) + " values, found " +
                                  std::to_string(cells.size()));
            for (Eigen::Index j = 0; j < n; ++j) {
                try {
                    m(static_cast<Eigen::Index>(i - 1), j) = detail::parse_double(cells[static_cast<std::size_t>(j)]);
                } catch (const ArgumentError& e) {
                    throw FormatError(what + ":" + std::to_string(no) + ": " + e.what());
                }
            }
        }
        d.channels.push_back(std::move(m));
    }
    try {
        d.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("imported data: ") + e.what());
    }
    return d;
}

}  // namespace romforge::io
