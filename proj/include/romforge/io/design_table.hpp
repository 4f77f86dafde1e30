#pragma once

// Design table: a '#' header naming the dimensions, then one whitespace-separated row of
// parameter values per sample.

#include <sstream>
#include <string>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/io/config.hpp"
#include "romforge/io/files.hpp"

namespace romforge::io {

inline std::string design_table(const std::vector<std::vector<double>>& design, const std::vector<std::string>& names) {
    if (design.empty()) throw ArgumentError("design table is empty");
    const std::size_t p = design.front().size();
    std::string s = "#";
    for (std::size_t d = 0; d < p; ++d) s += " " + (d < names.size() ? names[d] : "mu" + std::to_string(d + 1));
    s += "\n";
    for (const auto& row : design) {
        if (row.size() != p) throw ArgumentError("design rows have inconsistent dimension");
        for (std::size_t d = 0; d < p; ++d) s += (d ? " " : "") + detail::format_double(row[d]);
        s += "\n";
    }
    return s;
}

inline void write_design_table(const std::string& path, const std::vector<std::vector<double>>& design,
                               const std::vector<std::string>& names) {
    write_file_atomic(path, design_table(design, names));
}

/// Rows of a design table; '#' lines and blank lines are skipped.
inline std::vector<std::vector<double>> parse_design_table(const std::string& text, const std::string& what = "design table") {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        const std::string body = detail::trim(line);
        if (body.empty() || body[0] == '#') continue;
        std::istringstream ls(body);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            try {
                row.push_back(detail::parse_double(tok));
            } catch (const ArgumentError& e) {
                throw FormatError(what + ":" + std::to_string(no) + ": " + e.what());
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError(what + ":" + std::to_string(no) + ": expected " + std::to_string(rows.front().size()) +
                              " values, found " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError(what + ": no design rows");
    return rows;
}

inline std::vector<std::vector<double>> read_design_table(const std::string& path) {
    return parse_design_table(read_file(path), path);
}

}  // namespace romforge::io
