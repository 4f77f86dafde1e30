#pragma once

// Error-versus-k plots from a cross-validation report: one SVG per channel with the
// all-fold mean prediction and projection errors of each method on a log10 y axis.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/io/config.hpp"
#include "romforge/io/files.hpp"
#include "romforge/rom/cv.hpp"

namespace romforge::io {

struct Series {
    std::string label;
    std::string color;
    std::string dash;  ///< stroke-dasharray, empty for solid
    std::vector<std::pair<double, double>> points;  ///< (k, error), sorted by k
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace detail

/// Series of one channel, in the order pod rom, pod proj, cae rom, cae proj (methods
/// without mean rows are skipped).
inline std::vector<Series> channel_series(const rom::CvReport& r, std::size_t channel) {
    std::vector<Series> out;
    for (const char* method : {"pod-gpr", "cae-gpr"}) {
        const bool pod = std::string(method) == "pod-gpr";
        Series rom{std::string(pod ? "POD-GPR" : "CAE-GPR") + " prediction", pod ? "#1f77b4" : "#d62728", "", {}};
        Series proj{std::string(pod ? "POD-GPR" : "CAE-GPR") + " projection", rom.color, "6,4", {}};
        for (const rom::CvRow& row : r.rows) {
            if (row.method != method || row.fold != rom::kFolds || row.channel != channel) continue;
            rom.points.emplace_back(static_cast<double>(row.k), row.eps_rom);
            proj.points.emplace_back(static_cast<double>(row.k), row.eps_proj);
        }
        if (rom.points.empty()) continue;
        std::sort(rom.points.begin(), rom.points.end());
        std::sort(proj.points.begin(), proj.points.end());
        out.push_back(std::move(rom));
        out.push_back(std::move(proj));
    }
    return out;
}

/// Renders series on a log10 y axis with gridlines at every power of ten spanned.
/// Nonpositive errors are drawn at the bottom of the axis.
inline std::string render_svg(const std::vector<Series>& series, const std::string& title) {
    double kmin = INFINITY, kmax = -INFINITY, emin = INFINITY, emax = -INFINITY;
    for (const Series& s : series)
        for (auto [k, e] : s.points) {
            kmin = std::min(kmin, k);
            kmax = std::max(kmax, k);
            if (e > 0.0 && std::isfinite(e)) {
                emin = std::min(emin, e);
                emax = std::max(emax, e);
            }
        }
    if (!std::isfinite(kmin)) throw ArgumentError("nothing to plot");
    if (!std::isfinite(emin)) emin = emax = 1.0;
    const int d0 = static_cast<int>(std::floor(std::log10(emin)));
    int d1 = static_cast<int>(std::ceil(std::log10(emax)));
    if (d1 <= d0) d1 = d0 + 1;
    if (kmax <= kmin) {
        kmin -= 1.0;
        kmax += 1.0;
    }
    const double w = 640, h = 440, left = 80, right = 190, top = 40, bottom = 60;
    const double pw = w - left - right, ph = h - top - bottom;
    auto x = [&](double k) { return left + (k - kmin) / (kmax - kmin) * pw; };
    auto y = [&](double e) {
        const double le = e > 0.0 && std::isfinite(e) ? std::log10(e) : d0;
        return top + (d1 - std::clamp(le, double(d0), double(d1))) / (d1 - d0) * ph;
    };

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt(w) + "\" height=\"" +
                    detail::fmt(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + detail::fmt(w) + "\" height=\"" + detail::fmt(h) + "\" fill=\"white\"/>\n";
    s += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::xml_escape(title) + "</text>\n";
    for (int d = d0; d <= d1; ++d) {
        const double yy = top + static_cast<double>(d1 - d) / (d1 - d0) * ph;
        s += "<line class=\"ytick\" x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(yy) + "\" x2=\"" +
             detail::fmt(left + pw) + "\" y2=\"" + detail::fmt(yy) + "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + detail::fmt(left - 8) + "\" y=\"" + detail::fmt(yy + 4) +
             "\" text-anchor=\"end\">1e" + std::to_string(d) + "</text>\n";
    }
    const double span = kmax - kmin;
    const double step = span <= 10 ? 1 : span <= 20 ? 2 : 5;
    for (double k = std::ceil(kmin / step) * step; k <= kmax + 1e-9; k += step) {
        s += "<line class=\"xtick\" x1=\"" + detail::fmt(x(k)) + "\" y1=\"" + detail::fmt(top + ph) + "\" x2=\"" +
             detail::fmt(x(k)) + "\" y2=\"" + detail::fmt(top + ph + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + detail::fmt(x(k)) + "\" y=\"" + detail::fmt(top + ph + 20) + "\" text-anchor=\"middle\">" +
             std::to_string(static_cast<long>(std::lround(k))) + "</text>\n";
    }
    s += "<rect x=\"" + detail::fmt(left) + "\" y=\"" + detail::fmt(top) + "\" width=\"" + detail::fmt(pw) +
         "\" height=\"" + detail::fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"" + detail::fmt(h - 15) + "\" text-anchor=\"middle\">k</text>\n";
    s += "<text x=\"18\" y=\"" + detail::fmt(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         detail::fmt(top + ph / 2) + ")\">mean squared relative error</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const Series& ser = series[i];
        std::string pts;
        for (auto [k, e] : ser.points) pts += (pts.empty() ? "" : " ") + detail::fmt(x(k)) + "," + detail::fmt(y(e));
        s += "<polyline fill=\"none\" stroke=\"" + ser.color + "\" stroke-width=\"2\"" +
             (ser.dash.empty() ? "" : " stroke-dasharray=\"" + ser.dash + "\"") + " points=\"" + pts + "\"/>\n";
        const double ly = top + 10 + 20 * static_cast<double>(i);
        s += "<line x1=\"" + detail::fmt(left + pw + 12) + "\" y1=\"" + detail::fmt(ly) + "\" x2=\"" +
             detail::fmt(left + pw + 40) + "\" y2=\"" + detail::fmt(ly) + "\" stroke=\"" + ser.color +
             "\" stroke-width=\"2\"" + (ser.dash.empty() ? "" : " stroke-dasharray=\"" + ser.dash + "\"") + "/>\n";
        s += "<text x=\"" + detail::fmt(left + pw + 46) + "\" y=\"" + detail::fmt(ly + 4) + "\">" +
             detail::xml_escape(ser.label) + "</text>\n";
    }
    return s + "</svg>\n";
}

/// Mean-row summary: method, k, channel, eps_rom, eps_proj.
inline std::string plot_summary_csv(const rom::CvReport& r) {
    std::string s = "method,k,channel,eps_rom,eps_proj\n";
    for (const rom::CvRow& row : r.rows)
        if (row.fold == rom::kFolds)
            s += row.method + "," + std::to_string(row.k) + "," + r.channel_names.at(row.channel) + "," +
                 detail::format_double(row.eps_rom) + "," + detail::format_double(row.eps_proj) + "\n";
    return s;
}

/// Writes <prefix>_<channel>.svg for every channel and <prefix>_summary.csv; returns the paths.
inline std::vector<std::string> write_plots(const rom::CvReport& r, const std::string& prefix) {
    std::vector<std::string> paths;
    for (std::size_t c = 0; c < r.channel_names.size(); ++c) {
        const auto series = channel_series(r, c);
        if (series.empty()) throw FormatError("report has no all-fold mean rows for channel " + r.channel_names[c]);
        const std::string path = prefix + "_" + r.channel_names[c] + ".svg";
        write_file_atomic(path, render_svg(series, "Cross-validation errors, " + r.channel_names[c]));
        paths.push_back(path);
    }
    const std::string summary = prefix + "_summary.csv";
    write_file_atomic(summary, plot_summary_csv(r));
    paths.push_back(summary);
    return paths;
}

}  // namespace romforge::io
