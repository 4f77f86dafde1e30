#pragma once

// Command implementations behind the romforge executable. Each command reads the run
// configuration, applies command-line overrides and writes its artifacts atomically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "romforge/dataset.hpp"
#include "romforge/error.hpp"
#include "romforge/fom/snapshots.hpp"
#include "romforge/io/config.hpp"
#include "romforge/io/csv.hpp"
#include "romforge/io/design_table.hpp"
#include "romforge/io/snapshot_file.hpp"
#include "romforge/io/surrogate_file.hpp"
#include "romforge/io/svg_plot.hpp"
#include "romforge/random.hpp"
#include "romforge/rom/cv.hpp"
#include "romforge/rom/surrogate.hpp"

namespace romforge::cli {

enum ExitCode : int {
    kOk = 0,
    kOtherError = 1,
    kArgumentError = 2,
    kFormatError = 3,
    kConvergenceError = 4,
    kTrainingError = 5,
    kIoError = 6,
    kNumericalError = 7,
};

/// Exit code of an exception thrown by a command.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ArgumentError*>(&e)) return kArgumentError;
    if (dynamic_cast<const FormatError*>(&e)) return kFormatError;
    if (dynamic_cast<const ConvergenceError*>(&e)) return kConvergenceError;
    if (dynamic_cast<const TrainingError*>(&e)) return kTrainingError;
    if (dynamic_cast<const IoError*>(&e)) return kIoError;
    if (dynamic_cast<const InvalidDataError*>(&e) || dynamic_cast<const DegenerateSpectrumError*>(&e) ||
        dynamic_cast<const IllConditionedError*>(&e))
        return kNumericalError;
    return kOtherError;
}

/// Command-line overrides; empty fields fall back to the configuration.
struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string method;
    std::string k;
    std::string out;
    bool allow_partial = false;
    std::string data;
    std::string surrogate;
    std::string mu;
    std::string design;
    std::string report;
    std::vector<std::string> csv;
    std::string grid;
};

inline io::RunConfig resolve_config(const Options& o) {
    io::RunConfig c = io::load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.allow_partial) c.snapshots.allow_partial = true;
    return c;
}

namespace detail {

inline std::string pick(const std::string& flag, const std::string& fallback) { return flag.empty() ? fallback : flag; }

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4e", v);
    return buf;
}

inline std::vector<double> parse_point(const std::string& text) {
    std::vector<double> mu;
    for (const std::string& v : io::detail::split(text, ',')) mu.push_back(io::detail::parse_double(v));
    if (mu.empty()) throw ArgumentError("--mu needs at least one value");
    return mu;
}

/// "NYxNX" or "0x0".
inline std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw ArgumentError("--grid expects NYxNX, got '" + text + "'");
    return {io::detail::parse_u64(text.substr(0, x)), io::detail::parse_u64(text.substr(x + 1))};
}

/// Train/validation split for `train`: samples in canonical order, shuffled with `seed`;
/// the first ceil(val_fraction n) go to validation.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(
    const std::vector<std::vector<double>>& params, double val_fraction, std::uint64_t seed) {
    const std::size_t n = params.size();
    if (n < 2) throw ArgumentError("cae-gpr training needs at least 2 samples");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return params[a] < params[b]; });
    Rng rng(seed);
    shuffle(order, rng);
    const std::size_t nv = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(val_fraction * static_cast<double>(n))), 1, n - 1);
    return {{order.begin() + static_cast<std::ptrdiff_t>(nv), order.end()},
            {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nv)}};
}

}  // namespace detail

inline int cmd_generate(const Options& o, std::ostream& log) {
    const io::RunConfig c = resolve_config(o);
    fom::SnapshotConfig sc = c.snapshots;
    sc.threads = c.threads;
    const std::string out = detail::pick(o.out, c.snapshots_path);
    log << "generating " << c.samples << " samples on a " << sc.ny << "x" << sc.nx << " grid (seed " << c.seed << ")\n";
    const fom::GeneratedSnapshots g = fom::generate_snapshots(c.space, c.samples, c.seed, sc);
    std::size_t ok = 0;
    for (const auto& r : g.reports) {
        ok += r.converged;
        log << "  solve " << r.index << ": " << (r.converged ? "converged" : "FAILED") << " after " << r.iterations
            << " iterations, residual " << detail::sci(r.residual)
            << (r.message.empty() ? "" : " (" + r.message + ")") << "\n";
    }
    log << ok << "/" << g.reports.size() << " solves converged\n";
    io::write_snapshot_file(out, g.data);
    io::write_design_table(c.design_path, g.data.params, g.data.param_names);
    log << "wrote " << out << " and " << c.design_path << "\n";
    return kOk;
}

inline std::size_t single_k(const Options& o, const io::RunConfig& c) {
    if (o.k.empty()) return c.k;
    const auto ks = io::parse_k_list(o.k);
    if (ks.size() != 1) throw ArgumentError("train takes a single --k value");
    return ks.front();
}

inline int cmd_train(const Options& o, std::ostream& log) {
    const io::RunConfig c = resolve_config(o);
    const auto kind = rom::surrogate_kind_from_string(detail::pick(o.method, "pod-gpr"));
    const std::size_t k = single_k(o, c);
    const std::string data_path = detail::pick(o.data, c.snapshots_path);
    const std::string out = detail::pick(o.out, c.surrogate_path);
    const Dataset data = io::read_snapshot_file(data_path);
    rom::RomSurrogate s;
    if (kind == rom::SurrogateKind::PodGpr) {
        s = rom::pod_gpr_offline(data, k, c.gpr, c.seed, c.threads);
    } else {
        if (!data.structured()) throw ArgumentError("cae-gpr needs structured grid data; " + data_path + " is unstructured");
        const auto [tr, va] = detail::holdout_split(data.params, c.val_fraction, derive_seed(c.seed, 3));
        s = rom::cae_gpr_offline(data.subset(tr), data.subset(va), k, c.cae, c.train, c.gpr, c.seed, c.threads);
    }
    s.config_digest = io::config_digest(c);
    io::write_surrogate_file(out, s);
    log << rom::to_string(kind) << " k=" << k << " trained on " << data.sample_count() << " samples in "
        << detail::sci(s.wall_time_s) << " s";
    if (kind == rom::SurrogateKind::CaeGpr)
        log << ", " << s.training.epochs << " epochs (best " << s.training.best_epoch << ", validation loss "
            << detail::sci(s.training.best_val_loss) << ")";
    log << "\nwrote " << out << "\n";
    return kOk;
}

inline int cmd_predict(const Options& o, std::ostream& log) {
    const io::RunConfig c = resolve_config(o);
    const std::string path = detail::pick(o.surrogate, c.surrogate_path);
    const rom::RomSurrogate s = io::read_surrogate_file(path);
    if (o.mu.empty() == o.design.empty()) throw ArgumentError("predict needs exactly one of --mu or --design");
    const std::vector<std::vector<double>> queries =
        o.mu.empty() ? io::read_design_table(o.design) : std::vector<std::vector<double>>{detail::parse_point(o.mu)};
    Dataset out;
    out.params = queries;
    out.channels = rom::predict(s, queries);
    out.ny = s.ny;
    out.nx = s.nx;
    const std::string dest = detail::pick(o.out, c.predictions_path);
    io::write_snapshot_file(dest, out);
    log << rom::to_string(s.kind) << " k=" << s.k << ": " << queries.size() << " predictions written to " << dest << "\n";
    return kOk;
}

inline rom::CvConfig cv_config(const Options& o, const io::RunConfig& c) {
    rom::CvConfig cv;
    cv.pod_k = c.pod_k;
    cv.cae_k = c.cae_k;
    cv.run_pod = c.run_pod;
    cv.run_cae = c.run_cae;
    if (!o.method.empty()) {
        const auto kind = rom::surrogate_kind_from_string(o.method);
        cv.run_pod = kind == rom::SurrogateKind::PodGpr;
        cv.run_cae = kind == rom::SurrogateKind::CaeGpr;
    }
    if (!o.k.empty()) cv.pod_k = cv.cae_k = io::parse_k_list(o.k);
    cv.gpr = c.gpr;
    cv.cae = c.cae;
    cv.train = c.train;
    cv.threads = c.threads;
    return cv;
}

inline int cmd_evaluate(const Options& o, std::ostream& log) {
    const io::RunConfig c = resolve_config(o);
    const std::string data_path = detail::pick(o.data, c.snapshots_path);
    const Dataset data = io::read_snapshot_file(data_path);
    const rom::CvReport r = rom::five_fold_cv(data, cv_config(o, c), c.seed);
    const std::string out = detail::pick(o.out, c.report_path);
    io::write_report(out, r);
    log << "method   k   channel  eps_rom     eps_proj\n";
    for (const rom::CvRow& row : r.rows)
        if (row.fold == rom::kFolds) {
            char line[128];
            std::snprintf(line, sizeof line, "%-8s %-3zu %-8s %-11s %s\n", row.method.c_str(), row.k,
                          r.channel_names[row.channel].c_str(), detail::sci(row.eps_rom).c_str(),
                          detail::sci(row.eps_proj).c_str());
            log << line;
        }
    log << "wrote " << out << " and " << io::timing_path(out) << "\n";
    return kOk;
}

inline int cmd_plot(const Options& o, std::ostream& log) {
    const io::RunConfig c = resolve_config(o);
    const rom::CvReport r = io::read_report(detail::pick(o.report, c.report_path));
    for (const std::string& p : io::write_plots(r, detail::pick(o.out, c.plot_prefix))) log << "wrote " << p << "\n";
    return kOk;
}

inline int cmd_import(const Options& o, std::ostream& log) {
    const io::RunConfig c = resolve_config(o);
    if (o.csv.empty()) throw ArgumentError("import needs at least one --csv file");
    std::vector<std::string> texts;
    for (const std::string& p : o.csv) texts.push_back(io::read_file(p));
    const auto [ny, nx] = o.grid.empty() ? std::pair<std::size_t, std::size_t>{0, 0} : detail::parse_grid(o.grid);
    const Dataset d = io::dataset_from_channel_csvs(texts, o.csv, ny, nx);
    const std::string out = detail::pick(o.out, c.snapshots_path);
    io::write_snapshot_file(out, d);
    log << "imported " << d.sample_count() << " samples, " << d.channel_count() << " channels, N=" << d.state_dim()
        << " into " << out << "\n";
    return kOk;
}

inline int cmd_export(const Options& o, std::ostream& log) {
    const io::RunConfig c = resolve_config(o);
    const Dataset d = io::read_snapshot_file(detail::pick(o.data, c.snapshots_path));
    const std::string prefix = detail::pick(o.out, "snapshots");
    for (std::size_t ch = 0; ch < d.channel_count(); ++ch) {
        const std::string path = prefix + "_" + rom::channel_name(ch, d.channel_count()) + ".csv";
        io::write_file_atomic(path, io::channel_csv(d, ch));
        log << "wrote " << path << "\n";
    }
    return kOk;
}

}  // namespace romforge::cli
