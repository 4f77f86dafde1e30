#pragma once

// Run configuration: a plain-text key = value file. '#' starts a comment, blank lines are
// ignored, unknown keys and repeated keys are errors. Every key has a default, so an empty
// file is a valid configuration.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/fom/lhs.hpp"
#include "romforge/fom/snapshots.hpp"
#include "romforge/gpr/gpr.hpp"
#include "romforge/io/files.hpp"
#include "romforge/rom/surrogate.hpp"

namespace romforge::io {

struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t threads = 0;

    fom::ParameterSpace space = fom::cavity_space();
    std::size_t samples = 500;
    fom::SnapshotConfig snapshots = [] {
        fom::SnapshotConfig s;
        s.nx = s.ny = 64;
        return s;
    }();

    std::vector<std::size_t> pod_k = range(1, 35, 1);
    std::vector<std::size_t> cae_k = range(5, 35, 5);
    std::size_t k = 5;  ///< rank used by `train`
    bool run_pod = true, run_cae = true;

    rom::CaeConfig cae;
    rom::TrainConfig train;
    double val_fraction = 0.1;  ///< share of samples held out for early stopping in `train`
    gpr::GprConfig gpr;

    std::string snapshots_path = "snapshots.bin";
    std::string design_path = "design.txt";
    std::string surrogate_path = "surrogate.bin";
    std::string report_path = "cv_report.csv";
    std::string predictions_path = "predictions.bin";
    std::string plot_prefix = "cv_plot";

    static std::vector<std::size_t> range(std::size_t from, std::size_t to, std::size_t step) {
        std::vector<std::size_t> v;
        for (std::size_t k = from; k <= to; k += step) v.push_back(k);
        return v;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ArgumentError("'" + s + "' is not a number");
    return v;
}

inline std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw ArgumentError("'" + s + "' is not a nonnegative integer");
    return v;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ArgumentError("'" + s + "' is not a boolean");
}

inline std::string format_list(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

}  // namespace detail

/// k list: comma-separated items, each a value or an inclusive range "a:b" or "a:b:step".
inline std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (const std::string& item : detail::split(text, ',')) {
        const auto parts = detail::split(item, ':');
        if (parts.size() == 1) {
            out.push_back(detail::parse_u64(parts[0]));
        } else if (parts.size() == 2 || parts.size() == 3) {
            const std::size_t a = detail::parse_u64(parts[0]), b = detail::parse_u64(parts[1]);
            const std::size_t step = parts.size() == 3 ? detail::parse_u64(parts[2]) : 1;
            if (step == 0 || a > b) throw ArgumentError("bad k range '" + item + "'");
            for (std::size_t k = a; k <= b; k += step) out.push_back(k);
        } else {
            throw ArgumentError("bad k list item '" + item + "'");
        }
    }
    if (out.empty()) throw ArgumentError("empty k list");
    for (std::size_t k : out)
        if (k == 0) throw ArgumentError("k values must be positive");
    return out;
}

namespace detail {

struct Key {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    bool affects_results = true;
};

template <typename F>
Key size_key(F field) {
    return {[field](RunConfig& c, const std::string& v) { field(c) = static_cast<std::size_t>(parse_u64(v)); },
            [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

template <typename F>
Key double_key(F field) {
    return {[field](RunConfig& c, const std::string& v) { field(c) = parse_double(v); },
            [field](const RunConfig& c) { return format_double(field(c)); }};
}

template <typename F>
Key path_key(F field) {
    return {[field](RunConfig& c, const std::string& v) { field(c) = v; },
            [field](const RunConfig& c) { return field(c); }, false};
}

inline Key bounds_key(std::size_t d) {
    return {[d](RunConfig& c, const std::string& v) {
                const auto parts = split(v, ',');
                if (parts.size() != 2) throw ArgumentError("bounds need the form lower,upper");
                c.space.bounds.at(d) = fom::Bounds{parse_double(parts[0]), parse_double(parts[1])};
            },
            [d](const RunConfig& c) {
                return format_double(c.space.bounds.at(d).lower) + "," + format_double(c.space.bounds.at(d).upper);
            }};
}

inline const std::map<std::string, Key>& keys() {
    static const std::map<std::string, Key> table = [] {
        std::map<std::string, Key> t;
        t["seed"] = {[](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
        t["threads"] = size_key([](auto& c) -> auto& { return c.threads; });
        t["threads"].affects_results = false;
        t["samples"] = size_key([](auto& c) -> auto& { return c.samples; });
        t["bounds.lx"] = bounds_key(0);
        t["bounds.ly"] = bounds_key(1);
        t["bounds.re"] = bounds_key(2);
        t["lhs.candidates"] = size_key([](auto& c) -> auto& { return c.snapshots.lhs_candidates; });
        t["grid.nx"] = size_key([](auto& c) -> auto& { return c.snapshots.nx; });
        t["grid.ny"] = size_key([](auto& c) -> auto& { return c.snapshots.ny; });
        t["fom.lid_speed"] = double_key([](auto& c) -> auto& { return c.snapshots.lid_speed; });
        t["fom.tolerance"] = double_key([](auto& c) -> auto& { return c.snapshots.solver.tolerance; });
        t["fom.max_iterations"] =
            size_key([](auto& c) -> auto& { return c.snapshots.solver.max_iterations; });
        t["fom.vorticity_relaxation"] =
            double_key([](auto& c) -> auto& { return c.snapshots.solver.vorticity_relaxation; });
        t["fom.sor_factor"] = double_key([](auto& c) -> auto& { return c.snapshots.solver.sor_factor; });
        t["fom.max_central_weight"] =
            double_key([](auto& c) -> auto& { return c.snapshots.solver.max_central_weight; });
        t["fom.allow_partial"] = {[](RunConfig& c, const std::string& v) { c.snapshots.allow_partial = parse_bool(v); },
                                  [](const RunConfig& c) { return std::string(c.snapshots.allow_partial ? "true" : "false"); }};
        t["pod.k"] = {[](RunConfig& c, const std::string& v) { c.pod_k = parse_k_list(v); },
                      [](const RunConfig& c) { return format_list(c.pod_k); }};
        t["cae.k"] = {[](RunConfig& c, const std::string& v) { c.cae_k = parse_k_list(v); },
                      [](const RunConfig& c) { return format_list(c.cae_k); }};
        t["k"] = size_key([](auto& c) -> auto& { return c.k; });
        t["cv.methods"] = {[](RunConfig& c, const std::string& v) {
                               c.run_pod = c.run_cae = false;
                               for (const auto& m : split(v, ',')) {
                                   const auto kind = rom::surrogate_kind_from_string(m);
                                   (kind == rom::SurrogateKind::PodGpr ? c.run_pod : c.run_cae) = true;
                               }
                           },
                           [](const RunConfig& c) {
                               std::string s = c.run_pod ? "pod-gpr" : "";
                               if (c.run_cae) s += std::string(s.empty() ? "" : ",") + "cae-gpr";
                               return s;
                           }};
        t["cae.width_scale"] = double_key([](auto& c) -> auto& { return c.cae.width_scale; });
        t["cae.alpha"] = double_key([](auto& c) -> auto& { return c.cae.alpha; });
        t["cae.scaling"] = {[](RunConfig& c, const std::string& v) { c.cae.scaling = rom::scaling_mode_from_string(v); },
                            [](const RunConfig& c) { return rom::to_string(c.cae.scaling); }};
        t["cae.epochs"] = size_key([](auto& c) -> auto& { return c.train.max_epochs; });
        t["cae.patience"] = size_key([](auto& c) -> auto& { return c.train.patience; });
        t["cae.batch"] = size_key([](auto& c) -> auto& { return c.train.batch_size; });
        t["cae.learning_rate"] = double_key([](auto& c) -> auto& { return c.train.learning_rate; });
        t["cae.val_fraction"] = double_key([](auto& c) -> auto& { return c.val_fraction; });
        t["gpr.kernel"] = {[](RunConfig& c, const std::string& v) { c.gpr.family = gpr::kernel_family_from_string(v); },
                           [](const RunConfig& c) { return gpr::to_string(c.gpr.family); }};
        t["gpr.nu"] = double_key([](auto& c) -> auto& { return c.gpr.nu; });
        t["gpr.noise"] = double_key([](auto& c) -> auto& { return c.gpr.noise; });
        t["gpr.restarts"] = {[](RunConfig& c, const std::string& v) { c.gpr.restarts = static_cast<int>(parse_u64(v)); },
                             [](const RunConfig& c) { return std::to_string(c.gpr.restarts); }};
        t["gpr.max_iterations"] = {
            [](RunConfig& c, const std::string& v) { c.gpr.max_iterations = static_cast<int>(parse_u64(v)); },
            [](const RunConfig& c) { return std::to_string(c.gpr.max_iterations); }};
        t["gpr.length_scale_min"] = double_key([](auto& c) -> auto& { return c.gpr.length_scale_min; });
        t["gpr.length_scale_max"] = double_key([](auto& c) -> auto& { return c.gpr.length_scale_max; });
        t["out.snapshots"] = path_key([](auto& c) -> auto& { return c.snapshots_path; });
        t["out.design"] = path_key([](auto& c) -> auto& { return c.design_path; });
        t["out.surrogate"] = path_key([](auto& c) -> auto& { return c.surrogate_path; });
        t["out.report"] = path_key([](auto& c) -> auto& { return c.report_path; });
        t["out.predictions"] = path_key([](auto& c) -> auto& { return c.predictions_path; });
        t["out.plot_prefix"] = path_key([](auto& c) -> auto& { return c.plot_prefix; });
        return t;
    }();
    return table;
}

}  // namespace detail

/// Semantic checks shared by every command.
inline void validate(const RunConfig& c) {
    c.space.validate();
    if (c.samples == 0) throw ArgumentError("samples must be positive");
    if (c.snapshots.nx < 8 || c.snapshots.ny < 8) throw ArgumentError("grid must be at least 8x8");
    if (c.k == 0) throw ArgumentError("k must be positive");
    if (!c.run_pod && !c.run_cae) throw ArgumentError("cv.methods selects no method");
    if (!(c.val_fraction > 0.0 && c.val_fraction < 1.0)) throw ArgumentError("cae.val_fraction must lie in (0, 1)");
    if (!(c.cae.width_scale > 0.0 && c.cae.width_scale <= 1.0)) throw ArgumentError("cae.width_scale must lie in (0, 1]");
    if (!(c.cae.alpha >= 0.0)) throw ArgumentError("cae.alpha must be nonnegative");
    if (c.train.max_epochs == 0 || c.train.patience == 0 || c.train.batch_size == 0)
        throw ArgumentError("cae.epochs, cae.patience and cae.batch must be positive");
    if (!(c.train.learning_rate > 0.0)) throw ArgumentError("cae.learning_rate must be positive");
    if (c.gpr.family == gpr::KernelFamily::Matern && !gpr::is_supported_nu(c.gpr.nu))
        throw ArgumentError("gpr.nu must be 0.5, 1.5 or 2.5");
    if (!(c.gpr.noise >= 0.0)) throw ArgumentError("gpr.noise must be nonnegative");
    if (c.gpr.restarts < 1) throw ArgumentError("gpr.restarts must be at least 1");
    if (!(c.gpr.length_scale_min > 0.0 && c.gpr.length_scale_min < c.gpr.length_scale_max))
        throw ArgumentError("gpr length-scale bounds need 0 < min < max");
}

/// Parses config text; `what` names the source in messages ("path:line: ...").
inline RunConfig parse_config(const std::string& text, const std::string& what = "config") {
    RunConfig c;
    std::map<std::string, std::size_t> seen;
    std::istringstream in(text);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        const std::string where = what + ":" + std::to_string(no) + ": ";
        const auto hash = line.find('#');
        const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw FormatError(where + "expected key = value");
        const std::string key = detail::trim(body.substr(0, eq)), value = detail::trim(body.substr(eq + 1));
        const auto it = detail::keys().find(key);
        if (it == detail::keys().end()) throw FormatError(where + "unknown key '" + key + "'");
        if (auto [pos, fresh] = seen.emplace(key, no); !fresh)
            throw FormatError(where + "key '" + key + "' already set on line " + std::to_string(pos->second));
        try {
            it->second.set(c, value);
        } catch (const ArgumentError& e) {
            throw FormatError(where + key + ": " + e.what());
        }
    }
    validate(c);
    return c;
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

/// Every key in canonical form, one "key = value" per line, sorted by key.
inline std::string dump_config(const RunConfig& c) {
    std::string s;
    for (const auto& [key, k] : detail::keys()) s += key + " = " + k.get(c) + "\n";
    return s;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Digest of the canonical form of every key that influences numerical results (output
/// paths and thread counts excluded).
inline std::uint64_t config_digest(const RunConfig& c) {
    std::string s;
    for (const auto& [key, k] : detail::keys())
        if (k.affects_results) s += key + "=" + k.get(c) + "\n";
    return fnv1a(s);
}

}  // namespace romforge::io
