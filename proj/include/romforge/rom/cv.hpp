#pragma once

// Five-fold cross-validation of POD-GPR and CAE-GPR. Samples are first put in a canonical
// order (lexicographic in the design point) so that the input column order cannot affect
// the folds; the canonical order is then shuffled with the run seed. Each fold holds out
// one fifth of the samples: the first half of the holdout is the test set, the second
// half the validation set used only for autoencoder early stopping.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "romforge/dataset.hpp"
#include "romforge/error.hpp"
#include "romforge/parallel.hpp"
#include "romforge/random.hpp"
#include "romforge/rom/metrics.hpp"
#include "romforge/rom/surrogate.hpp"

namespace romforge::rom {

inline constexpr std::size_t kFolds = 5;

struct FoldSplit {
    std::vector<std::size_t> train, validation, test;
};

/// Fold partition of n samples with design points `params`.
inline std::vector<FoldSplit> five_fold_split(const std::vector<std::vector<double>>& params, std::uint64_t seed) {
    const std::size_t n = params.size();
    if (n < kFolds || n % kFolds != 0)
        throw ArgumentError("five-fold cross-validation needs a sample count divisible by 5, got " +
                            std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return params[a] < params[b]; });
    Rng rng(seed);
    shuffle(order, rng);
    const std::size_t h = n / kFolds, n_test = (h + 1) / 2;
    std::vector<FoldSplit> folds(kFolds);
    for (std::size_t f = 0; f < kFolds; ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t slot = i / h;
            if (slot != f) {
                folds[f].train.push_back(order[i]);
            } else if (i - f * h < n_test) {
                folds[f].test.push_back(order[i]);
            } else {
                folds[f].validation.push_back(order[i]);
            }
        }
    }
    return folds;
}

struct CvConfig {
    std::vector<std::size_t> pod_k{5, 10, 20};
    std::vector<std::size_t> cae_k{5};
    bool run_pod = true;
    bool run_cae = true;
    gpr::GprConfig gpr;
    CaeConfig cae;
    TrainConfig train;
    std::size_t threads = 0;  ///< fold-level workers; 0: worker_count()
};

/// Errors of one method, fold, k and channel: means over the fold's test points.
struct CvRow {
    std::string method;
    std::size_t fold = 0;  ///< 0-based; kFolds marks the all-fold mean
    std::size_t k = 0;
    std::size_t channel = 0;
    double eps_rom = 0.0;
    double eps_proj = 0.0;
    double sqrt_eps_rom = 0.0;   ///< mean over points of sqrt(eps_rom)
    double sqrt_eps_proj = 0.0;  ///< mean over points of sqrt(eps_proj)
    double epochs = 0.0;         ///< CAE epochs run (0 for POD)
    std::size_t points = 0;
};

struct CvTiming {
    std::string method;
    std::size_t fold = 0;
    std::size_t k = 0;
    double wall_time_s = 0.0;
};

struct CvReport {
    std::vector<std::string> channel_names;
    std::vector<CvRow> rows;  ///< per-fold rows then mean rows
    std::vector<CvTiming> timings;
    std::vector<FoldSplit> folds;

    const CvRow* find(const std::string& method, std::size_t fold, std::size_t k, std::size_t channel) const {
        for (const CvRow& r : rows)
            if (r.method == method && r.fold == fold && r.k == k && r.channel == channel) return &r;
        return nullptr;
    }
    const CvRow* mean(const std::string& method, std::size_t k, std::size_t channel) const {
        return find(method, kFolds, k, channel);
    }
};

inline std::string channel_name(std::size_t c, std::size_t count) {
    if (count == 2) return c == 0 ? "u" : "v";
    return "c" + std::to_string(c);
}

namespace detail {

/// Per-point errors of one channel: columns of `truth` against `pred` and `proj`.
struct PointErrors {
    std::vector<double> rom, proj;
};

inline PointErrors point_errors(const Matrix& truth, const Matrix& pred, const Matrix& proj) {
    PointErrors e;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        e.rom.push_back(rom_error(truth.col(j), pred.col(j)));
        e.proj.push_back(projection_error(truth.col(j), proj.col(j)));
    }
    return e;
}

inline CvRow summarize(const std::string& method, std::size_t fold, std::size_t k, std::size_t channel,
                       const PointErrors& e, double epochs) {
    CvRow r{method, fold, k, channel};
    const double n = static_cast<double>(e.rom.size());
    for (std::size_t i = 0; i < e.rom.size(); ++i) {
        r.eps_rom += e.rom[i] / n;
        r.eps_proj += e.proj[i] / n;
        r.sqrt_eps_rom += std::sqrt(e.rom[i]) / n;
        r.sqrt_eps_proj += std::sqrt(e.proj[i]) / n;
    }
    r.epochs = epochs;
    r.points = e.rom.size();
    return r;
}

struct FoldResult {
    std::vector<CvRow> rows;
    std::vector<CvTiming> timings;
    std::vector<std::vector<PointErrors>> errors;  ///< parallel to rows' (method, k), per channel
};

}  // namespace detail

/// Runs the configured methods on every fold. Fold f uses seed derive_seed(seed, f), so
/// the report does not depend on how folds are scheduled.
inline CvReport five_fold_cv(const Dataset& data, const CvConfig& cfg, std::uint64_t seed) {
    data.validate();
    if (cfg.run_pod && cfg.pod_k.empty()) throw ArgumentError("POD-GPR cross-validation needs a k list");
    if (cfg.run_cae && cfg.cae_k.empty()) throw ArgumentError("CAE-GPR cross-validation needs a k list");
    if (cfg.run_cae && !data.structured())
        throw ArgumentError("CAE-GPR cross-validation needs structured grid data (n_y, n_x > 0)");
    CvReport report;
    report.folds = five_fold_split(data.params, seed);
    const std::size_t nc = data.channel_count();
    for (std::size_t c = 0; c < nc; ++c) report.channel_names.push_back(channel_name(c, nc));
    for (std::size_t k : cfg.pod_k)
        if (cfg.run_pod && (k < 1 || k > report.folds[0].train.size()))
            throw ArgumentError("POD rank k=" + std::to_string(k) + " must lie in [1, " +
                                std::to_string(report.folds[0].train.size()) + "]");

    struct Group {
        std::string method;
        std::size_t k;
        std::vector<detail::PointErrors> per_channel;
        std::vector<double> epochs;
    };
    std::vector<std::vector<Group>> fold_groups(kFolds);
    std::vector<std::vector<CvRow>> fold_rows(kFolds);
    std::vector<std::vector<CvTiming>> fold_times(kFolds);

    parallel_for(
        kFolds,
        [&](std::size_t f) {
            const FoldSplit& split = report.folds[f];
            const std::uint64_t fseed = derive_seed(seed, f);
            const Dataset train = data.subset(split.train);
            const Dataset test = data.subset(split.test);
            if (cfg.run_pod) {
                // Bases and coefficient GPs are prefix-consistent in k, so one rank-k_max
                // build serves every k in the list.
                const std::size_t kmax = *std::max_element(cfg.pod_k.begin(), cfg.pod_k.end());
                const auto t0 = std::chrono::steady_clock::now();
                const RomSurrogate full = pod_gpr_offline(train, kmax, cfg.gpr, fseed, 1);
                const double build_s = detail::seconds_since(t0);
                for (std::size_t k : cfg.pod_k) {
                    Group g{"pod-gpr", k, {}, {}};
                    for (std::size_t c = 0; c < nc; ++c) {
                        const PodChannelModel& m = full.pod[c];
                        const Matrix psi = m.basis.vectors.leftCols(static_cast<Eigen::Index>(k));
                        const std::vector<gpr::GprModel> models(m.coeffs.begin(),
                                                                m.coeffs.begin() + static_cast<std::ptrdiff_t>(k));
                        const Matrix pred = psi * predict_coefficients(models, test.params);
                        const Matrix proj = psi * (psi.transpose() * test.channels[c]);
                        g.per_channel.push_back(detail::point_errors(test.channels[c], pred, proj));
                        fold_rows[f].push_back(detail::summarize(g.method, f, k, c, g.per_channel.back(), 0.0));
                    }
                    fold_groups[f].push_back(std::move(g));
                    fold_times[f].push_back(CvTiming{"pod-gpr", f, k, build_s});
                }
            }
            if (cfg.run_cae) {
                const Dataset val = data.subset(split.validation);
                for (std::size_t k : cfg.cae_k) {
                    const auto t0 = std::chrono::steady_clock::now();
                    const RomSurrogate s =
                        cae_gpr_offline(train, val, k, cfg.cae, cfg.train, cfg.gpr, derive_seed(fseed, 100 + k), 1);
                    const std::vector<Matrix> pred = predict(s, test.params);
                    const std::vector<Matrix> proj = project_cae(s, test.channels);
                    Group g{"cae-gpr", k, {}, {}};
                    const double epochs = static_cast<double>(s.training.epochs);
                    for (std::size_t c = 0; c < nc; ++c) {
                        g.per_channel.push_back(detail::point_errors(test.channels[c], pred[c], proj[c]));
                        fold_rows[f].push_back(detail::summarize(g.method, f, k, c, g.per_channel.back(), epochs));
                    }
                    g.epochs.push_back(epochs);
                    fold_groups[f].push_back(std::move(g));
                    fold_times[f].push_back(CvTiming{"cae-gpr", f, k, detail::seconds_since(t0)});
                }
            }
        },
        cfg.threads);

    for (std::size_t f = 0; f < kFolds; ++f) {
        report.rows.insert(report.rows.end(), fold_rows[f].begin(), fold_rows[f].end());
        report.timings.insert(report.timings.end(), fold_times[f].begin(), fold_times[f].end());
    }
    // All-fold means over every test point.
    const std::size_t groups = fold_groups[0].size();
    for (std::size_t gi = 0; gi < groups; ++gi) {
        const std::string& method = fold_groups[0][gi].method;
        const std::size_t k = fold_groups[0][gi].k;
        double epochs = 0.0;
        for (std::size_t f = 0; f < kFolds; ++f)
            for (double e : fold_groups[f][gi].epochs) epochs += e / static_cast<double>(kFolds);
        for (std::size_t c = 0; c < nc; ++c) {
            detail::PointErrors all;
            for (std::size_t f = 0; f < kFolds; ++f) {
                const detail::PointErrors& e = fold_groups[f][gi].per_channel[c];
                all.rom.insert(all.rom.end(), e.rom.begin(), e.rom.end());
                all.proj.insert(all.proj.end(), e.proj.begin(), e.proj.end());
            }
            report.rows.push_back(detail::summarize(method, kFolds, k, c, all, epochs));
        }
    }
    return report;
}

}  // namespace romforge::rom
