#pragma once

// POD-GPR and CAE-GPR surrogates: offline construction from snapshots and online
// prediction at new design points.

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romforge/dataset.hpp"
#include "romforge/error.hpp"
#include "romforge/gpr/gpr.hpp"
#include "romforge/linalg/pod.hpp"
#include "romforge/nn/cae.hpp"
#include "romforge/parallel.hpp"
#include "romforge/random.hpp"
#include "romforge/rom/scaling.hpp"
#include "romforge/rom/training.hpp"

namespace romforge::rom {

enum class SurrogateKind { PodGpr, CaeGpr };

inline std::string to_string(SurrogateKind k) { return k == SurrogateKind::PodGpr ? "pod-gpr" : "cae-gpr"; }

inline SurrogateKind surrogate_kind_from_string(const std::string& s) {
    if (s == "pod-gpr") return SurrogateKind::PodGpr;
    if (s == "cae-gpr") return SurrogateKind::CaeGpr;
    throw ArgumentError("unknown method '" + s + "' (expected pod-gpr or cae-gpr)");
}

struct CaeConfig {
    double width_scale = 1.0;
    double alpha = 0.25;
    ScalingMode scaling = ScalingMode::PerChannel;
};

/// One state channel of a POD-GPR surrogate: basis plus one GP per coefficient.
struct PodChannelModel {
    linalg::PodBasis basis;
    std::vector<gpr::GprModel> coeffs;
};

struct RomSurrogate {
    SurrogateKind kind = SurrogateKind::PodGpr;
    std::size_t k = 0;
    std::size_t param_dim = 0;
    std::size_t state_dim = 0;
    std::size_t channels = 0;
    std::size_t ny = 0, nx = 0;

    std::vector<PodChannelModel> pod;  ///< PodGpr: one per channel

    nn::CaeNetwork cae;                 ///< CaeGpr
    CaeConfig cae_config;
    ScalingInfo scaling;                ///< CaeGpr
    std::vector<gpr::GprModel> codes;   ///< CaeGpr: one GP per code entry
    TrainResult training;               ///< CaeGpr training history

    std::uint64_t seed = 0;
    std::uint64_t config_digest = 0;
    double wall_time_s = 0.0;

    std::size_t channel_count() const { return channels; }
};

namespace detail {

inline Matrix design_matrix(const std::vector<std::vector<double>>& params) {
    if (params.empty()) throw ArgumentError("no design points");
    Matrix m(static_cast<Eigen::Index>(params.size()), static_cast<Eigen::Index>(params.front().size()));
    for (std::size_t i = 0; i < params.size(); ++i)
        for (std::size_t d = 0; d < params[i].size(); ++d)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = params[i][d];
    return m;
}

/// One GP per row of `targets` (k x n), fitted on the n design points.
inline std::vector<gpr::GprModel> fit_coefficients(const Matrix& design, const Matrix& targets,
                                                   const gpr::GprConfig& cfg, std::uint64_t seed,
                                                   std::size_t threads) {
    std::vector<gpr::GprModel> models(static_cast<std::size_t>(targets.rows()));
    parallel_for(
        models.size(),
        [&](std::size_t j) {
            models[j] = gpr::fit(design, targets.row(static_cast<Eigen::Index>(j)).transpose(), cfg,
                                 derive_seed(seed, j));
        },
        threads);
    return models;
}

inline void check_query(const RomSurrogate& s, const std::vector<double>& mu) {
    if (mu.size() != s.param_dim)
        throw ArgumentError("query point has dimension " + std::to_string(mu.size()) + ", surrogate expects " +
                            std::to_string(s.param_dim));
    for (double v : mu)
        if (!std::isfinite(v)) throw ArgumentError("query point contains non-finite values");
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Coefficient predictions a(mu) for every query (k x m).
inline Matrix predict_coefficients(const std::vector<gpr::GprModel>& models,
                                   const std::vector<std::vector<double>>& queries) {
    Matrix a(static_cast<Eigen::Index>(models.size()), static_cast<Eigen::Index>(queries.size()));
    for (std::size_t q = 0; q < queries.size(); ++q)
        for (std::size_t j = 0; j < models.size(); ++j)
            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) = gpr::predict_mean(models[j], queries[q]);
    return a;
}

/// POD-GPR offline stage: per channel a rank-k POD basis, coefficients A = Psi^T S, and
/// one GP per coefficient. GP j of channel c is seeded with derive_seed(derive_seed(seed, c), j).
inline RomSurrogate pod_gpr_offline(const Dataset& train, std::size_t k, const gpr::GprConfig& gcfg,
                                    std::uint64_t seed, std::size_t threads = 0) {
    const auto t0 = std::chrono::steady_clock::now();
    train.validate();
    if (k < 1) throw ArgumentError("POD rank k must be at least 1");
    if (k > train.sample_count())
        throw ArgumentError("POD rank k=" + std::to_string(k) + " exceeds the " +
                            std::to_string(train.sample_count()) + " training samples");
    RomSurrogate s;
    s.kind = SurrogateKind::PodGpr;
    s.k = k;
    s.param_dim = train.param_dim();
    s.state_dim = train.state_dim();
    s.channels = train.channel_count();
    s.ny = train.ny;
    s.nx = train.nx;
    s.seed = seed;
    const Matrix design = detail::design_matrix(train.params);
    for (std::size_t c = 0; c < train.channel_count(); ++c) {
        PodChannelModel m;
        m.basis = linalg::compute_pod_basis(train.channel(c), static_cast<Eigen::Index>(k));
        const Matrix coeffs = m.basis.vectors.transpose() * train.channels[c];
        m.coeffs = detail::fit_coefficients(design, coeffs, gcfg, derive_seed(seed, c), threads);
        s.pod.push_back(std::move(m));
    }
    s.wall_time_s = detail::seconds_since(t0);
    return s;
}

/// Full-order prediction per channel (each N x m) for m query points.
inline std::vector<Matrix> predict(const RomSurrogate& s, const std::vector<std::vector<double>>& queries) {
    if (queries.empty()) throw ArgumentError("no query points");
    for (const auto& mu : queries) detail::check_query(s, mu);
    std::vector<Matrix> out;
    if (s.kind == SurrogateKind::PodGpr) {
        for (const PodChannelModel& m : s.pod) out.push_back(m.basis.vectors * predict_coefficients(m.coeffs, queries));
        return out;
    }
    const Matrix a = predict_coefficients(s.codes, queries);
    nn::CaeNetwork net = s.cae;  // forward passes write layer buffers
    nn::Tensor4 code(queries.size(), nn::Shape3{1, 1, s.k});
    for (std::size_t q = 0; q < queries.size(); ++q)
        for (std::size_t j = 0; j < s.k; ++j)
            code.sample(q)[j] = a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q));
    const std::vector<Matrix> scaled = inverse_reshape(net.decode(code));
    for (std::size_t c = 0; c < scaled.size(); ++c) out.push_back(minmax_inverse(s.scaling, c, scaled[c]));
    return out;
}

inline std::vector<Vector> predict(const RomSurrogate& s, const std::vector<double>& mu) {
    const std::vector<Matrix> m = predict(s, std::vector<std::vector<double>>{mu});
    std::vector<Vector> out;
    for (const Matrix& x : m) out.push_back(x.col(0));
    return out;
}

/// Autoencoder input tensor for raw channels under a fitted scaling.
inline nn::Tensor4 scaled_grid(const ScalingInfo& info, const std::vector<Matrix>& channels, std::size_t ny,
                               std::size_t nx) {
    std::vector<Matrix> scaled;
    for (std::size_t c = 0; c < channels.size(); ++c) scaled.push_back(minmax_transform(info, c, channels[c]));
    return reshape_to_grid(scaled, ny, nx);
}

/// Codes of every column of `channels` (k x n).
inline Matrix encode_states(const RomSurrogate& s, const std::vector<Matrix>& channels) {
    if (s.kind != SurrogateKind::CaeGpr) throw ArgumentError("encode_states needs a CAE-GPR surrogate");
    nn::CaeNetwork net = s.cae;
    const nn::Tensor4 x = scaled_grid(s.scaling, channels, s.ny, s.nx);
    Matrix a(static_cast<Eigen::Index>(s.k), static_cast<Eigen::Index>(x.batch));
    nn::Tensor4 chunk;
    std::vector<std::size_t> idx(x.batch);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t from = 0; from < x.batch; from += 8) {
        const std::size_t m = std::min<std::size_t>(8, x.batch - from);
        detail::gather(x, idx, from, m, chunk);
        const nn::Tensor4& code = net.encode(chunk);
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t j = 0; j < s.k; ++j)
                a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(from + b)) = code.sample(b)[j];
    }
    return a;
}

/// Projection onto the autoencoder manifold: decode(encode(scale(x))), unscaled.
inline std::vector<Matrix> project_cae(const RomSurrogate& s, const std::vector<Matrix>& channels) {
    if (s.kind != SurrogateKind::CaeGpr) throw ArgumentError("project_cae needs a CAE-GPR surrogate");
    if (channels.size() != s.channels)
        throw ArgumentError("project_cae: expected " + std::to_string(s.channels) + " channels, got " +
                            std::to_string(channels.size()));
    const Matrix a = encode_states(s, channels);
    nn::CaeNetwork net = s.cae;
    nn::Tensor4 code(static_cast<std::size_t>(a.cols()), nn::Shape3{1, 1, s.k});
    for (Eigen::Index q = 0; q < a.cols(); ++q)
        for (std::size_t j = 0; j < s.k; ++j) code.sample(static_cast<std::size_t>(q))[j] = a(static_cast<Eigen::Index>(j), q);
    const std::vector<Matrix> scaled = inverse_reshape(net.decode(code));
    std::vector<Matrix> out;
    for (std::size_t c = 0; c < scaled.size(); ++c) out.push_back(minmax_inverse(s.scaling, c, scaled[c]));
    return out;
}

/// Projection onto a POD basis: Psi Psi^T x.
inline Matrix project_pod(const linalg::PodBasis& basis, const Matrix& x) {
    return basis.vectors * (basis.vectors.transpose() * x);
}

/// CAE-GPR offline stage: min-max scale (fitted on the training set), reshape, train the
/// autoencoder with early stopping on `val`, encode the training set and fit one GP per
/// code entry. Network weights use derive_seed(seed, 0), mini-batch shuffling
/// derive_seed(seed, 1) and the GPs derive_seed(seed, 2).
inline RomSurrogate cae_gpr_offline(const Dataset& train, const Dataset& val, std::size_t k, const CaeConfig& arch,
                                    const TrainConfig& tcfg, const gpr::GprConfig& gcfg, std::uint64_t seed,
                                    std::size_t threads = 0) {
    const auto t0 = std::chrono::steady_clock::now();
    train.validate();
    val.validate();
    if (!train.structured() || !val.structured())
        throw ArgumentError("CAE-GPR needs structured grid data (n_y, n_x > 0)");
    if (train.ny != val.ny || train.nx != val.nx || train.channel_count() != val.channel_count() ||
        train.param_dim() != val.param_dim())
        throw ArgumentError("training and validation sets are not compatible");
    if (k < 1) throw ArgumentError("CAE code dimension k must be at least 1");

    RomSurrogate s;
    s.kind = SurrogateKind::CaeGpr;
    s.k = k;
    s.param_dim = train.param_dim();
    s.state_dim = train.state_dim();
    s.channels = train.channel_count();
    s.ny = train.ny;
    s.nx = train.nx;
    s.seed = seed;
    s.cae_config = arch;
    s.scaling = minmax_fit(train.channels, arch.scaling);
    s.cae = nn::build_paper_cae(train.ny, train.nx, train.channel_count(), k, arch.width_scale, arch.alpha);
    s.cae.initialize(derive_seed(seed, 0));

    const nn::Tensor4 xtr = scaled_grid(s.scaling, train.channels, s.ny, s.nx);
    const nn::Tensor4 xval = scaled_grid(s.scaling, val.channels, s.ny, s.nx);
    s.training = train_autoencoder(s.cae, xtr, xval, tcfg, derive_seed(seed, 1));

    const Matrix codes = encode_states(s, train.channels);
    s.codes = detail::fit_coefficients(detail::design_matrix(train.params), codes, gcfg, derive_seed(seed, 2),
                                       threads);
    s.wall_time_s = detail::seconds_since(t0);
    return s;
}

}  // namespace romforge::rom
