#pragma once

// Min-max scaling of state channels into [0, 1] and the grid reshape used to feed the
// autoencoder.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romforge/error.hpp"
#include "romforge/nn/tensor.hpp"

namespace romforge::rom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ScalingMode { PerChannel, PerFeature };

inline std::string to_string(ScalingMode m) { return m == ScalingMode::PerChannel ? "channel" : "feature"; }

inline ScalingMode scaling_mode_from_string(const std::string& s) {
    if (s == "channel") return ScalingMode::PerChannel;
    if (s == "feature") return ScalingMode::PerFeature;
    throw ArgumentError("unknown scaling mode '" + s + "' (expected channel or feature)");
}

/// Per channel: min and max over all cells and snapshots (PerChannel, length-1 vectors)
/// or per cell over snapshots (PerFeature, length-N vectors).
struct ScalingInfo {
    ScalingMode mode = ScalingMode::PerChannel;
    std::vector<Vector> min, max;
    std::vector<std::vector<bool>> degenerate;  ///< max == min; denominator replaced by 1

    std::size_t channel_count() const { return min.size(); }

    double lo(std::size_t c, Eigen::Index row) const {
        return mode == ScalingMode::PerChannel ? min[c](0) : min[c](row);
    }
    double span(std::size_t c, Eigen::Index row) const {
        const Eigen::Index r = mode == ScalingMode::PerChannel ? 0 : row;
        const double d = max[c](r) - min[c](r);
        return d > 0.0 ? d : 1.0;
    }
};

inline ScalingInfo minmax_fit(const std::vector<Matrix>& channels, ScalingMode mode = ScalingMode::PerChannel) {
    if (channels.empty()) throw ArgumentError("min-max scaling needs at least one channel");
    ScalingInfo info;
    info.mode = mode;
    for (const Matrix& m : channels) {
        if (m.size() == 0) throw ArgumentError("min-max scaling of an empty channel");
        if (!m.allFinite()) throw InvalidDataError("min-max scaling input contains non-finite values");
        Vector lo, hi;
        if (mode == ScalingMode::PerChannel) {
            lo = Vector::Constant(1, m.minCoeff());
            hi = Vector::Constant(1, m.maxCoeff());
        } else {
            lo = m.rowwise().minCoeff();
            hi = m.rowwise().maxCoeff();
        }
        std::vector<bool> deg(static_cast<std::size_t>(lo.size()));
        for (Eigen::Index i = 0; i < lo.size(); ++i) deg[static_cast<std::size_t>(i)] = !(hi(i) > lo(i));
        info.min.push_back(std::move(lo));
        info.max.push_back(std::move(hi));
        info.degenerate.push_back(std::move(deg));
    }
    return info;
}

namespace detail {

inline void check_channel(const ScalingInfo& info, std::size_t c, const Matrix& m) {
    if (c >= info.channel_count())
        throw ArgumentError("scaling has " + std::to_string(info.channel_count()) +
                            " channels, requested channel " + std::to_string(c));
    if (info.mode == ScalingMode::PerFeature && m.rows() != info.min[c].size())
        throw ArgumentError("per-feature scaling fitted on " + std::to_string(info.min[c].size()) +
                            " features, got " + std::to_string(m.rows()));
}

}  // namespace detail

/// (x - min) / (max - min); values outside the fitted range leave [0, 1].
inline Matrix minmax_transform(const ScalingInfo& info, std::size_t c, const Matrix& m) {
    detail::check_channel(info, c, m);
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = (m(i, j) - info.lo(c, i)) / info.span(c, i);
    return out;
}

inline Matrix minmax_inverse(const ScalingInfo& info, std::size_t c, const Matrix& m) {
    detail::check_channel(info, c, m);
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = m(i, j) * info.span(c, i) + info.lo(c, i);
    return out;
}

struct ScaledChannels {
    std::vector<Matrix> channels;
    ScalingInfo info;
};

inline ScaledChannels minmax_fit_transform(const std::vector<Matrix>& channels,
                                           ScalingMode mode = ScalingMode::PerChannel) {
    ScaledChannels s;
    s.info = minmax_fit(channels, mode);
    for (std::size_t c = 0; c < channels.size(); ++c) s.channels.push_back(minmax_transform(s.info, c, channels[c]));
    return s;
}

/// Channels (each N x n, N = ny nx, row-major cells) to an (n, ny, nx, c) tensor.
inline nn::Tensor4 reshape_to_grid(const std::vector<Matrix>& channels, std::size_t ny, std::size_t nx) {
    if (channels.empty()) throw ArgumentError("reshape needs at least one channel");
    const Eigen::Index n_state = channels.front().rows(), n = channels.front().cols();
    if (ny == 0 || nx == 0 || static_cast<std::size_t>(n_state) != ny * nx)
        throw ArgumentError("state dimension " + std::to_string(n_state) + " does not match grid " +
                            std::to_string(ny) + "x" + std::to_string(nx));
    for (const Matrix& m : channels)
        if (m.rows() != n_state || m.cols() != n) throw ArgumentError("reshape: channel sizes differ");
    const std::size_t c = channels.size();
    nn::Tensor4 t(static_cast<std::size_t>(n), nn::Shape3{ny, nx, c});
    for (Eigen::Index b = 0; b < n; ++b) {
        double* dst = t.sample(static_cast<std::size_t>(b));
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double* src = channels[ch].col(b).data();
            for (Eigen::Index r = 0; r < n_state; ++r) dst[static_cast<std::size_t>(r) * c + ch] = src[r];
        }
    }
    return t;
}

/// Exact inverse of reshape_to_grid.
inline std::vector<Matrix> inverse_reshape(const nn::Tensor4& t) {
    const std::size_t c = t.shape.c, cells = t.shape.h * t.shape.w;
    std::vector<Matrix> out(c, Matrix(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(t.batch)));
    for (std::size_t b = 0; b < t.batch; ++b) {
        const double* src = t.sample(b);
        for (std::size_t ch = 0; ch < c; ++ch) {
            double* dst = out[ch].col(static_cast<Eigen::Index>(b)).data();
            for (std::size_t r = 0; r < cells; ++r) dst[r] = src[r * c + ch];
        }
    }
    return out;
}

}  // namespace romforge::rom
