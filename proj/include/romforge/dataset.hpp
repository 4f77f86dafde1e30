#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romforge/error.hpp"
#include "romforge/linalg/pod.hpp"

namespace romforge {

/// Snapshot set: one N x n matrix per state channel plus the n design points. ny, nx give
/// the structured-grid layout (row-major, N = ny nx); 0, 0 marks unstructured data.
struct Dataset {
    std::vector<std::string> param_names;
    std::vector<std::vector<double>> params;
    std::vector<Eigen::MatrixXd> channels;
    std::size_t ny = 0, nx = 0;

    std::size_t sample_count() const { return params.size(); }
    std::size_t param_dim() const { return params.empty() ? param_names.size() : params.front().size(); }
    std::size_t channel_count() const { return channels.size(); }
    std::size_t state_dim() const {
        return channels.empty() ? 0 : static_cast<std::size_t>(channels.front().rows());
    }
    bool structured() const { return ny > 0 && nx > 0; }

    void validate() const {
        if (channels.empty()) throw ArgumentError("dataset has no state channels");
        if (params.empty()) throw ArgumentError("dataset has no samples");
        const std::size_t p = params.front().size();
        if (p == 0) throw ArgumentError("dataset design points have zero dimension");
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].size() != p)
                throw ArgumentError("design point " + std::to_string(i) + " has dimension " +
                                    std::to_string(params[i].size()) + ", expected " + std::to_string(p));
        if (!param_names.empty() && param_names.size() != p)
            throw ArgumentError("dataset names " + std::to_string(param_names.size()) +
                                " parameters but design points have " + std::to_string(p));
        const auto n = static_cast<Eigen::Index>(params.size());
        const Eigen::Index rows = channels.front().rows();
        if (rows < 1) throw ArgumentError("dataset state dimension must be positive");
        for (std::size_t c = 0; c < channels.size(); ++c)
            if (channels[c].rows() != rows || channels[c].cols() != n)
                throw ArgumentError("channel " + std::to_string(c) + " is " +
                                    std::to_string(channels[c].rows()) + "x" +
                                    std::to_string(channels[c].cols()) + ", expected " +
                                    std::to_string(rows) + "x" + std::to_string(n));
        if ((ny == 0) != (nx == 0))
            throw ArgumentError("grid dimensions must both be zero or both be positive");
        if (structured() && ny * nx != static_cast<std::size_t>(rows))
            throw ArgumentError("grid " + std::to_string(ny) + "x" + std::to_string(nx) +
                                " does not match state dimension " + std::to_string(rows));
    }

    linalg::SnapshotMatrix channel(std::size_t c) const {
        if (c >= channels.size()) throw ArgumentError("channel index out of range");
        return linalg::SnapshotMatrix{channels[c], params};
    }

    /// Columns `indices` (in that order) of every channel.
    Dataset subset(const std::vector<std::size_t>& indices) const {
        Dataset out;
        out.param_names = param_names;
        out.ny = ny;
        out.nx = nx;
        out.params.reserve(indices.size());
        for (std::size_t i : indices) {
            if (i >= params.size()) throw ArgumentError("sample index " + std::to_string(i) + " out of range");
            out.params.push_back(params[i]);
        }
        for (const auto& m : channels) {
            Eigen::MatrixXd sub(m.rows(), static_cast<Eigen::Index>(indices.size()));
            for (std::size_t j = 0; j < indices.size(); ++j)
                sub.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(indices[j]));
            out.channels.push_back(std::move(sub));
        }
        return out;
    }
};

}  // namespace romforge
