#pragma once

#include <string>

#include <Eigen/Dense>

#include "romforge/error.hpp"

namespace romforge::rom {

/// Squared relative error ||x - y||^2 / ||x||^2.
inline double squared_relative_error(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size())
        throw ArgumentError("error metric: vectors have lengths " + std::to_string(x.size()) + " and " +
                            std::to_string(y.size()));
    const double ref = x.squaredNorm();
    if (!(ref > 0.0)) throw InvalidDataError("error metric: reference state has zero norm");
    return (x - y).squaredNorm() / ref;
}

/// Prediction error of a surrogate output x_tilde against the full-order state x.
inline double rom_error(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& x_tilde) {
    return squared_relative_error(x, x_tilde);
}

/// Error of representing x by its projection x_hat on a basis or manifold.
inline double projection_error(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& x_hat) {
    return squared_relative_error(x, x_hat);
}

}  // namespace romforge::rom
