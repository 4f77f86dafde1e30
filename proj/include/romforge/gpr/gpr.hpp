#pragma once

// Gaussian process regression with a constant mean equal to the training-output mean,
// standardized inputs, and a single isotropic length scale fit by maximizing the log
// marginal likelihood.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romforge/error.hpp"
#include "romforge/gpr/kernel.hpp"
#include "romforge/random.hpp"

namespace romforge::gpr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Standardization {
    Matrix z;      ///< n x p standard scores
    Vector mean;   ///< per column
    Vector scale;  ///< per column population std, 1 for constant columns
};

/// Column-wise standard scores. Constant columns record scale 1 and map to zeros.
inline Standardization standardize_inputs(const Matrix& raw) {
    const Index n = raw.rows(), p = raw.cols();
    if (n < 1) throw ArgumentError("standardize_inputs: no samples");
    Standardization out{Matrix(n, p), Vector(p), Vector(p)};
    for (Index j = 0; j < p; ++j) {
        const double mean = raw.col(j).mean();
        const double var = (raw.col(j).array() - mean).square().mean();
        double sd = std::sqrt(var);
        // Spread at rounding level of the mean counts as constant.
        if (!(sd > 1e-14 * std::max(1.0, std::abs(mean)))) sd = 1.0;
        out.mean[j] = mean;
        out.scale[j] = sd;
        out.z.col(j) = (raw.col(j).array() - mean) / sd;
    }
    return out;
}

inline Matrix kernel_matrix(const Matrix& za, const Matrix& zb, const KernelSpec& spec) {
    Matrix k(za.rows(), zb.rows());
    for (Index i = 0; i < za.rows(); ++i)
        for (Index j = 0; j < zb.rows(); ++j)
            k(i, j) = kernel_value(spec, (za.row(i) - zb.row(j)).norm());
    return k;
}

/// In-place lower Cholesky factorization; returns false on a nonpositive pivot.
inline bool cholesky_lower(Matrix& a) {
    const Index n = a.rows();
    for (Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Index k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
        for (Index i = 0; i < j; ++i) a(i, j) = 0.0;
    }
    return true;
}

struct CholeskyResult {
    Matrix factor;
    double diagonal_shift;  ///< total added to the kernel diagonal
    bool jittered;          ///< shift exceeded the requested noise
};

/// Factors K + noise I, escalating the diagonal shift x10 up to 1e-4 on failure.
inline std::optional<CholeskyResult> factor_with_jitter(const Matrix& k, double noise,
                                                        bool allow_jitter) {
    std::vector<double> ladder{noise};
    if (allow_jitter) {
        for (double j = std::max(noise, 1e-12) * 10.0; j <= 1e-4 * (1.0 + 1e-12); j *= 10.0)
            ladder.push_back(j);
    }
    for (double shift : ladder) {
        Matrix a = k;
        a.diagonal().array() += shift;
        if (cholesky_lower(a)) return CholeskyResult{std::move(a), shift, shift != noise};
    }
    return std::nullopt;
}

struct LikelihoodValue {
    double value;
    double dlog_length;  ///< derivative with respect to log(l)
};

namespace detail {

/// Log marginal likelihood of centered targets given a Cholesky factor of K + s I.
inline LikelihoodValue likelihood_from_factor(const Matrix& chol, const Vector& residual,
                                              const Matrix& z, const KernelSpec& spec,
                                              bool with_gradient) {
    const Index n = residual.size();
    const auto lower = chol.triangularView<Eigen::Lower>();
    const auto upper = chol.transpose().triangularView<Eigen::Upper>();
    Vector alpha = lower.solve(residual);
    upper.solveInPlace(alpha);
    double log_det = 0.0;
    for (Index i = 0; i < n; ++i) log_det += std::log(chol(i, i));
    log_det *= 2.0;
    const double value = -0.5 * residual.dot(alpha) - 0.5 * log_det -
                         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    double grad = 0.0;
    if (with_gradient) {
        // 0.5 tr((alpha alpha^T - K^-1) dK/dlog l)
        Matrix kinv = Matrix::Identity(n, n);
        lower.solveInPlace(kinv);
        upper.solveInPlace(kinv);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double dk = kernel_log_scale_derivative(spec, (z.row(i) - z.row(j)).norm());
                grad += (alpha[i] * alpha[j] - kinv(i, j)) * dk;
            }
        grad *= 0.5;
    }
    return {value, grad};
}

}  // namespace detail

/// Log marginal likelihood of y under the GP prior with constant mean m = mean(y):
/// -1/2 r^T (K + noise I)^-1 r - 1/2 log|K + noise I| - n/2 log 2 pi, r = y - m.
/// Throws IllConditionedError if the jitter ladder cannot factor the matrix.
inline double log_marginal_likelihood(const Matrix& z, const Vector& y, const KernelSpec& spec,
                                      double noise) {
    validate(spec);
    if (z.rows() != y.size()) throw ArgumentError("log_marginal_likelihood: size mismatch");
    const Vector residual = y.array() - y.mean();
    auto chol = factor_with_jitter(kernel_matrix(z, z, spec), noise, true);
    if (!chol)
        throw IllConditionedError("kernel matrix not positive definite after jitter up to 1e-4");
    return detail::likelihood_from_factor(chol->factor, residual, z, spec, false).value;
}

struct GprConfig {
    KernelFamily family = KernelFamily::Matern;
    double nu = 2.5;
    double noise = 1e-10;
    int restarts = 8;
    int max_iterations = 200;
    double gradient_tolerance = 1e-8;
    double length_scale_min = 1e-2;
    double length_scale_max = 1e2;
};

struct GprModel {
    Vector z_mean;
    Vector z_scale;
    Matrix z;        ///< standardized training inputs, n x p
    double y_mean = 0.0;
    Vector alpha;    ///< (K + s I)^-1 (y - m)
    Matrix chol;     ///< lower factor of K + s I
    KernelSpec kernel;
    double noise = 0.0;
    double diagonal_shift = 0.0;  ///< noise plus any jitter used
    double log_likelihood = 0.0;
    std::vector<std::string> warnings;

    Index input_dim() const { return z.cols(); }
    Index sample_count() const { return z.rows(); }
};

/// Posterior mean m + kappa(z*, Z) alpha at a raw (unstandardized) input.
inline double predict_mean(const GprModel& model, const Eigen::Ref<const Vector>& raw) {
    if (raw.size() != model.input_dim())
        throw ArgumentError("predict_mean: input has dimension " + std::to_string(raw.size()) +
                            ", model expects " + std::to_string(model.input_dim()));
    const Vector zs = (raw - model.z_mean).cwiseQuotient(model.z_scale);
    double acc = 0.0;
    for (Index i = 0; i < model.z.rows(); ++i)
        acc += kernel_value(model.kernel, (model.z.row(i).transpose() - zs).norm()) *
               model.alpha[i];
    return model.y_mean + acc;
}

inline double predict_mean(const GprModel& model, const std::vector<double>& raw) {
    return predict_mean(model, Eigen::Map<const Vector>(raw.data(), static_cast<Index>(raw.size())));
}

namespace detail {

struct Objective {
    const Matrix& z;
    const Vector& residual;
    const GprConfig& config;

    KernelSpec spec(double log_l) const {
        return KernelSpec{config.family, std::exp(log_l), config.nu};
    }

    /// nullopt when K + noise I cannot be factored without jitter.
    std::optional<LikelihoodValue> operator()(double log_l) const {
        const KernelSpec s = spec(log_l);
        auto chol = factor_with_jitter(kernel_matrix(z, z, s), config.noise, false);
        if (!chol) return std::nullopt;
        LikelihoodValue v = likelihood_from_factor(chol->factor, residual, z, s, true);
        if (!std::isfinite(v.value) || !std::isfinite(v.dlog_length)) {
            std::ostringstream msg;
            msg << "non-finite log marginal likelihood at length scale " << s.length_scale;
            throw InvalidDataError(msg.str());
        }
        return v;
    }
};

struct AscentResult {
    double log_l;
    double value;
};

/// Bounded gradient ascent in log(l) with step doubling and halving. Every accepted step
/// strictly increases the objective.
inline AscentResult ascend(const Objective& f, double log_l, LikelihoodValue current, double lo,
                           double hi) {
    double step = 1.0;
    for (int it = 0; it < f.config.max_iterations; ++it) {
        const double g = current.dlog_length;
        const bool pinned = (log_l <= lo && g < 0.0) || (log_l >= hi && g > 0.0);
        if (std::abs(g) < f.config.gradient_tolerance || pinned) break;
        bool accepted = false;
        while (step > 1e-12) {
            const double move = std::clamp(step * g, -2.0, 2.0);
            const double trial = std::clamp(log_l + move, lo, hi);
            if (trial == log_l) {
                step *= 0.5;
                continue;
            }
            auto v = f(trial);
            if (v && v->value > current.value) {
                log_l = trial;
                current = *v;
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return {log_l, current.value};
}

}  // namespace detail

/// Fits one GP: standardizes inputs, maximizes the log marginal likelihood over log(l)
/// from `restarts` log-uniform starting points, then factors the final kernel matrix.
inline GprModel fit(const Matrix& inputs, const Vector& outputs, const GprConfig& config,
                    std::uint64_t seed) {
    const Index n = inputs.rows();
    if (n < 1) throw ArgumentError("gpr fit: no training samples");
    if (outputs.size() != n)
        throw ArgumentError("gpr fit: " + std::to_string(n) + " inputs but " +
                            std::to_string(outputs.size()) + " outputs");
    if (!inputs.allFinite() || !outputs.allFinite())
        throw InvalidDataError("gpr fit: training data contains non-finite values");
    if (!(config.noise >= 0.0)) throw ArgumentError("gpr fit: noise must be nonnegative");
    if (config.restarts < 1) throw ArgumentError("gpr fit: need at least one restart");
    if (!(config.length_scale_min > 0.0 && config.length_scale_min <= config.length_scale_max))
        throw ArgumentError("gpr fit: invalid length-scale bounds");
    validate(KernelSpec{config.family, 1.0, config.nu});

    Standardization st = standardize_inputs(inputs);
    const double y_mean = outputs.mean();
    const Vector residual = outputs.array() - y_mean;

    const double lo = std::log(config.length_scale_min), hi = std::log(config.length_scale_max);
    detail::Objective objective{st.z, residual, config};
    Rng rng(seed);

    std::optional<detail::AscentResult> best;
    for (int r = 0; r < config.restarts; ++r) {
        const double start = lo + (hi - lo) * uniform01(rng);
        auto v0 = objective(start);
        if (!v0) continue;
        detail::AscentResult res = detail::ascend(objective, start, *v0, lo, hi);
        if (!best || res.value > best->value) best = res;
    }

    GprModel model;
    if (!best) {
        model.warnings.push_back(
            "no restart produced a factorizable kernel matrix; using the smallest length scale");
        best = detail::AscentResult{lo, -std::numeric_limits<double>::infinity()};
    }

    model.kernel = objective.spec(best->log_l);
    auto chol = factor_with_jitter(kernel_matrix(st.z, st.z, model.kernel), config.noise, true);
    if (!chol) {
        std::ostringstream msg;
        msg << "kernel matrix not positive definite at length scale " << model.kernel.length_scale
            << " after jitter up to 1e-4";
        throw IllConditionedError(msg.str());
    }
    if (chol->jittered) {
        std::ostringstream msg;
        msg << "kernel diagonal jittered to " << chol->diagonal_shift;
        model.warnings.push_back(msg.str());
    }

    const Matrix& factor = chol->factor;
    model.alpha = factor.triangularView<Eigen::Lower>().solve(residual);
    factor.transpose().triangularView<Eigen::Upper>().solveInPlace(model.alpha);
    model.z_mean = std::move(st.mean);
    model.z_scale = std::move(st.scale);
    model.z = std::move(st.z);
    model.y_mean = y_mean;
    model.chol = std::move(chol->factor);
    model.noise = config.noise;
    model.diagonal_shift = chol->diagonal_shift;
    model.log_likelihood =
        detail::likelihood_from_factor(model.chol, residual, model.z, model.kernel, false).value;
    return model;
}

}  // namespace romforge::gpr
