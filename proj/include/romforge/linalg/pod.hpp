#pragma once

// Snapshot matrices, truncated SVD through the Gram matrix, and POD bases.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romforge/error.hpp"

namespace romforge::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Column-stacked solution states (N x n) with one design-parameter vector per column.
struct SnapshotMatrix {
    Matrix data;
    std::vector<std::vector<double>> params;

    Index state_dim() const { return data.rows(); }
    Index sample_count() const { return data.cols(); }
    std::size_t param_dim() const { return params.empty() ? 0 : params.front().size(); }

    void validate() const {
        if (data.rows() < 1 || data.cols() < 1)
            throw ArgumentError("snapshot matrix must have at least one row and one column");
        if (!data.allFinite()) {
            for (Index j = 0; j < data.cols(); ++j)
                if (!data.col(j).allFinite())
                    throw InvalidDataError("snapshot column " + std::to_string(j) +
                                           " contains non-finite values");
        }
        if (params.size() != static_cast<std::size_t>(data.cols()))
            throw ArgumentError("snapshot matrix has " + std::to_string(data.cols()) +
                                " columns but " + std::to_string(params.size()) +
                                " parameter vectors");
        for (const auto& mu : params)
            if (mu.size() != params.front().size())
                throw ArgumentError("parameter vectors have inconsistent dimension");
    }
};

/// Rank-k orthonormal basis plus the full singular spectrum it was cut from.
struct PodBasis {
    Matrix vectors;
    std::vector<double> singular_values;

    Index rank() const { return vectors.cols(); }
    Index state_dim() const { return vectors.rows(); }
};

struct SymmetricEigen {
    Vector values;   ///< descending
    Matrix vectors;  ///< column j pairs with values[j]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenpairs are returned in
/// descending order of eigenvalue; equal eigenvalues keep their rotation-output order.
inline SymmetricEigen jacobi_eigen(Matrix a, int max_sweeps = 100) {
    const Index n = a.rows();
    if (a.cols() != n) throw ArgumentError("jacobi_eigen: matrix must be square");
    Matrix v = Matrix::Identity(n, n);

    const double scale = a.norm();
    for (int sweep = 0; sweep < max_sweeps && scale > 0.0; ++sweep) {
        double off = 0.0;
        for (Index q = 1; q < n; ++q)
            for (Index p = 0; p < q; ++p) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= 1e-15 * scale) break;

        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index i, Index j) { return a(i, i) > a(j, j); });
    SymmetricEigen out{Vector(n), Matrix(n, n)};
    for (Index j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        out.vectors.col(j) = v.col(order[j]);
    }
    return out;
}

namespace detail {

/// Flip so the largest-magnitude entry (first on ties) is positive.
inline bool needs_flip(const Eigen::Ref<const Vector>& x) {
    Index best = 0;
    for (Index i = 1; i < x.size(); ++i)
        if (std::abs(x[i]) > std::abs(x[best])) best = i;
    return x.size() > 0 && x[best] < 0.0;
}

/// Orthonormalizes column j against columns [0, j). Returns false when the residual
/// vanishes.
inline bool orthonormalize_column(Matrix& q, Index j) {
    for (int pass = 0; pass < 2; ++pass)
        for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    const double norm = q.col(j).norm();
    if (!(norm > 1e-12)) return false;
    q.col(j) /= norm;
    return true;
}

}  // namespace detail

struct TruncatedSvd {
    Matrix u;                    ///< N x k
    std::vector<double> sigma;   ///< all n singular values, nonincreasing
    Matrix v;                    ///< n x k
};

/// Truncated SVD of an N x n matrix via the eigendecomposition of its n x n Gram matrix.
/// Singular values are recomputed as |S v_j| for accuracy near zero; left vectors are
/// S v_j / sigma_j, with Gram-Schmidt completion for sigma_j < 1e-10 sigma_1.
inline TruncatedSvd truncated_svd(const Matrix& s, Index k) {
    const Index rows = s.rows(), n = s.cols();
    if (rows < 1 || n < 1) throw ArgumentError("truncated_svd: empty matrix");
    if (!s.allFinite()) throw InvalidDataError("truncated_svd: matrix contains non-finite values");
    if (k < 1 || k > n)
        throw ArgumentError("truncated_svd: rank " + std::to_string(k) + " outside [1, " +
                            std::to_string(n) + "]");
    if (k > rows)
        throw ArgumentError("truncated_svd: rank " + std::to_string(k) +
                            " exceeds state dimension " + std::to_string(rows));

    const Matrix gram = s.transpose() * s;
    SymmetricEigen eig = jacobi_eigen(gram);

    Matrix sv = s * eig.vectors;
    std::vector<double> sigma(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) sigma[j] = sv.col(j).norm();

    // The Gram route can swap near-equal modes; reorder by the recomputed values.
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return sigma[a] > sigma[b]; });

    TruncatedSvd out;
    out.sigma.resize(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) out.sigma[j] = sigma[order[j]];
    out.u.resize(rows, k);
    out.v.resize(n, k);

    const double sigma1 = out.sigma.front();
    Index next_unit = 0;
    for (Index j = 0; j < k; ++j) {
        const Index src = order[j];
        out.v.col(j) = eig.vectors.col(src);
        const double sj = out.sigma[j];
        if (sj > 0.0 && sj >= 1e-10 * sigma1) {
            out.u.col(j) = sv.col(src) / sj;
            if (!detail::orthonormalize_column(out.u, j))
                throw InvalidDataError("truncated_svd: lost orthogonality at mode " +
                                       std::to_string(j));
        } else {
            // Complete with canonical directions orthogonal to the leading columns.
            bool done = false;
            while (!done && next_unit < rows) {
                out.u.col(j) = Vector::Unit(rows, next_unit++);
                done = detail::orthonormalize_column(out.u, j);
            }
            if (!done) throw InvalidDataError("truncated_svd: cannot complete left basis");
        }
        if (detail::needs_flip(out.u.col(j))) {
            out.u.col(j) = -out.u.col(j);
            out.v.col(j) = -out.v.col(j);
        }
    }
    return out;
}

inline TruncatedSvd truncated_svd(const SnapshotMatrix& s, Index k) {
    s.validate();
    return truncated_svd(s.data, k);
}

namespace detail {

inline void validate_spectrum(const std::vector<double>& sigma) {
    if (sigma.empty()) throw ArgumentError("singular value list is empty");
    double total = 0.0;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
        if (!std::isfinite(sigma[j]) || sigma[j] < 0.0)
            throw InvalidDataError("singular value " + std::to_string(j) +
                                   " is negative or non-finite");
        if (j > 0 && sigma[j] > sigma[j - 1] * (1.0 + 1e-12) + 1e-300)
            throw InvalidDataError("singular values are not sorted nonincreasing");
        total += sigma[j];
    }
    if (total == 0.0) throw DegenerateSpectrumError("all singular values are zero");
}

}  // namespace detail

/// E(k): fraction of the summed singular values captured by the first k modes.
inline double relative_information_content(const std::vector<double>& sigma, std::size_t k) {
    detail::validate_spectrum(sigma);
    if (k < 1 || k > sigma.size())
        throw ArgumentError("rank " + std::to_string(k) + " outside [1, " +
                            std::to_string(sigma.size()) + "]");
    double partial = 0.0, total = 0.0;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
        total += sigma[j];
        if (j < k) partial += sigma[j];
    }
    return k == sigma.size() ? 1.0 : std::min(1.0, partial / total);
}

/// Smallest k with E(k) >= epsilon.
inline std::size_t choose_rank(const std::vector<double>& sigma, double epsilon) {
    detail::validate_spectrum(sigma);
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw ArgumentError("rank threshold must lie in [0, 1)");
    for (std::size_t k = 1; k <= sigma.size(); ++k)
        if (relative_information_content(sigma, k) >= epsilon) return k;
    return sigma.size();
}

/// POD basis of rank k: the first k left singular vectors of S.
inline PodBasis compute_pod_basis(const SnapshotMatrix& s, Index k) {
    TruncatedSvd svd = truncated_svd(s, k);
    return PodBasis{std::move(svd.u), std::move(svd.sigma)};
}

/// Orthogonal projection Psi (Psi^T x).
inline Vector pod_project(const PodBasis& basis, const Eigen::Ref<const Vector>& x) {
    if (x.size() != basis.state_dim())
        throw ArgumentError("pod_project: state has length " + std::to_string(x.size()) +
                            ", basis expects " + std::to_string(basis.state_dim()));
    const Vector coeffs = basis.vectors.transpose() * x;
    return basis.vectors * coeffs;
}

/// Sum over snapshots of |x - x_hat|^2 / |x|^2.
inline double pod_projection_error(const SnapshotMatrix& s, const PodBasis& basis) {
    s.validate();
    if (s.state_dim() != basis.state_dim())
        throw ArgumentError("pod_projection_error: basis and snapshots differ in state dimension");
    double total = 0.0;
    for (Index i = 0; i < s.sample_count(); ++i) {
        const double denom = s.data.col(i).squaredNorm();
        if (denom == 0.0)
            throw InvalidDataError("pod_projection_error: snapshot column " + std::to_string(i) +
                                   " has zero norm");
        total += (s.data.col(i) - pod_project(basis, s.data.col(i))).squaredNorm() / denom;
    }
    return total;
}

/// Projection error of an arbitrary orthonormal basis given as a matrix.
inline double pod_projection_error(const SnapshotMatrix& s, const Matrix& orthonormal_basis) {
    return pod_projection_error(s, PodBasis{orthonormal_basis, {}});
}

}  // namespace romforge::linalg
