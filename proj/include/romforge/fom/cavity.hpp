#pragma once

// Steady lid-driven cavity in streamfunction-vorticity form on a uniform nodal grid.
//
//   u . grad(omega) = nu lap(omega),   lap(psi) = -omega,   u = psi_y, v = -psi_x
//
// psi and omega live on the (nx+1) x (ny+1) grid nodes; psi = 0 on every wall and the
// wall vorticity follows Thom's formula. Advection is first-order upwind in the implicit
// operator with a lagged correction toward central differences (deferred correction).
// Velocities are reported at the nx x ny cell centres.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "romforge/error.hpp"

namespace romforge::fom {

struct CavityParams {
    double lx = 1.0;
    double ly = 1.0;
    double re = 100.0;
    double lid_speed = 1.0;
    std::size_t nx = 32;  ///< cells along x
    std::size_t ny = 32;  ///< cells along y

    void validate() const {
        if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
            throw ArgumentError("cavity edge lengths must be positive and finite");
        if (!(re > 0.0) || !std::isfinite(re)) throw ArgumentError("Reynolds number must be positive");
        if (!std::isfinite(lid_speed)) throw ArgumentError("lid speed must be finite");
        if (nx < 8 || ny < 8)
            throw ArgumentError("cavity grid must have at least 8 cells per direction, got " +
                                std::to_string(nx) + "x" + std::to_string(ny));
    }
};

struct SolverConfig {
    double tolerance = 1e-6;
    std::size_t max_iterations = 50000;
    double vorticity_relaxation = 0.7;
    double sor_factor = 1.5;
    /// Upper bound on the central-difference weight of the advection correction.
    double max_central_weight = 1.0;
};

/// Cell-centred velocity fields, row-major with row 0 at the bottom wall (y = ly/(2 ny)).
struct FieldPair {
    std::size_t nx = 0, ny = 0;
    std::vector<double> u, v;
};

struct SolveStats {
    std::size_t iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;  ///< one entry per iteration
};

/// nu = max(lx, ly) |U| / Re. A stationary lid uses the unit-speed value so the operator
/// stays well defined.
inline double reynolds_to_viscosity(const CavityParams& p) {
    if (!(p.re > 0.0)) throw ArgumentError("Reynolds number must be positive");
    const double speed = p.lid_speed == 0.0 ? 1.0 : std::abs(p.lid_speed);
    return std::max(p.lx, p.ly) * speed / p.re;
}

namespace detail {

struct NodalGrid {
    std::size_t nx, ny;  // cells
    std::vector<double> data;

    NodalGrid(std::size_t cx, std::size_t cy) : nx(cx), ny(cy), data((cx + 1) * (cy + 1), 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return data[j * (nx + 1) + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data[j * (nx + 1) + i]; }
};

inline double max_abs(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline void apply_wall_vorticity(const NodalGrid& psi, NodalGrid& w, double hx, double hy, double lid) {
    const std::size_t nx = psi.nx, ny = psi.ny;
    for (std::size_t i = 1; i < nx; ++i) {
        w(i, 0) = -2.0 * psi(i, 1) / (hy * hy);
        w(i, ny) = -2.0 * (psi(i, ny - 1) + hy * lid) / (hy * hy);
    }
    for (std::size_t j = 1; j < ny; ++j) {
        w(0, j) = -2.0 * psi(1, j) / (hx * hx);
        w(nx, j) = -2.0 * psi(nx - 1, j) / (hx * hx);
    }
}

inline FieldPair cell_velocities(const NodalGrid& psi, double hx, double hy) {
    FieldPair f;
    f.nx = psi.nx;
    f.ny = psi.ny;
    f.u.resize(f.nx * f.ny);
    f.v.resize(f.nx * f.ny);
    for (std::size_t j = 0; j < f.ny; ++j)
        for (std::size_t i = 0; i < f.nx; ++i) {
            const double sw = psi(i, j), se = psi(i + 1, j), nw = psi(i, j + 1), ne = psi(i + 1, j + 1);
            f.u[j * f.nx + i] = ((nw - sw) + (ne - se)) / (2.0 * hy);
            f.v[j * f.nx + i] = -((se - sw) + (ne - nw)) / (2.0 * hx);
        }
    return f;
}

}  // namespace detail

/// Solves to the requested relative-change tolerance. The residual is the larger of the
/// max-norm iteration changes of omega and psi, each divided by the field's max norm.
inline FieldPair solve_cavity(const CavityParams& p, const SolverConfig& cfg = {},
                              SolveStats* stats = nullptr) {
    p.validate();
    if (!(cfg.tolerance > 0.0)) throw ArgumentError("solver tolerance must be positive");
    if (cfg.max_iterations == 0) throw ArgumentError("solver needs at least one iteration");
    if (!(cfg.vorticity_relaxation > 0.0 && cfg.vorticity_relaxation <= 1.0))
        throw ArgumentError("vorticity relaxation must lie in (0, 1]");
    if (!(cfg.sor_factor > 0.0 && cfg.sor_factor < 2.0))
        throw ArgumentError("SOR factor must lie in (0, 2)");

    const std::size_t nx = p.nx, ny = p.ny;
    const double hx = p.lx / static_cast<double>(nx), hy = p.ly / static_cast<double>(ny);
    const double nu = reynolds_to_viscosity(p);
    const double lid = p.lid_speed;
    const double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy);
    const double psi_diag = 2.0 * (ihx2 + ihy2);

    detail::NodalGrid psi(nx, ny), w(nx, ny), un(nx, ny), vn(nx, ny);
    if (stats) *stats = SolveStats{};
    double residual = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    constexpr double tiny = 1e-300;

    while (it < cfg.max_iterations) {
        ++it;
        detail::apply_wall_vorticity(psi, w, hx, hy, lid);
        for (std::size_t j = 1; j < ny; ++j)
            for (std::size_t i = 1; i < nx; ++i) {
                un(i, j) = (psi(i, j + 1) - psi(i, j - 1)) / (2.0 * hy);
                vn(i, j) = -(psi(i + 1, j) - psi(i - 1, j)) / (2.0 * hx);
            }

        double dw = 0.0, wmax = 0.0;
        for (std::size_t j = 1; j < ny; ++j)
            for (std::size_t i = 1; i < nx; ++i) {
                const double u = un(i, j), v = vn(i, j);
                const double we = w(i + 1, j), ww = w(i - 1, j), wn = w(i, j + 1), ws = w(i, j - 1);
                const double wp = w(i, j);
                const double ae = nu * ihx2 + std::max(-u, 0.0) / hx;
                const double aw = nu * ihx2 + std::max(u, 0.0) / hx;
                const double an = nu * ihy2 + std::max(-v, 0.0) / hy;
                const double as = nu * ihy2 + std::max(v, 0.0) / hy;
                const double ap = 2.0 * nu * (ihx2 + ihy2) + std::abs(u) / hx + std::abs(v) / hy;
                // Lagged correction: central minus upwind advection, weighted by the local
                // cell Peclet number so the blended operator stays diagonally dominant.
                const double pe = std::max(std::abs(u) * hx, std::abs(v) * hy) / nu;
                const double beta = pe > 0.0 ? std::min(cfg.max_central_weight, 2.0 / pe) : 0.0;
                const double cx = u * (we - ww) / (2.0 * hx) -
                                  (u > 0.0 ? u * (wp - ww) / hx : u * (we - wp) / hx);
                const double cy = v * (wn - ws) / (2.0 * hy) -
                                  (v > 0.0 ? v * (wp - ws) / hy : v * (wn - wp) / hy);
                const double target = (ae * we + aw * ww + an * wn + as * ws - beta * (cx + cy)) / ap;
                const double next = wp + cfg.vorticity_relaxation * (target - wp);
                dw = std::max(dw, std::abs(next - wp));
                wmax = std::max(wmax, std::abs(next));
                w(i, j) = next;
            }

        double dp = 0.0, pmax = 0.0;
        for (std::size_t j = 1; j < ny; ++j)
            for (std::size_t i = 1; i < nx; ++i) {
                const double gs = ((psi(i + 1, j) + psi(i - 1, j)) * ihx2 +
                                   (psi(i, j + 1) + psi(i, j - 1)) * ihy2 + w(i, j)) /
                                  psi_diag;
                const double next = psi(i, j) + cfg.sor_factor * (gs - psi(i, j));
                dp = std::max(dp, std::abs(next - psi(i, j)));
                pmax = std::max(pmax, std::abs(next));
                psi(i, j) = next;
            }

        wmax = std::max(wmax, detail::max_abs(w.data));
        residual = std::max(dw / std::max(wmax, tiny), dp / std::max(pmax, tiny));
        if (stats) stats->residual_history.push_back(residual);
        if (!std::isfinite(residual) || !std::isfinite(wmax) || wmax > 1e12)
            throw ConvergenceError("cavity solve diverged at iteration " + std::to_string(it) +
                                       " (Re=" + std::to_string(p.re) +
                                       " may exceed the stable range for this grid)",
                                   residual, it);
        if (residual <= cfg.tolerance) break;
    }
    if (stats) {
        stats->iterations = it;
        stats->residual = residual;
    }
    if (!(residual <= cfg.tolerance))
        throw ConvergenceError("cavity solve did not converge in " + std::to_string(it) +
                                   " iterations (final residual " + std::to_string(residual) + ")",
                               residual, it);
    detail::apply_wall_vorticity(psi, w, hx, hy, lid);
    return detail::cell_velocities(psi, hx, hy);
}

/// Discrete divergence d/dx(avg_y u) + d/dy(avg_x v) at interior grid nodes, max norm.
inline double max_divergence(const FieldPair& f, double lx, double ly) {
    const double hx = lx / static_cast<double>(f.nx), hy = ly / static_cast<double>(f.ny);
    double m = 0.0;
    for (std::size_t j = 1; j < f.ny; ++j)
        for (std::size_t i = 1; i < f.nx; ++i) {
            const auto at = [&](const std::vector<double>& a, std::size_t ci, std::size_t cj) {
                return a[cj * f.nx + ci];
            };
            const double ue = 0.5 * (at(f.u, i, j) + at(f.u, i, j - 1));
            const double uw = 0.5 * (at(f.u, i - 1, j) + at(f.u, i - 1, j - 1));
            const double vn = 0.5 * (at(f.v, i, j) + at(f.v, i - 1, j));
            const double vs = 0.5 * (at(f.v, i, j - 1) + at(f.v, i - 1, j - 1));
            m = std::max(m, std::abs((ue - uw) / hx + (vn - vs) / hy));
        }
    return m;
}

}  // namespace romforge::fom
