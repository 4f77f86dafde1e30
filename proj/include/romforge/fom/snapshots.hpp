#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "romforge/dataset.hpp"
#include "romforge/error.hpp"
#include "romforge/fom/cavity.hpp"
#include "romforge/fom/lhs.hpp"
#include "romforge/parallel.hpp"

namespace romforge::fom {

struct SnapshotConfig {
    std::size_t nx = 32, ny = 32;
    double lid_speed = 1.0;
    SolverConfig solver;
    std::size_t lhs_candidates = 50;
    bool allow_partial = false;
    std::size_t threads = 0;  ///< 0: worker_count()
};

struct SolveReport {
    std::size_t index = 0;
    bool converged = false;
    std::size_t iterations = 0;
    double residual = 0.0;
    std::string message;
};

struct GeneratedSnapshots {
    Dataset data;  ///< channels u, v
    std::vector<SolveReport> reports;  ///< one per design point, design-table order
    std::vector<std::vector<double>> design;  ///< full design including failed points
};

/// Cavity parameters for a design row (Lx, Ly, Re).
inline CavityParams cavity_params(const std::vector<double>& mu, const SnapshotConfig& cfg) {
    if (mu.size() != 3)
        throw ArgumentError("cavity design points need 3 values (Lx, Ly, Re), got " + std::to_string(mu.size()));
    CavityParams p;
    p.lx = mu[0];
    p.ly = mu[1];
    p.re = mu[2];
    p.lid_speed = cfg.lid_speed;
    p.nx = cfg.nx;
    p.ny = cfg.ny;
    return p;
}

/// Solves every design point (in parallel, one solve per worker) and stacks u and v as
/// two channels. Failed solves are reported by index; unless allow_partial is set any
/// failure rejects the dataset with a ConvergenceError.
inline GeneratedSnapshots solve_design(const std::vector<std::vector<double>>& design,
                                       const SnapshotConfig& cfg) {
    if (design.empty()) throw ArgumentError("design table is empty");
    const std::size_t n = design.size(), big_n = cfg.nx * cfg.ny;
    for (const auto& mu : design) cavity_params(mu, cfg).validate();

    std::vector<FieldPair> fields(n);
    std::vector<SolveReport> reports(n);
    parallel_for(
        n,
        [&](std::size_t i) {
            SolveReport& r = reports[i];
            r.index = i;
            SolveStats st;
            try {
                fields[i] = solve_cavity(cavity_params(design[i], cfg), cfg.solver, &st);
                r.converged = true;
            } catch (const ConvergenceError& e) {
                r.message = e.what();
                st.iterations = e.iterations();
                st.residual = e.final_residual();
            }
            r.iterations = st.iterations;
            r.residual = st.residual;
        },
        cfg.threads);

    std::vector<std::size_t> ok;
    std::string failed;
    double worst = 0.0;
    for (const auto& r : reports) {
        if (r.converged) {
            ok.push_back(r.index);
        } else {
            failed += (failed.empty() ? "" : ", ") + std::to_string(r.index);
            worst = std::max(worst, r.residual);
        }
    }
    if (!failed.empty() && !cfg.allow_partial)
        throw ConvergenceError("cavity solves failed for design rows " + failed, worst, 0);
    if (ok.empty()) throw ConvergenceError("every cavity solve failed", worst, 0);

    GeneratedSnapshots out;
    out.design = design;
    out.reports = std::move(reports);
    Dataset& d = out.data;
    d.param_names = {"Lx", "Ly", "Re"};
    d.ny = cfg.ny;
    d.nx = cfg.nx;
    d.channels.assign(2, Eigen::MatrixXd(static_cast<Eigen::Index>(big_n), static_cast<Eigen::Index>(ok.size())));
    for (std::size_t j = 0; j < ok.size(); ++j) {
        const FieldPair& f = fields[ok[j]];
        d.params.push_back(design[ok[j]]);
        for (std::size_t r = 0; r < big_n; ++r) {
            d.channels[0](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = f.u[r];
            d.channels[1](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = f.v[r];
        }
    }
    return out;
}

/// LHS design over `space` followed by solve_design.
inline GeneratedSnapshots generate_snapshots(const ParameterSpace& space, std::size_t n,
                                             std::uint64_t seed, const SnapshotConfig& cfg) {
    if (space.dim() != 3) throw ArgumentError("the cavity solver expects a 3-dimensional design space");
    return solve_design(lhs_sample(space, n, seed, cfg.lhs_candidates), cfg);
}

}  // namespace romforge::fom
