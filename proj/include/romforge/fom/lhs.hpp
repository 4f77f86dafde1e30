#pragma once

// Latin hypercube designs. The maximin variant draws several stratified candidates and
// keeps the one with the largest minimum pairwise distance (in unit-cube coordinates),
// breaking ties by the smallest maximum absolute column correlation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/random.hpp"

namespace romforge::fom {

struct Bounds {
    double lower = 0.0;
    double upper = 1.0;
};

struct ParameterSpace {
    std::vector<Bounds> bounds;
    std::vector<std::string> names;

    std::size_t dim() const { return bounds.size(); }

    void validate() const {
        if (bounds.empty()) throw ArgumentError("parameter space needs at least one dimension");
        if (!names.empty() && names.size() != bounds.size())
            throw ArgumentError("parameter space has " + std::to_string(bounds.size()) +
                                " bounds but " + std::to_string(names.size()) + " names");
        for (std::size_t d = 0; d < bounds.size(); ++d)
            if (!(bounds[d].lower < bounds[d].upper) || !std::isfinite(bounds[d].lower) ||
                !std::isfinite(bounds[d].upper))
                throw ArgumentError("parameter dimension " + std::to_string(d) +
                                    " needs finite bounds with lower < upper");
    }
};

/// Default cavity design space: (Lx, Ly, Re) in [1,2] x [1,2] x [100,400].
inline ParameterSpace cavity_space() {
    return ParameterSpace{{{1.0, 2.0}, {1.0, 2.0}, {100.0, 400.0}}, {"Lx", "Ly", "Re"}};
}

namespace detail {

/// One stratified draw in the unit cube, rows = samples.
inline std::vector<std::vector<double>> stratified_unit(std::size_t n, std::size_t p, Rng& rng) {
    std::vector<std::vector<double>> u(n, std::vector<double>(p));
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < p; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        shuffle(perm, rng);
        for (std::size_t i = 0; i < n; ++i)
            u[i][d] = (static_cast<double>(perm[i]) + uniform01(rng)) / static_cast<double>(n);
    }
    return u;
}

inline double min_pairwise_distance(const std::vector<std::vector<double>>& u) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < u.size(); ++a)
        for (std::size_t b = a + 1; b < u.size(); ++b) {
            double s = 0.0;
            for (std::size_t d = 0; d < u[a].size(); ++d) s += (u[a][d] - u[b][d]) * (u[a][d] - u[b][d]);
            best = std::min(best, std::sqrt(s));
        }
    return best;
}

inline double max_abs_correlation(const std::vector<std::vector<double>>& u) {
    const std::size_t n = u.size(), p = n ? u[0].size() : 0;
    if (n < 2) return 0.0;
    std::vector<double> mean(p, 0.0), sd(p, 0.0);
    for (const auto& row : u)
        for (std::size_t d = 0; d < p; ++d) mean[d] += row[d] / static_cast<double>(n);
    for (const auto& row : u)
        for (std::size_t d = 0; d < p; ++d) sd[d] += (row[d] - mean[d]) * (row[d] - mean[d]);
    double worst = 0.0;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b) {
            double c = 0.0;
            for (const auto& row : u) c += (row[a] - mean[a]) * (row[b] - mean[b]);
            const double den = std::sqrt(sd[a] * sd[b]);
            if (den > 0.0) worst = std::max(worst, std::abs(c / den));
        }
    return worst;
}

}  // namespace detail

/// n design points (rows) inside `space`. Every dimension has exactly one point in each
/// of its n equal-width strata. candidates = 1 gives the plain stratified draw.
inline std::vector<std::vector<double>> lhs_sample(const ParameterSpace& space, std::size_t n,
                                                   std::uint64_t seed, std::size_t candidates = 50) {
    space.validate();
    if (n < 1) throw ArgumentError("LHS needs at least one sample");
    if (candidates < 1) throw ArgumentError("LHS needs at least one candidate design");
    const std::size_t p = space.dim();
    Rng rng(seed);
    std::vector<std::vector<double>> best;
    double best_dist = -1.0, best_corr = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates; ++c) {
        auto u = detail::stratified_unit(n, p, rng);
        if (candidates == 1) {
            best = std::move(u);
            break;
        }
        const double dist = n > 1 ? detail::min_pairwise_distance(u) : 0.0;
        const double corr = detail::max_abs_correlation(u);
        if (dist > best_dist || (dist == best_dist && corr < best_corr)) {
            best = std::move(u);
            best_dist = dist;
            best_corr = corr;
        }
    }
    for (auto& row : best)
        for (std::size_t d = 0; d < p; ++d) {
            const Bounds& b = space.bounds[d];
            // Clamp guards the top edge against rounding in lower + u (upper - lower).
            row[d] = std::min(b.upper, b.lower + row[d] * (b.upper - b.lower));
        }
    return best;
}

/// Stratum index (0-based) of value x in dimension d for an n-point design.
inline std::size_t stratum_of(const ParameterSpace& space, std::size_t d, double x, std::size_t n) {
    const Bounds& b = space.bounds[d];
    const double t = (x - b.lower) / (b.upper - b.lower) * static_cast<double>(n);
    const auto s = static_cast<long long>(std::floor(t));
    return static_cast<std::size_t>(std::clamp<long long>(s, 0, static_cast<long long>(n) - 1));
}

}  // namespace romforge::fom
