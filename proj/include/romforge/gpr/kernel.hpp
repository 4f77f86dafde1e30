#pragma once

#include <cmath>
#include <string>

#include "romforge/error.hpp"

namespace romforge::gpr {

enum class KernelFamily { Matern, Rbf };

struct KernelSpec {
    KernelFamily family = KernelFamily::Matern;
    double length_scale = 1.0;
    double nu = 2.5;  ///< Matern only: 0.5, 1.5 or 2.5
};

inline bool is_supported_nu(double nu) { return nu == 0.5 || nu == 1.5 || nu == 2.5; }

inline void validate(const KernelSpec& spec) {
    if (!(spec.length_scale > 0.0) || !std::isfinite(spec.length_scale))
        throw ArgumentError("kernel length scale must be positive and finite");
    if (spec.family == KernelFamily::Matern && !is_supported_nu(spec.nu))
        throw ArgumentError("Matern smoothness nu=" + std::to_string(spec.nu) +
                            " unsupported; use 0.5, 1.5 or 2.5");
}

/// Half-integer Matern closed forms in r = d / l.
inline double matern_kernel(double d, double l, double nu) {
    validate(KernelSpec{KernelFamily::Matern, l, nu});
    if (d < 0.0) throw ArgumentError("kernel distance must be nonnegative");
    const double r = d / l;
    if (nu == 0.5) return std::exp(-r);
    if (nu == 1.5) {
        const double a = std::sqrt(3.0) * r;
        return (1.0 + a) * std::exp(-a);
    }
    const double a = std::sqrt(5.0) * r;
    return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

inline double rbf_kernel(double d, double l) {
    validate(KernelSpec{KernelFamily::Rbf, l, 2.5});
    const double r = d / l;
    return std::exp(-0.5 * r * r);
}

inline double kernel_value(const KernelSpec& spec, double d) {
    return spec.family == KernelFamily::Rbf ? rbf_kernel(d, spec.length_scale)
                                            : matern_kernel(d, spec.length_scale, spec.nu);
}

/// d kappa / d log(l) at fixed distance.
inline double kernel_log_scale_derivative(const KernelSpec& spec, double d) {
    const double r = d / spec.length_scale;
    if (spec.family == KernelFamily::Rbf) return r * r * std::exp(-0.5 * r * r);
    if (spec.nu == 0.5) return r * std::exp(-r);
    if (spec.nu == 1.5) {
        const double a = std::sqrt(3.0) * r;
        return a * a * std::exp(-a);
    }
    const double a = std::sqrt(5.0) * r;
    return a * a * (1.0 + a) / 3.0 * std::exp(-a);
}

inline std::string to_string(KernelFamily family) {
    return family == KernelFamily::Rbf ? "rbf" : "matern";
}

inline KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "matern") return KernelFamily::Matern;
    if (name == "rbf") return KernelFamily::Rbf;
    throw ArgumentError("unknown kernel family '" + name + "' (expected matern or rbf)");
}

}  // namespace romforge::gpr
