#pragma once

#include <functional>
#include <span>

namespace epigain {

struct QuadratureConfig {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;
    /// Half-width of the integration window, in units of sqrt(s_p + s_l),
    /// measured beyond the outermost component mean.
    double truncation_sigmas = 12.0;

    void validate() const;

    bool operator==(const QuadratureConfig&) const = default;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int subdivisions = 0;
};

/// Closed interval used as the truncated integration domain.
struct Window {
    double lo = 0.0;
    double hi = 0.0;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 21-point Gauss-Kronrod integration of f over
/// [window.lo, window.hi]. Interior breakpoints seed the initial partition.
/// Throws QuadratureError carrying the best estimate if the tolerance
/// max(abs_tol, rel_tol * |value|) is not met within max_subdivisions.
QuadratureResult integrate(const Integrand& f, Window window, std::span<const double> breakpoints,
                           const QuadratureConfig& cfg);

inline QuadratureResult integrate(const Integrand& f, Window window, const QuadratureConfig& cfg) {
    return integrate(f, window, {}, cfg);
}

}  // namespace epigain
