#pragma once

#include <functional>

#include "epigain/model.hpp"
#include "epigain/quadrature.hpp"

namespace epigain {

struct ScalarMaximum {
    double argmax = 0.0;
    double max = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Bounded maximization of a scalar function on [lo, hi] by golden-section
/// search with safeguarded parabolic interpolation (Brent). Locates a local
/// maximum to within `tol` in the argument. When f(lo) ties or beats the
/// located maximum, lo is returned, so plateaus resolve to the lowest point.
/// Throws OptimizerError if f returns a non-finite value.
ScalarMaximum maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              double tol = 1e-5, int max_iters = 500);

struct OptimaRecord {
    double delta_kld = 0.0;
    double delta_bs = 0.0;
    double delta_ig = 0.0;
    double s_kld = 0.0;
    double s_bs = 0.0;
    double s_ig = 0.0;
    double max_kld = 0.0;
    double max_bs = 0.0;
    double max_ig = 0.0;
    double d_delta = 0.0;  ///< delta_bs - delta_kld
    double d_s = 0.0;      ///< s_bs - s_kld
    ModelParams params;
    double search_bound = 0.0;
    bool converged_kld = false;
    bool converged_bs = false;
    bool converged_ig = false;

    bool converged() const noexcept { return converged_kld && converged_bs && converged_ig; }
};

struct OptimizeOptions {
    /// Upper end of the delta search interval; <= 0 selects 10 * sqrt(s_p + s_l).
    double search_bound = 0.0;
    double tol = 1e-5;
    int max_iters = 500;
    /// Times the bound is doubled when an argmax lands on it.
    int max_widenings = 4;
};

/// Optimal prediction errors, optimal surprises and peak gains of KLD_eps,
/// BS_eps and IG over delta in [0, bound]. Objectives that fail (iteration
/// cap, argmax stuck on the bound, quadrature failure) are flagged, not thrown.
OptimaRecord find_optima(const ModelParams& params, const QuadratureConfig& cfg = {},
                         const OptimizeOptions& options = {});

double default_search_bound(const ModelParams& params);

}  // namespace epigain
