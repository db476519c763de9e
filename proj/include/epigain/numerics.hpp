#pragma once

// Information gains of the noisy-likelihood model. These need the improper
// integrals I and J, evaluated by adaptive quadrature on a truncated window.

#include <functional>
#include <span>

#include "epigain/model.hpp"
#include "epigain/quadrature.hpp"

namespace epigain {

/// Every computed quantity at one prediction error.
struct GainPoint {
    double delta = 0.0;
    double evidence = 0.0;
    double surprise = 0.0;
    double kld = 0.0;
    double bs = 0.0;
    double ig = 0.0;  ///< kld + bs
    double u = 0.0;
    double i_integral = 0.0;
    double j_integral = 0.0;
    double w_post = 1.0;
    double w_pri = 0.0;
};

/// KLD_eps and BS_eps together with the integrals they share.
struct NoisyGains {
    double kld = 0.0;
    double bs = 0.0;
    double i_integral = 0.0;
    double j_integral = 0.0;
};

/// Truncated window covering the prior, the Gaussian posterior and the data mean.
Window integration_window(const ModelParams& params, double delta, const QuadratureConfig& cfg);

/// I = <ln(1 + eps N_pri / (e N_post))>_{N_pri}. Zero when epsilon == 0.
double integral_I(const ModelParams& params, double delta, const QuadratureConfig& cfg = {});

/// J = <ln(1 + eps N_pri / (e N_post))>_{N_post}. Zero when epsilon == 0.
double integral_J(const ModelParams& params, double delta, const QuadratureConfig& cfg = {});

/// KL[prior || noisy posterior] composed from KLD_N, ln(1 + eps/e) and I.
double kld_noisy(const ModelParams& params, double delta, const QuadratureConfig& cfg = {});

/// KL[noisy posterior || prior], built from the Gaussian BS plus correction terms.
double bs_noisy(const ModelParams& params, double delta, const QuadratureConfig& cfg = {});

NoisyGains noisy_gains(const ModelParams& params, double delta, const QuadratureConfig& cfg = {});

/// U = -<ln p_eps(o|s)> under the (noisy) posterior, by direct quadrature.
double uncertainty_U(const ModelParams& params, double delta, const QuadratureConfig& cfg = {});

GainPoint gain_point(const ModelParams& params, double delta, const QuadratureConfig& cfg = {});

using LogDensity = std::function<double(double)>;

/// Integral of p * ln(p / q) over the window, with both densities given as
/// log-densities. Throws DomainError where q vanishes under mass of p.
double direct_kl(const LogDensity& log_p, const LogDensity& log_q, Window window,
                 const QuadratureConfig& cfg, std::span<const double> breakpoints = {});

/// Negative values no smaller than -slack become 0; anything below throws DomainError.
double clamp_nonnegative(double value, double slack, const char* what);

}  // namespace epigain
