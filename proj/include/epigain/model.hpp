#pragma once

// Closed-form Gaussian generative model with an additive uniform likelihood.
//
// Hidden state s has prior N(eta, s_p). Each of n observations is drawn from
// N(s, s_l); the data enter through their mean obs_mean and variance obs_var.
// The noisy likelihood adds a constant epsilon to the Gaussian likelihood.
// The prediction error is delta = eta - obs_mean. Every delta-dependent
// function below takes delta explicitly and places the prior at
// obs_mean + delta, so `params.eta` only matters through params.delta().

namespace epigain {

struct ModelParams {
    double eta = 0.0;       ///< prior mean
    double s_p = 10.0;      ///< prior variance (prediction uncertainty)
    double s_l = 1.0;       ///< Gaussian likelihood variance (observation uncertainty)
    int n = 1;              ///< number of observations
    double obs_mean = 0.0;  ///< mean of the observed data
    double obs_var = 0.0;   ///< variance of the observed data, zero when n == 1
    double epsilon = 1e-3;  ///< uniform-likelihood level

    double delta() const noexcept { return eta - obs_mean; }

    /// Copy with the prior mean moved so that delta() == d.
    ModelParams at_delta(double d) const noexcept {
        ModelParams p = *this;
        p.eta = obs_mean + d;
        return p;
    }

    /// Throws ValidationError naming the first violated invariant.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

struct GaussianPosterior {
    double eta_post = 0.0;
    double s_post = 1.0;
};

/// Posterior under the noisy likelihood: w_post * N_post + w_pri * N_pri.
struct MixturePosterior {
    double w_post = 1.0;
    double w_pri = 0.0;
    double log_w_post = 0.0;
    double log_w_pri = 0.0;
    GaussianPosterior gaussian_post;
    double prior_mean = 0.0;
    double prior_var = 1.0;

    double log_density(double s) const;
    double density(double s) const;
};

/// a * delta^2 + b.
struct QuadraticCoeffs {
    double a = 0.0;
    double b = 0.0;

    double operator()(double delta) const noexcept { return a * delta * delta + b; }
};

// Evidence e(delta) of the Gaussian model and its logarithm.
double log_evidence(const ModelParams& params, double delta);
double evidence(const ModelParams& params, double delta);

// ln(e(delta) + epsilon); -inf only when epsilon == 0 and e underflows.
double log_evidence_noisy(const ModelParams& params, double delta);
double surprise(const ModelParams& params, double delta);

QuadraticCoeffs free_energy_coeffs(const ModelParams& params);
double free_energy(const ModelParams& params, double delta);

GaussianPosterior gaussian_posterior(const ModelParams& params);
GaussianPosterior gaussian_posterior(const ModelParams& params, double delta);

/// KL[N(mean_p, var_p) || N(mean_q, var_q)].
double gaussian_kl(double mean_p, double var_p, double mean_q, double var_q);

// Information gains of the Gaussian-only model.
// kld: KL[prior || posterior], bs: KL[posterior || prior].
double kld_gaussian(const ModelParams& params, double delta);
double bs_gaussian(const ModelParams& params, double delta);
double kld_minus_bs_gaussian(const ModelParams& params, double delta);

// The same gains written as quadratics in delta.
QuadraticCoeffs kld_coeffs(const ModelParams& params);
QuadraticCoeffs bs_coeffs(const ModelParams& params);
QuadraticCoeffs kld_minus_bs_coeffs(const ModelParams& params);

MixturePosterior mixture_posterior(const ModelParams& params, double delta);

/// Prediction error at which w_post == 0.5 (e(delta) == epsilon); n == 1, V == 0 only.
double crossover_delta(const ModelParams& params);

}  // namespace epigain
