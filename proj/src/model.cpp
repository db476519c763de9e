#include "epigain/model.hpp"

#include <cmath>
#include <string>

#include "epigain/error.hpp"
#include "epigain/logmath.hpp"

namespace epigain {

using logmath::kLog2Pi;

void ModelParams::validate() const {
    auto fail = [](const std::string& msg) { throw ValidationError("ModelParams: " + msg); };
    if (!std::isfinite(eta)) fail("eta must be finite");
    if (!std::isfinite(obs_mean)) fail("obs_mean must be finite");
    if (!(s_p > 0.0) || !std::isfinite(s_p)) fail("s_p must be positive and finite");
    if (!(s_l > 0.0) || !std::isfinite(s_l)) fail("s_l must be positive and finite");
    if (n < 1) fail("n must be >= 1");
    if (!(obs_var >= 0.0) || !std::isfinite(obs_var)) fail("obs_var must be nonnegative");
    if (n == 1 && obs_var != 0.0) fail("obs_var must be 0 when n == 1");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail("epsilon must be nonnegative");
}

namespace {

void check_delta(double delta) {
    if (!std::isfinite(delta)) throw DomainError("prediction error must be finite");
}

}  // namespace

double log_evidence(const ModelParams& params, double delta) {
    params.validate();
    check_delta(delta);
    const double n = params.n;
    const double spread = n * params.s_p + params.s_l;
    const double value = 0.5 * std::log(params.s_l / spread)
                         - 0.5 * n * (kLog2Pi + std::log(params.s_l))
                         - n * delta * delta / (2.0 * spread)
                         - n * params.obs_var / (2.0 * params.s_l);
    if (std::isnan(value) || value == std::numeric_limits<double>::infinity())
        throw DomainError("log evidence is not representable");
    return value;
}

double evidence(const ModelParams& params, double delta) {
    // Underflow to zero is the delta -> infinity limit, not an error.
    return std::exp(log_evidence(params, delta));
}

double log_evidence_noisy(const ModelParams& params, double delta) {
    const double log_e = log_evidence(params, delta);
    if (params.epsilon == 0.0) return log_e;
    return logmath::log_add_exp(log_e, std::log(params.epsilon));
}

double surprise(const ModelParams& params, double delta) {
    return -log_evidence_noisy(params, delta);
}

QuadraticCoeffs free_energy_coeffs(const ModelParams& params) {
    params.validate();
    const double n = params.n;
    const double spread = n * params.s_p + params.s_l;
    return {n / (2.0 * spread),
            0.5 * (std::log(spread) + (n - 1.0) * std::log(params.s_l) + n * kLog2Pi
                   + n * params.obs_var / params.s_l)};
}

double free_energy(const ModelParams& params, double delta) {
    check_delta(delta);
    return free_energy_coeffs(params)(delta);
}

GaussianPosterior gaussian_posterior(const ModelParams& params) {
    params.validate();
    const double n = params.n;
    const double spread = n * params.s_p + params.s_l;
    return {(n * params.s_p * params.obs_mean + params.s_l * params.eta) / spread,
            params.s_p * params.s_l / spread};
}

GaussianPosterior gaussian_posterior(const ModelParams& params, double delta) {
    check_delta(delta);
    return gaussian_posterior(params.at_delta(delta));
}

double gaussian_kl(double mean_p, double var_p, double mean_q, double var_q) {
    const double gap = mean_p - mean_q;
    return 0.5 * (std::log(var_q / var_p) + (var_p + gap * gap) / var_q - 1.0);
}

double kld_gaussian(const ModelParams& params, double delta) {
    const ModelParams at = params.at_delta(delta);
    const GaussianPosterior post = gaussian_posterior(params, delta);
    return gaussian_kl(at.eta, at.s_p, post.eta_post, post.s_post);
}

double bs_gaussian(const ModelParams& params, double delta) {
    const ModelParams at = params.at_delta(delta);
    const GaussianPosterior post = gaussian_posterior(params, delta);
    return gaussian_kl(post.eta_post, post.s_post, at.eta, at.s_p);
}

double kld_minus_bs_gaussian(const ModelParams& params, double delta) {
    return kld_gaussian(params, delta) - bs_gaussian(params, delta);
}

QuadraticCoeffs kld_coeffs(const ModelParams& params) {
    params.validate();
    const double n = params.n;
    const double sp = params.s_p;
    const double sl = params.s_l;
    const double spread = n * sp + sl;
    const double ratio = spread / sl;  // s_p / s_post
    return {n * n * sp / (2.0 * sl * spread), 0.5 * (ratio - 1.0 - std::log(ratio))};
}

QuadraticCoeffs bs_coeffs(const ModelParams& params) {
    params.validate();
    const double n = params.n;
    const double sp = params.s_p;
    const double sl = params.s_l;
    const double spread = n * sp + sl;
    const double ratio = spread / sl;
    return {n * n * sp / (2.0 * spread * spread), 0.5 * (std::log(ratio) + 1.0 / ratio - 1.0)};
}

QuadraticCoeffs kld_minus_bs_coeffs(const ModelParams& params) {
    const QuadraticCoeffs k = kld_coeffs(params);
    const QuadraticCoeffs b = bs_coeffs(params);
    return {k.a - b.a, k.b - b.b};
}

double MixturePosterior::log_density(double s) const {
    const double post = log_w_post + logmath::log_normal_pdf(s, gaussian_post.eta_post, gaussian_post.s_post);
    if (log_w_pri == logmath::kNegInf) return post;
    const double pri = log_w_pri + logmath::log_normal_pdf(s, prior_mean, prior_var);
    return logmath::log_add_exp(post, pri);
}

double MixturePosterior::density(double s) const { return std::exp(log_density(s)); }

MixturePosterior mixture_posterior(const ModelParams& params, double delta) {
    const ModelParams at = params.at_delta(delta);
    MixturePosterior m;
    m.gaussian_post = gaussian_posterior(at);
    m.prior_mean = at.eta;
    m.prior_var = at.s_p;
    if (params.epsilon == 0.0) {
        m.w_post = 1.0;
        m.w_pri = 0.0;
        m.log_w_post = 0.0;
        m.log_w_pri = logmath::kNegInf;
        return m;
    }
    const double log_e = log_evidence(params, delta);
    const double log_eps = std::log(params.epsilon);
    const double log_norm = logmath::log_add_exp(log_e, log_eps);
    m.log_w_post = log_e - log_norm;
    m.log_w_pri = log_eps - log_norm;
    m.w_post = std::exp(m.log_w_post);
    m.w_pri = 1.0 - m.w_post;
    return m;
}

double crossover_delta(const ModelParams& params) {
    params.validate();
    if (params.n != 1) throw ValidationError("crossover_delta: requires n == 1");
    if (!(params.epsilon > 0.0)) throw ValidationError("crossover_delta: requires epsilon > 0");
    const double total = params.s_p + params.s_l;
    const double arg = -std::log(params.epsilon) - 0.5 * std::log(2.0 * std::numbers::pi * total);
    if (arg <= 0.0) return 0.0;  // epsilon already exceeds e(0)
    return std::sqrt(2.0 * total * arg);
}

}  // namespace epigain
