#include "epigain/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "epigain/error.hpp"
#include "epigain/logmath.hpp"

namespace epigain {

namespace {

constexpr double kKlSlack = 1e-9;

// L(s) = ln(eps N_pri(s) / (e N_post(s))) = c + k (s - obs_mean)^2.
struct LogRatio {
    double c;
    double k;
    double center;

    double operator()(double s) const {
        const double y = s - center;
        return c + k * y * y;
    }

    // Half-width of the region where L < 0; zero if L >= 0 everywhere.
    double negative_radius() const { return c < 0.0 ? std::sqrt(-c / k) : 0.0; }
};

LogRatio log_ratio(const ModelParams& p) {
    const double n = p.n;
    return {std::log(p.epsilon) + 0.5 * n * (logmath::kLog2Pi + std::log(p.s_l))
                + n * p.obs_var / (2.0 * p.s_l),
            n / (2.0 * p.s_l), p.obs_mean};
}

std::vector<double> feature_points(const ModelParams& at, const GaussianPosterior& post, const LogRatio& L) {
    std::vector<double> pts;
    const double sd_pri = std::sqrt(at.s_p);
    const double sd_post = std::sqrt(post.s_post);
    for (double m : {-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0}) {
        pts.push_back(at.eta + m * sd_pri);
        pts.push_back(post.eta_post + m * sd_post);
    }
    pts.push_back(at.obs_mean);
    const double r = L.negative_radius();
    if (r > 0.0) {
        const double sd_lik = std::sqrt(at.s_l / at.n);
        for (double m : {-1.0, 0.0, 1.0}) {
            pts.push_back(at.obs_mean - r + m * sd_lik);
            pts.push_back(at.obs_mean + r + m * sd_lik);
        }
    }
    return pts;
}

// E[softplus(L(S))] for S ~ N(mean, var). The part E[max(L, 0)] is exact in
// terms of normal tail integrals; only the bounded remainder
// ln(1 + exp(-|L|)) goes through quadrature.
double expected_softplus(const LogRatio& L, double mean, double var, Window window,
                         std::span<const double> breakpoints, const QuadratureConfig& cfg) {
    const double m = mean - L.center;
    const double sd = std::sqrt(var);
    double positive = 0.0;
    if (L.c >= 0.0) {
        positive = L.c + L.k * (m * m + var);
    } else {
        const double r = L.negative_radius();
        const double alpha = (r - m) / sd;
        const double beta = (r + m) / sd;
        const double tails = logmath::normal_upper_tail(alpha) + logmath::normal_upper_tail(beta);
        positive = (L.c + L.k * (m * m + var)) * tails
                   + L.k * sd * (logmath::standard_normal_pdf(alpha) * (r + m)
                                 + logmath::standard_normal_pdf(beta) * (r - m));
        positive = std::max(positive, 0.0);
    }
    const auto remainder = integrate(
        [&](double s) {
            return logmath::normal_pdf(s, mean, var) * logmath::softplus_remainder(L(s));
        },
        window, breakpoints, cfg);
    return positive + remainder.value;
}

struct Context {
    ModelParams at;
    GaussianPosterior post;
    LogRatio L;
    Window window;
    std::vector<double> breakpoints;
};

Context make_context(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!std::isfinite(delta)) throw DomainError("prediction error must be finite");
    Context ctx{params.at_delta(delta), gaussian_posterior(params, delta), {}, {}, {}};
    ctx.window = integration_window(params, delta, cfg);
    if (params.epsilon > 0.0) ctx.L = log_ratio(ctx.at);
    ctx.breakpoints = feature_points(ctx.at, ctx.post, ctx.L);
    return ctx;
}

double integral_I_in(const Context& ctx, const QuadratureConfig& cfg) {
    if (ctx.at.epsilon == 0.0) return 0.0;
    return expected_softplus(ctx.L, ctx.at.eta, ctx.at.s_p, ctx.window, ctx.breakpoints, cfg);
}

double integral_J_in(const Context& ctx, const QuadratureConfig& cfg) {
    if (ctx.at.epsilon == 0.0) return 0.0;
    return expected_softplus(ctx.L, ctx.post.eta_post, ctx.post.s_post, ctx.window, ctx.breakpoints, cfg);
}

NoisyGains noisy_gains_in(const ModelParams& params, double delta, const Context& ctx,
                          const QuadratureConfig& cfg, bool need_bs) {
    NoisyGains g;
    const double kld_n = kld_gaussian(params, delta);
    const double bs_n = bs_gaussian(params, delta);
    if (params.epsilon == 0.0) {
        g.kld = kld_n;
        g.bs = bs_n;
        return g;
    }
    const double log_e = log_evidence(params, delta);
    const double log_eps = std::log(params.epsilon);
    const double log1p_ratio = logmath::softplus(log_eps - log_e);  // ln(1 + eps/e)

    g.i_integral = integral_I_in(ctx, cfg);
    const double kld_raw = kld_n + log1p_ratio - g.i_integral;
    const double scale = kld_n + log1p_ratio + g.i_integral;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    g.kld = clamp_nonnegative(kld_raw, kKlSlack + 16.0 * eps * scale, "KLD_eps");
    if (!need_bs) return g;

    g.j_integral = integral_J_in(ctx, cfg);
    const double log_norm = logmath::log_add_exp(log_e, log_eps);
    const double w_post = std::exp(log_e - log_norm);
    const double w_pri = std::exp(log_eps - log_norm);
    const double bracket = bs_n - log1p_ratio + g.j_integral;
    const double bs_raw = w_post * bracket - w_pri * g.kld;
    const double bs_scale = w_post * (bs_n + log1p_ratio + g.j_integral) + w_pri * g.kld;
    g.bs = clamp_nonnegative(bs_raw, kKlSlack + 16.0 * eps * bs_scale, "BS_eps");
    return g;
}

}  // namespace

double clamp_nonnegative(double value, double slack, const char* what) {
    if (value >= 0.0) return value;
    if (value >= -slack) return 0.0;
    std::ostringstream msg;
    msg << what << " is negative beyond numerical slack: " << value;
    throw DomainError(msg.str());
}

Window integration_window(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    const ModelParams at = params.at_delta(delta);
    const GaussianPosterior post = gaussian_posterior(at);
    const double lo = std::min({at.eta, post.eta_post, at.obs_mean});
    const double hi = std::max({at.eta, post.eta_post, at.obs_mean});
    const double half = cfg.truncation_sigmas * std::sqrt(at.s_p + at.s_l);
    return {lo - half, hi + half};
}

double integral_I(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    return integral_I_in(make_context(params, delta, cfg), cfg);
}

double integral_J(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    return integral_J_in(make_context(params, delta, cfg), cfg);
}

double kld_noisy(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    return noisy_gains_in(params, delta, make_context(params, delta, cfg), cfg, false).kld;
}

double bs_noisy(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    return noisy_gains_in(params, delta, make_context(params, delta, cfg), cfg, true).bs;
}

NoisyGains noisy_gains(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    return noisy_gains_in(params, delta, make_context(params, delta, cfg), cfg, true);
}

double uncertainty_U(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    const Context ctx = make_context(params, delta, cfg);
    const MixturePosterior mix = mixture_posterior(params, delta);
    const double n = params.n;
    const double log_norm_lik = -0.5 * n * (logmath::kLog2Pi + std::log(params.s_l));
    const double log_eps = params.epsilon > 0.0 ? std::log(params.epsilon) : logmath::kNegInf;
    const auto result = integrate(
        [&](double s) {
            const double y = s - params.obs_mean;
            const double log_lik = log_norm_lik - n * (y * y + params.obs_var) / (2.0 * params.s_l);
            return -mix.density(s) * logmath::log_add_exp(log_lik, log_eps);
        },
        ctx.window, ctx.breakpoints, cfg);
    return result.value;
}

GainPoint gain_point(const ModelParams& params, double delta, const QuadratureConfig& cfg) {
    const Context ctx = make_context(params, delta, cfg);
    const NoisyGains g = noisy_gains_in(params, delta, ctx, cfg, true);
    const MixturePosterior mix = mixture_posterior(params, delta);
    GainPoint p;
    p.delta = delta;
    p.evidence = evidence(params, delta);
    p.surprise = surprise(params, delta);
    p.kld = g.kld;
    p.bs = g.bs;
    p.ig = p.kld + p.bs;
    p.u = uncertainty_U(params, delta, cfg);
    p.i_integral = g.i_integral;
    p.j_integral = g.j_integral;
    p.w_post = mix.w_post;
    p.w_pri = mix.w_pri;
    return p;
}

double direct_kl(const LogDensity& log_p, const LogDensity& log_q, Window window,
                 const QuadratureConfig& cfg, std::span<const double> breakpoints) {
    const auto result = integrate(
        [&](double s) {
            const double lp = log_p(s);
            if (lp == logmath::kNegInf) return 0.0;
            const double lq = log_q(s);
            if (!(lq > logmath::kNegInf) || std::isnan(lq)) {
                std::ostringstream msg;
                msg << "direct_kl: reference density vanishes at s = " << s << " under positive mass";
                throw DomainError(msg.str());
            }
            return std::exp(lp) * (lp - lq);
        },
        window, breakpoints, cfg);
    return result.value;
}

}  // namespace epigain
