#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "epigain/error.hpp"
#include "epigain/model.hpp"
#include "epigain/numerics.hpp"
#include "epigain/quadrature.hpp"
#include "test_support.hpp"

using namespace epigain;
using epigain::test::params;
using doctest::Approx;

namespace {

// Reference values computed with mpmath at 30+ digits.
constexpr double kEvidenceAt0 = 0.120285623372755163;  // s_p = 10, s_l = 1
constexpr double kSurpriseAt0 = 2.1096069913032;       // eps = 1e-3
constexpr double kKldAt0 = 3.80105236360081473;
constexpr double kBsAt0 = 0.744402181853730727;
constexpr double kBsAt3 = 1.11630300830001;
constexpr double kCrossover = 10.2653358642726415;

QuadratureConfig tight() {
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-13;
    cfg.rel_tol = 1e-12;
    return cfg;
}

// Unit-spaced breakpoints near the origin keep the panels from stepping over
// narrow peaks.
double quad(const std::function<double(double)>& f, Window w) {
    std::vector<double> cuts;
    for (int k = -12; k <= 12; ++k) cuts.push_back(k);
    return integrate(f, w, cuts, tight()).value;
}

}  // namespace

TEST_CASE("ModelParams validation rejects each broken invariant") {
    CHECK_NOTHROW(ModelParams{}.validate());
    auto broken = [](auto mutate) {
        ModelParams p;
        mutate(p);
        return p;
    };
    CHECK_THROWS_AS(broken([](ModelParams& p) { p.s_p = 0.0; }).validate(), ValidationError);
    CHECK_THROWS_AS(broken([](ModelParams& p) { p.s_l = -1.0; }).validate(), ValidationError);
    CHECK_THROWS_AS(broken([](ModelParams& p) { p.n = 0; }).validate(), ValidationError);
    CHECK_THROWS_AS(broken([](ModelParams& p) { p.epsilon = -1e-3; }).validate(), ValidationError);
    CHECK_THROWS_AS(broken([](ModelParams& p) { p.obs_var = 0.5; }).validate(), ValidationError);
    CHECK_THROWS_AS(broken([](ModelParams& p) { p.s_p = std::nan(""); }).validate(), ValidationError);
    CHECK_NOTHROW(broken([](ModelParams& p) { p.n = 3, p.obs_var = 0.5; }).validate());
}

TEST_CASE("delta is derived from eta and obs_mean") {
    ModelParams p;
    p.eta = 3.5;
    p.obs_mean = 1.0;
    CHECK(p.delta() == 2.5);
    const ModelParams q = p.at_delta(-4.0);
    CHECK(q.delta() == -4.0);
    CHECK(q.obs_mean == 1.0);
}

TEST_CASE("evidence at zero prediction error") {
    const ModelParams p = params(10.0, 1.0);
    CHECK(evidence(p, 0.0) == Approx(kEvidenceAt0).epsilon(1e-14));
    CHECK(evidence(p, 0.0) == Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * 11.0)).epsilon(1e-14));

    // Independent marginalization of prior times likelihood by quadrature.
    const double marginal = quad(
        [](double s) {
            return std::exp(test::ref_log_normal(s, 0.0, 10.0) + test::ref_log_normal(0.0, s, 1.0));
        },
        {-60.0, 60.0});
    CHECK(evidence(p, 0.0) == Approx(marginal).epsilon(1e-11));
}

TEST_CASE("evidence is even, strictly decreasing in |delta| and vanishes far away") {
    const ModelParams p = params(10.0, 1.0);
    for (double d : {0.5, 1.0, 3.0, 7.5, 20.0}) CHECK(evidence(p, d) == evidence(p, -d));
    double last = evidence(p, 0.0);
    for (double d = 0.25; d <= 40.0; d += 0.25) {
        const double e = evidence(p, d);
        CHECK(e < last);
        last = e;
    }
    CHECK(evidence(p, 200.0) < 1e-300);
    CHECK(evidence(p, 1e4) == 0.0);
    CHECK(std::isfinite(log_evidence(p, 1e4)));
}

TEST_CASE("evidence with several observations matches direct marginalization") {
    // Data 1, 2, 4: mean 7/3, population variance 14/9.
    ModelParams p;
    p.s_p = 10.0;
    p.s_l = 1.0;
    p.n = 3;
    p.obs_mean = 7.0 / 3.0;
    p.obs_var = 14.0 / 9.0;
    const double eta = 0.5;
    const double want = 0.000939862524627554461;  // mpmath
    CHECK(evidence(p, eta - p.obs_mean) == Approx(want).epsilon(1e-12));

    const double marginal = quad(
        [&](double s) {
            double log_f = test::ref_log_normal(s, eta, 10.0);
            for (double o : {1.0, 2.0, 4.0}) log_f += test::ref_log_normal(o, s, 1.0);
            return std::exp(log_f);
        },
        {-60.0, 60.0});
    CHECK(evidence(p, eta - p.obs_mean) == Approx(marginal).epsilon(1e-10));
}

TEST_CASE("noisy log evidence and surprise") {
    const ModelParams p = params(10.0, 1.0);
    CHECK(surprise(p, 0.0) == Approx(kSurpriseAt0).epsilon(1e-13));
    CHECK(log_evidence_noisy(p, 0.0) == -surprise(p, 0.0));

    ModelParams no_noise = p;
    no_noise.epsilon = 0.0;
    for (double d : {0.0, 2.0, 9.0}) CHECK(log_evidence_noisy(no_noise, d) == Approx(log_evidence(no_noise, d)));
    CHECK(std::isinf(log_evidence_noisy(no_noise, 1e200)));
    CHECK(log_evidence_noisy(no_noise, 1e200) < 0.0);

    // Strictly increasing while the evidence still registers against eps in
    // double precision; beyond that the curve saturates at -ln(eps).
    double last = surprise(p, 0.0);
    for (double d = 0.1; d <= 25.0; d += 0.1) {
        const double s = surprise(p, d);
        CHECK(s > last);
        last = s;
    }
    for (double d = 25.0; d <= 60.0; d += 0.5) {
        const double s = surprise(p, d);
        CHECK(s >= last);
        last = s;
    }
    CHECK(last <= -std::log(p.epsilon));
}

TEST_CASE("free energy coefficients") {
    const ModelParams p = params(10.0, 1.0);
    const QuadraticCoeffs c = free_energy_coeffs(p);
    CHECK(c.a == Approx(1.0 / 22.0).epsilon(1e-15));
    CHECK(c.b == Approx(2.117886169603858).epsilon(1e-14));
    CHECK(c(0.0) == c.b);

    // With the exact posterior as recognition density and no noise, F equals -ln e.
    for (double d : {0.0, 1.0, 4.0, 13.0}) CHECK(free_energy(p, d) == Approx(-log_evidence(p, d)).epsilon(1e-13));

    ModelParams multi = p;
    multi.n = 4;
    multi.obs_var = 0.3;
    CHECK(free_energy_coeffs(multi).a == Approx(4.0 / (2.0 * (4.0 * 10.0 + 1.0))));
    for (double d : {0.0, 2.0}) CHECK(free_energy(multi, d) == Approx(-log_evidence(multi, d)).epsilon(1e-13));
}

TEST_CASE("Gaussian posterior against a quadrature-normalized product of densities") {
    const ModelParams p = params(10.0, 1.0);
    const GaussianPosterior post = gaussian_posterior(p, 0.0);
    CHECK(post.eta_post == 0.0);
    CHECK(post.s_post == Approx(10.0 / 11.0).epsilon(1e-15));

    for (double delta : {0.0, 2.0, -3.0}) {
        auto joint = [&](double s) {
            return std::exp(test::ref_log_normal(s, delta, 10.0) + test::ref_log_normal(0.0, s, 1.0));
        };
        const Window w{-60.0, 60.0};
        const double z = quad(joint, w);
        const double mean = quad([&](double s) { return s * joint(s); }, w) / z;
        const double var = quad([&](double s) { return (s - mean) * (s - mean) * joint(s); }, w) / z;
        const GaussianPosterior g = gaussian_posterior(p, delta);
        CHECK(g.eta_post == Approx(mean).epsilon(1e-10));
        CHECK(g.s_post == Approx(var).epsilon(1e-10));
    }
}

TEST_CASE("Gaussian posterior limits and invariants") {
    ModelParams p = params(10.0, 1.0);
    p.eta = 4.0;
    p.obs_mean = 1.0;
    const GaussianPosterior g = gaussian_posterior(p);
    CHECK(g.eta_post > 1.0);
    CHECK(g.eta_post < 4.0);
    CHECK(g.s_post < std::min(p.s_p, p.s_l));

    p.n = 5;
    p.obs_var = 1.0;
    CHECK(gaussian_posterior(p).s_post < std::min(p.s_p, p.s_l / p.n));

    ModelParams sharp = params(1e-12, 1.0);
    sharp.eta = 2.0;
    const GaussianPosterior near_prior = gaussian_posterior(sharp);
    CHECK(near_prior.eta_post == Approx(2.0).epsilon(1e-10));
    CHECK(near_prior.s_post == Approx(1e-12).epsilon(1e-9));

    ModelParams aligned = params(10.0, 1.0);
    aligned.eta = aligned.obs_mean = 7.25;
    CHECK(gaussian_posterior(aligned).eta_post == 7.25);
}

TEST_CASE("KLD of the Gaussian model") {
    const ModelParams p = params(10.0, 1.0);
    CHECK(kld_gaussian(p, 0.0) == Approx(kKldAt0).epsilon(1e-13));
    const double a_kld = 10.0 / (2.0 * 1.0 * 11.0);
    CHECK((kld_gaussian(p, 2.0) - kld_gaussian(p, 0.0)) / 4.0 == Approx(a_kld).epsilon(1e-12));
    CHECK(kld_coeffs(p).a == Approx(a_kld).epsilon(1e-15));
    for (double d : {0.3, 2.0, 11.0}) CHECK(kld_gaussian(p, d) == kld_gaussian(p, -d));

    const double oracle = direct_kl(test::prior_density(p, 0.0), test::posterior_density(p, 0.0),
                                    test::wide_window(p, 0.0), tight());
    CHECK(test::rel_err(kld_gaussian(p, 0.0), oracle) < 1e-8);
}

TEST_CASE("BS of the Gaussian model") {
    const ModelParams p = params(10.0, 1.0);
    CHECK(bs_gaussian(p, 0.0) == Approx(kBsAt0).epsilon(1e-13));
    CHECK(bs_gaussian(p, 3.0) == Approx(kBsAt3).epsilon(1e-13));
    const double a_bs = 10.0 / (2.0 * 11.0 * 11.0);
    CHECK((bs_gaussian(p, 2.0) - bs_gaussian(p, 0.0)) / 4.0 == Approx(a_bs).epsilon(1e-12));
    CHECK(bs_coeffs(p).a == Approx(a_bs).epsilon(1e-15));
    CHECK(bs_gaussian(params(1e-9, 1.0), 2.0) < 1e-8);

    const double oracle = direct_kl(test::posterior_density(p, 3.0), test::prior_density(p, 3.0),
                                    test::wide_window(p, 3.0), tight());
    CHECK(test::rel_err(bs_gaussian(p, 3.0), oracle) < 1e-8);
}

TEST_CASE("closed-form gains match the quadrature oracle on random parameters") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> var(1.0, 50.0), err(0.0, 10.0);
    for (int i = 0; i < 20; ++i) {
        const ModelParams p = params(var(rng), var(rng));
        const double d = err(rng);
        const Window w = test::wide_window(p, d);
        const double kld = direct_kl(test::prior_density(p, d), test::posterior_density(p, d), w, tight());
        const double bs = direct_kl(test::posterior_density(p, d), test::prior_density(p, d), w, tight());
        CHECK(test::rel_err(kld_gaussian(p, d), kld) < 1e-6);
        CHECK(test::rel_err(bs_gaussian(p, d), bs) < 1e-6);
    }
}

TEST_CASE("KLD exceeds BS everywhere") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> var(1.0, 50.0), err(-10.0, 10.0);
    for (int i = 0; i < 2000; ++i) {
        const ModelParams p = params(var(rng), var(rng));
        CHECK(kld_minus_bs_gaussian(p, err(rng)) > 0.0);
    }
    const ModelParams p = params(10.0, 1.0);
    CHECK(kld_minus_bs_gaussian(p, 0.0) == Approx(kKldAt0 - kBsAt0).epsilon(1e-13));
    const QuadraticCoeffs diff = kld_minus_bs_coeffs(p);
    CHECK(diff.a == Approx(kld_coeffs(p).a - bs_coeffs(p).a).epsilon(1e-14));
    CHECK(diff.a > 0.0);
    CHECK(diff.b > 0.0);
    CHECK((kld_minus_bs_gaussian(p, 3.0) - kld_minus_bs_gaussian(p, 0.0)) / 9.0 == Approx(diff.a).epsilon(1e-11));
}

TEST_CASE("quadratic coefficients reproduce the direct gains") {
    for (double s_p : {1.0, 4.0, 30.0}) {
        for (double s_l : {0.5, 2.0, 45.0}) {
            const ModelParams p = params(s_p, s_l);
            for (double d : {0.0, 1.5, 6.0}) {
                CHECK(kld_coeffs(p)(d) == Approx(kld_gaussian(p, d)).epsilon(1e-12));
                CHECK(bs_coeffs(p)(d) == Approx(bs_gaussian(p, d)).epsilon(1e-12));
                CHECK(kld_minus_bs_coeffs(p)(d) == Approx(kld_minus_bs_gaussian(p, d)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("coefficient sensitivities to the variances") {
    // Finite differences of the closed-form gradients.
    const double h = 1e-6;
    auto a_kld = [](double s_p, double s_l) { return kld_coeffs(params(s_p, s_l)).a; };
    auto a_bs = [](double s_p, double s_l) { return bs_coeffs(params(s_p, s_l)).a; };
    for (double s_p : {1.0, 3.0, 10.0, 25.0, 50.0}) {
        for (double s_l : {1.0, 2.0, 10.0, 40.0}) {
            CAPTURE(s_p);
            CAPTURE(s_l);
            CHECK((a_kld(s_p, s_l + h) - a_kld(s_p, s_l - h)) < 0.0);
            CHECK((a_bs(s_p, s_l + h) - a_bs(s_p, s_l - h)) < 0.0);
            CHECK((a_kld(s_p + h, s_l) - a_kld(s_p - h, s_l)) > 0.0);
            // A_BS = s_p / (2 (s_p + s_l)^2) peaks at s_p = s_l, so its s_p
            // derivative is negative only on the s_p > s_l side.
            const double d_bs = a_bs(s_p + h, s_l) - a_bs(s_p - h, s_l);
            if (s_p > s_l)
                CHECK(d_bs < 0.0);
            else if (s_p < s_l)
                CHECK(d_bs > 0.0);
        }
    }
}

TEST_CASE("mixture posterior weights and crossover") {
    const ModelParams p = params(10.0, 1.0);
    for (double d : {0.0, 3.0, 10.0, 30.0}) {
        const MixturePosterior m = mixture_posterior(p, d);
        CHECK(m.w_post + m.w_pri == 1.0);
        CHECK(m.w_post == Approx(evidence(p, d) / (evidence(p, d) + p.epsilon)).epsilon(1e-14));
    }
    CHECK(mixture_posterior(p, 0.0).w_post == Approx(0.991754999713).epsilon(1e-11));

    CHECK(crossover_delta(p) == Approx(kCrossover).epsilon(1e-13));
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mixture_posterior(p, mid).w_post > 0.5 ? lo : hi) = mid;
    }
    CHECK(crossover_delta(p) == Approx(0.5 * (lo + hi)).epsilon(1e-12));

    const MixturePosterior far = mixture_posterior(p, 80.0);
    CHECK(far.w_pri > 1.0 - 1e-12);
    CHECK(far.log_density(80.0) == Approx(test::ref_log_normal(80.0, 80.0, 10.0)).epsilon(1e-10));

    ModelParams clean = p;
    clean.epsilon = 0.0;
    CHECK(mixture_posterior(clean, 5.0).w_post == 1.0);
    CHECK(mixture_posterior(clean, 5.0).w_pri == 0.0);
}

TEST_CASE("mixture density integrates to one") {
    for (double s_p : {1.0, 10.0, 50.0}) {
        for (double s_l : {1.0, 10.0, 50.0}) {
            const ModelParams p = params(s_p, s_l);
            for (double d : {0.0, 4.0, 15.0}) {
                const MixturePosterior m = mixture_posterior(p, d);
                const double mass = integrate([&](double s) { return m.density(s); }, test::wide_window(p, d),
                                              std::vector<double>{0.0, d}, tight())
                                        .value;
                CHECK(mass == Approx(1.0).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("every delta-dependent quantity is even") {
    const ModelParams p = params(7.0, 2.0);
    for (double d : {0.7, 3.3, 12.0}) {
        CHECK(log_evidence(p, d) == log_evidence(p, -d));
        CHECK(surprise(p, d) == surprise(p, -d));
        CHECK(free_energy(p, d) == free_energy(p, -d));
        CHECK(kld_gaussian(p, d) == kld_gaussian(p, -d));
        CHECK(bs_gaussian(p, d) == bs_gaussian(p, -d));
        CHECK(mixture_posterior(p, d).w_post == mixture_posterior(p, -d).w_post);
    }
}
