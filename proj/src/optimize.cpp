#include "epigain/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "epigain/error.hpp"
#include "epigain/numerics.hpp"

namespace epigain {

namespace {

double evaluate(const std::function<double(double)>& f, double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "objective is not finite at delta = " << x;
        throw OptimizerError(msg.str(), x);
    }
    return v;
}

}  // namespace

ScalarMaximum maximize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol,
                              int max_iters) {
    if (!(lo < hi)) throw ValidationError("maximize_scalar: requires lo < hi");
    if (!(tol > 0.0)) throw ValidationError("maximize_scalar: tol must be positive");
    if (max_iters < 1) throw ValidationError("maximize_scalar: max_iters must be >= 1");

    // Minimize g = -f.
    const double golden = 0.5 * (3.0 - std::sqrt(5.0));
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());

    double a = lo;
    double b = hi;
    double x = a + golden * (b - a);
    double w = x;
    double v = x;
    double fx = -evaluate(f, x);
    double fw = fx;
    double fv = fx;
    double d = 0.0;
    double e = 0.0;

    ScalarMaximum out;
    int iter = 0;
    for (;;) {
        const double xm = 0.5 * (a + b);
        const double tol1 = sqrt_eps * std::fabs(x) + tol / 3.0;
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) {
            out.converged = true;
            break;
        }
        if (iter >= max_iters) break;
        ++iter;

        bool take_golden = true;
        if (std::fabs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            r = e;
            e = d;
            if (std::fabs(p) < std::fabs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = xm >= x ? tol1 : -tol1;
                take_golden = false;
            }
        }
        if (take_golden) {
            e = x >= xm ? a - x : b - x;
            d = golden * e;
        }
        const double u = std::fabs(d) >= tol1 ? x + d : x + (d >= 0.0 ? tol1 : -tol1);
        const double fu = -evaluate(f, u);

        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }

    out.argmax = x;
    out.max = -fx;
    out.iterations = iter;
    const double at_lo = evaluate(f, lo);
    if (at_lo >= out.max) {
        out.argmax = lo;
        out.max = at_lo;
    }
    return out;
}

double default_search_bound(const ModelParams& params) {
    return 10.0 * std::sqrt(params.s_p + params.s_l);
}

namespace {

struct Optimum {
    double argmax = 0.0;
    double max = 0.0;
    double bound = 0.0;
    bool converged = false;
};

Optimum optimize_objective(const std::function<double(double)>& f, double bound, const OptimizeOptions& opt) {
    Optimum best;
    for (int attempt = 0; attempt <= opt.max_widenings; ++attempt) {
        try {
            const ScalarMaximum m = maximize_scalar(f, 0.0, bound, opt.tol, opt.max_iters);
            best = {m.argmax, m.max, bound, m.converged};
            const bool on_bound = bound - m.argmax <= 10.0 * opt.tol;
            if (!on_bound) return best;
        } catch (const Error&) {
            best = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), bound,
                    false};
            return best;
        }
        bound *= 2.0;
    }
    best.converged = false;
    return best;
}

}  // namespace

OptimaRecord find_optima(const ModelParams& params, const QuadratureConfig& cfg, const OptimizeOptions& options) {
    params.validate();
    cfg.validate();
    const double bound = options.search_bound > 0.0 ? options.search_bound : default_search_bound(params);

    const Optimum kld = optimize_objective([&](double d) { return kld_noisy(params, d, cfg); }, bound, options);
    const Optimum bs = optimize_objective([&](double d) { return bs_noisy(params, d, cfg); }, bound, options);
    const Optimum ig = optimize_objective(
        [&](double d) {
            const NoisyGains g = noisy_gains(params, d, cfg);
            return g.kld + g.bs;
        },
        bound, options);

    auto surprise_at = [&](const Optimum& o) {
        return std::isfinite(o.argmax) ? surprise(params, o.argmax) : std::numeric_limits<double>::quiet_NaN();
    };

    OptimaRecord r;
    r.params = params;
    r.delta_kld = kld.argmax;
    r.delta_bs = bs.argmax;
    r.delta_ig = ig.argmax;
    r.max_kld = kld.max;
    r.max_bs = bs.max;
    r.max_ig = ig.max;
    r.s_kld = surprise_at(kld);
    r.s_bs = surprise_at(bs);
    r.s_ig = surprise_at(ig);
    r.d_delta = r.delta_bs - r.delta_kld;
    r.d_s = r.s_bs - r.s_kld;
    r.search_bound = std::max({kld.bound, bs.bound, ig.bound});
    r.converged_kld = kld.converged;
    r.converged_bs = bs.converged;
    r.converged_ig = ig.converged;
    return r;
}

}  // namespace epigain
