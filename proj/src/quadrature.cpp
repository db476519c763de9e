#include "epigain/quadrature.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "epigain/error.hpp"

namespace epigain {

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0)) throw ValidationError("QuadratureConfig: abs_tol must be positive");
    if (!(rel_tol > 0.0)) throw ValidationError("QuadratureConfig: rel_tol must be positive");
    if (max_subdivisions < 1) throw ValidationError("QuadratureConfig: max_subdivisions must be >= 1");
    if (!(truncation_sigmas >= 8.0))
        throw ValidationError("QuadratureConfig: truncation_sigmas must be >= 8");
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss = boost::math::quadrature::gauss<double, 10>;

struct Panel {
    double a;
    double b;
    double value;
    double error;

    bool operator<(const Panel& other) const { return error < other.error; }
};

// One 21-point Kronrod pass with the embedded 10-point Gauss rule; the error
// estimate follows the QUADPACK qk21 heuristic.
Panel evaluate(const Integrand& f, double a, double b) {
    const auto& x = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    std::array<double, 21> fv{};
    fv[0] = f(center);
    for (std::size_t i = 1; i < x.size(); ++i) {
        fv[2 * i - 1] = f(center - half * x[i]);
        fv[2 * i] = f(center + half * x[i]);
    }

    double kronrod = fv[0] * wk[0];
    double gauss = 0.0;
    double abs_sum = std::fabs(fv[0]) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double pair = fv[2 * i - 1] + fv[2 * i];
        kronrod += wk[i] * pair;
        abs_sum += wk[i] * (std::fabs(fv[2 * i - 1]) + std::fabs(fv[2 * i]));
        if (i % 2 == 1) gauss += wg[i / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double asc = wk[0] * std::fabs(fv[0] - mean);
    for (std::size_t i = 1; i < x.size(); ++i)
        asc += wk[i] * (std::fabs(fv[2 * i - 1] - mean) + std::fabs(fv[2 * i] - mean));

    const double value = kronrod * half;
    const double resabs = abs_sum * std::fabs(half);
    const double resasc = asc * std::fabs(half);
    double err = std::fabs((kronrod - gauss) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);

    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "integrand is not finite on [" << a << ", " << b << "]";
        throw QuadratureError(msg.str(), value, std::numeric_limits<double>::infinity());
    }
    return {a, b, value, err};
}

}  // namespace

QuadratureResult integrate(const Integrand& f, Window window, std::span<const double> breakpoints,
                           const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(window.hi > window.lo) || !std::isfinite(window.lo) || !std::isfinite(window.hi))
        throw ValidationError("integrate: window must be a finite nonempty interval");

    std::vector<double> cuts{window.lo};
    std::vector<double> inner(breakpoints.begin(), breakpoints.end());
    std::sort(inner.begin(), inner.end());
    for (double x : inner)
        if (x > cuts.back() && x < window.hi) cuts.push_back(x);
    cuts.push_back(window.hi);

    std::priority_queue<Panel> panels;
    double total = 0.0;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p = evaluate(f, cuts[i], cuts[i + 1]);
        total += p.value;
        total_error += p.error;
        panels.push(p);
    }

    int subdivisions = static_cast<int>(panels.size());
    auto tolerance = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total)); };

    while (total_error > tolerance()) {
        if (subdivisions >= cfg.max_subdivisions) {
            std::ostringstream msg;
            msg << "quadrature did not converge after " << subdivisions
                << " subdivisions (estimate " << total << ", error bound " << total_error << ")";
            throw QuadratureError(msg.str(), total, total_error);
        }
        const Panel worst = panels.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval cannot be split further in double precision.
            throw QuadratureError("quadrature interval collapsed below machine resolution", total,
                                  total_error);
        }
        panels.pop();
        const Panel left = evaluate(f, worst.a, mid);
        const Panel right = evaluate(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++subdivisions;
    }

    // Re-sum from the panels so that the running updates leave no drift.
    double sum = 0.0;
    double err = 0.0;
    std::vector<Panel> all;
    all.reserve(panels.size());
    while (!panels.empty()) {
        all.push_back(panels.top());
        panels.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const Panel& p : all) {
        sum += p.value;
        err += p.error;
    }
    return {sum, err, subdivisions};
}

}  // namespace epigain
