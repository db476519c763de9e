#pragma once

// Small log-domain helpers shared by the model and the quadrature integrands.

#include <cmath>
#include <limits>
#include <numbers>

namespace epigain::logmath {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // ln(2*pi)
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ln(exp(a) + exp(b)); either argument may be -inf.
inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

// ln(1 + exp(x)) without overflow for large x.
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// ln(1 + exp(-|x|)), the bounded remainder softplus(x) - max(x, 0).
inline double softplus_remainder(double x) {
    return std::log1p(std::exp(-std::fabs(x)));
}

inline double log_normal_pdf(double x, double mean, double var) {
    const double z = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + z * z / var);
}

inline double normal_pdf(double x, double mean, double var) {
    return std::exp(log_normal_pdf(x, mean, var));
}

// Upper tail of the standard normal, accurate far into the tail.
inline double normal_upper_tail(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

inline double standard_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace epigain::logmath
