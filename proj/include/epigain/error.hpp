#pragma once

#include <stdexcept>
#include <string>

namespace epigain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or malformed input documents.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A quantity left the representable range, or a log of zero was required
/// where probability mass is nonzero.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double estimate, double error_bound)
        : Error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

/// An optimum required downstream did not converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// The objective returned a non-finite value during maximization.
class OptimizerError : public Error {
public:
    OptimizerError(const std::string& what, double at)
        : Error(what), at_(at) {}

    double at() const noexcept { return at_; }

private:
    double at_;
};

}  // namespace epigain
