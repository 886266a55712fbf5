#pragma once

#include <stdexcept>
#include <string>

namespace epsflow {

/// Invalid user-supplied configuration (bad ranges, malformed grids, schema
/// violations). The CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure failed to reach its target accuracy.
/// The CLI maps this (and IntegrationError) to exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive step size underflowed or the solution left the representable
/// range; carries the failing net parameter and time.
struct IntegrationError : NumericalError {
    IntegrationError(const std::string& what, double eps_, double t_)
        : NumericalError(what + " (epsilon=" + std::to_string(eps_) +
                         ", t=" + std::to_string(t_) + ")"),
          eps(eps_), t(t_) {}
    double eps;
    double t;
};

/// Quadrature failed to converge; carries the offending interval.
struct QuadratureError : NumericalError {
    QuadratureError(const std::string& what, double a_, double b_)
        : NumericalError(what + " on [" + std::to_string(a_) + ", " +
                         std::to_string(b_) + "]"),
          a(a_), b(b_) {}
    double a;
    double b;
};

/// A sampled path is too coarse for continuous unwinding.
struct SamplingError : std::invalid_argument {
    explicit SamplingError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace epsflow
