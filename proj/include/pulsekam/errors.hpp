#pragma once

#include <stdexcept>
#include <string>

namespace pulsekam {

// base for everything thrown by the library
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// wrong matrix dimensions (or dimension mismatch between operands)
struct DimensionError : Error {
    using Error::Error;
};

// input violates a Hermiticity / tracelessness / unitarity precondition
struct HermiticityError : Error {
    using Error::Error;
};

// composite quadrature failed to converge within the allowed refinement levels
struct QuadratureError : Error {
    QuadratureError(const std::string& msg, double prev, double last)
        : Error(msg), prev_estimate(prev), last_estimate(last) {}
    double prev_estimate;  // norm of the second-to-last estimate
    double last_estimate;  // norm of the last estimate
};

// invalid scheme / expansion configuration (validation failure, exit code 1 territory)
struct ConfigError : Error {
    using Error::Error;
};

// adaptive integrator step size underflowed
struct StiffnessError : Error {
    using Error::Error;
};

// parameter optimization could not produce any usable sample
struct OptimizationError : Error {
    using Error::Error;
};

}  // namespace pulsekam
