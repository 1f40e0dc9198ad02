// common.hpp: scalar aliases, constants and error types shared by all modules
#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>

namespace diracbath {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt3 = std::numbers::sqrt3;
inline constexpr cplx I{0.0, 1.0};

// Malformed input: bad sizes, out-of-range sites, invalid configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation at a point where the function is undefined or non-analytic.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iteration, quadrature or integrator failed to reach its tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace diracbath
