#pragma once

#include <stdexcept>
#include <string>

namespace affineopt {

/// Bad dimensions, malformed files, out-of-range configuration values.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The instance or operator violates a structural assumption (K = 0,
/// λ1 = λ2 handed to a Chebyshev routine, singular KKT system).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested operation needs an objective representation that the
/// given objective does not provide (e.g. an explicit Hessian).
class UnsupportedOracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Q metric is indefinite because ηθλmax(W) > 1.
class IndefiniteMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterates blew up; almost always inconsistent step sizes.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace affineopt
