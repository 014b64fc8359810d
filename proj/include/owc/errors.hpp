#pragma once
// Exception hierarchy shared by all library components.

#include <stdexcept>
#include <string>

namespace owc {

// Argument outside the documented domain of a function (e.g. negative shape
// parameter, density evaluated outside the support of its law).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative numerical scheme (series, continued fraction, adaptive
// quadrature) failed to reach its target accuracy within its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter combination for which the channel-law constants are undefined
// (degenerate exponent difference, moment-generating function outside its
// convergence region, missing turbulence parameters, ...).
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A scenario configuration was rejected during validation; the message names
// the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace owc
