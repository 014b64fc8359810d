#pragma once
// Scalar special functions underlying every closed-form expression in the
// library: gamma-family functions (complete, incomplete, log-weighted
// incomplete), error function / Gaussian tail, the confluent hypergeometric
// function 1F1, polygamma functions, and the truncated exponential-power
// kernel of the fog law.
//
// All functions are pure and thread-safe.  Domain violations throw
// owc::DomainError; non-converging iterations throw owc::ConvergenceError.

#include "owc/errors.hpp"

namespace owc::sf {

// ln Gamma(x) for x > 0, >= 12 significant digits.
double ln_gamma(double x);

// Gamma(x) for x > 0.
double gamma_fn(double x);

// Upper incomplete gamma Gamma(a, x) = \int_x^inf t^{a-1} e^{-t} dt,
// unnormalized.  a > 0, x >= 0.  Series for x < a+1, continued fraction
// otherwise.
double upper_inc_gamma(double a, double x);

// Lower incomplete gamma  gamma(a, x) = Gamma(a) - Gamma(a, x).
double lower_inc_gamma(double a, double x);

// Regularized forms P(a,x) = gamma(a,x)/Gamma(a), Q(a,x) = 1 - P(a,x).
double reg_lower_gamma(double a, double x);
double reg_upper_gamma(double a, double x);

// Finite-series evaluation of Gamma(k, x) for integer k >= 1:
//   (k-1)! e^{-x} \sum_{j=0}^{k-1} x^j / j!.
// Valid for all real x (including x < 0, where e^{-x} grows).
double upper_inc_gamma_int(int k, double x);

// Log-weighted upper incomplete gamma
//   U_j(s, x) = \int_x^inf t^{s-1} e^{-t} ln^j(t) dt,   j in {0, 1, 2}.
// j = 0 reduces to upper_inc_gamma; j >= 1 evaluated by adaptive quadrature
// to ~1e-10 relative.  U_1 equals d/ds Gamma(s, x).
double log_weighted_upper_gamma(double s, double x, int j);

// Log-weighted lower incomplete gamma
//   G_w(s, x) = \int_0^x t^{s-1} e^{-t} ln^w(t) dt,   w in {0, 1, 2}.
// w = 0 reduces to lower_inc_gamma.
double log_weighted_lower_gamma(double s, double x, int w);

// Error function, complementary error function, and the Gaussian tail
// Q(x) = 0.5 * erfc(x / sqrt(2)).
double erf(double x);
double erfc(double x);
double q_function(double x);

// Confluent hypergeometric (Kummer) function 1F1(a; b; z) by Kahan-summed
// series; terminates exactly when a is a non-positive integer.  Throws
// DomainError when b is a non-positive integer not shielded by an earlier
// series termination, ConvergenceError if 500 terms do not reach 1e-12.
double kummer_1f1(double a, double b, double z);

// Digamma psi(x) and trigamma psi'(x) for x > 0, via upward recurrence to
// x >= 10 plus the asymptotic expansion; ~1e-12 relative.
double digamma(double x);
double trigamma(double x);

// Truncated exponential-power kernel of the fog-mixture law:
//   I(k, m, u) = \int_0^u t^{k-1} e^{-m t} dt,   k > 0, u >= 0, any real m.
// Stable for m < 0 (all-positive series / asymptotic form); for m > 0 it is
// lower_inc_gamma(k, m u) / m^k.
double fog_kernel(double k, double m, double u);

// ln I(k, m, u) for m < 0; usable when I itself would overflow.
double fog_kernel_ln_neg_m(double k, double m, double u);

// Exact factorial n! and binomial coefficient for small integers (n <= 170).
double factorial(int n);
double binomial(int n, int k);

// Integer power with exact handling of negative bases.
double ipow(double x, long long n);

}  // namespace owc::sf
