#pragma once
// Adaptive one-dimensional quadrature used as the numerical ground truth for
// all densities, distributions, and metrics defined by integrals.
//
// The scheme is a nested Gauss-Kronrod 7/15 pair with worst-interval-first
// bisection.  Integrable endpoint singularities (e.g. t^{-1/2} at the left
// endpoint) are handled by a square-root substitution selected through
// QuadSpec::endpoint_handling.  Semi-infinite ranges are mapped to (0,1) by
// t = lo + u/(1-u).

#include <functional>
#include <vector>

#include "owc/errors.hpp"

namespace owc {
struct RelayPair;  // relay_snr.hpp
}

namespace owc::quad {

enum class Endpoint { Closed, OpenLeft, OpenRight };

struct QuadSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  Endpoint endpoint_handling = Endpoint::Closed;
};

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

using Fn = std::function<double(double)>;

// Integrate f over the finite interval [lo, hi].  Postcondition:
// error_estimate <= max(abs_tol, rel_tol * |value|); otherwise throws
// ConvergenceError ("subdivision budget exhausted").  A NaN integrand value
// raises ConvergenceError naming the evaluation point.
QuadResult integrate(const Fn& f, double lo, double hi, const QuadSpec& spec = {});

// Integrate f over [lo, +inf) for integrands with (at least) exponential
// decay, via the substitution t = lo + u/(1-u).
QuadResult integrate_to_inf(const Fn& f, double lo, const QuadSpec& spec = {});

// Integrate over [pts[0], pts[back]] split at the interior points; the
// tolerance applies per segment.  Useful when the integrand has a known
// sharp-scale structure an unsplit adaptive pass could miss.
QuadResult integrate_segments(const Fn& f, const std::vector<double>& pts,
                              const QuadSpec& spec = {});

// Performance metric selected for oracle evaluation / simulation.
enum class Metric { Outage, AvgSnr, Rate, Ber };

// Ground-truth evaluation of a metric by adaptive quadrature of its defining
// integral over the end-to-end decode-and-forward SNR law of `pair`:
//   Outage:  Pr[gamma < gamma_th] by integrating the end-to-end density,
//   AvgSnr:  E[gamma],
//   Rate:    E[log2(1 + (e/2pi) gamma)]   (the quantity the closed-form
//            rate expressions bound from below),
//   Ber:     A sqrt(q/pi) \int e^{-q h^2} F(h) dh + A erfc(sqrt(q) a2)/2
//            with q = B gamma0 / 2 (on-off keying, A=1, B=1/2 by default).
// Composite tolerance ~1e-7 relative.
double metric_by_quadrature(Metric metric, const RelayPair& pair, double gamma_th = 0.0,
                            double ook_a = 1.0, double ook_b = 0.5);

}  // namespace owc::quad
