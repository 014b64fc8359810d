#include "owc/quadrature_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "owc/relay_snr.hpp"

namespace owc::quad {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (abscissae/weights on
// the positive half of [-1, 1]; index 7 is the midpoint).
constexpr std::array<double, 8> kXgk = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993945,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0,
};
constexpr std::array<double, 8> kWgk = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679,  0.1903505780647854,  0.2044329400752989, 0.2094821410847278,
};
constexpr std::array<double, 4> kWg = {
    0.1294849661688697, 0.2797053914892766, 0.3818300505051189, 0.4179591836734694,
};

double safe_eval(const Fn& f, double x) {
  const double v = f(x);
  if (std::isnan(v)) {
    std::ostringstream os;
    os << "integrand returned NaN at t = " << x;
    throw ConvergenceError(os.str());
  }
  return v;
}

struct Seg {
  double a, b, value, err;
};

bool by_error(const Seg& s, const Seg& t) { return s.err < t.err; }

Seg eval_gk15(const Fn& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  const double fc = safe_eval(f, mid);
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  double resabs = kWgk[7] * std::fabs(fc);
  std::array<double, 7> flo{}, fhi{};
  for (int i = 0; i < 7; ++i) {
    const double dx = hw * kXgk[i];
    flo[i] = safe_eval(f, mid - dx);
    fhi[i] = safe_eval(f, mid + dx);
    resk += kWgk[i] * (flo[i] + fhi[i]);
    resabs += kWgk[i] * (std::fabs(flo[i]) + std::fabs(fhi[i]));
    if (i % 2 == 1) resg += kWg[(i - 1) / 2] * (flo[i] + fhi[i]);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int i = 0; i < 7; ++i) {
    resasc += kWgk[i] * (std::fabs(flo[i] - reskh) + std::fabs(fhi[i] - reskh));
  }
  resasc *= hw;
  resabs *= hw;
  double err = std::fabs((resk - resg) * hw);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double round_floor = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
  err = std::max(err, round_floor);
  return Seg{a, b, resk * hw, err};
}

QuadResult adaptive(const Fn& f, double lo, double hi, const QuadSpec& spec) {
  std::vector<Seg> heap;
  heap.push_back(eval_gk15(f, lo, hi));
  double locked_v = 0.0;  // intervals at the bisection roundoff limit
  double locked_e = 0.0;
  int nsplit = 0;

  const auto totals = [&](double& v, double& e) {
    v = locked_v;
    e = locked_e;
    for (const Seg& s : heap) {
      v += s.value;
      e += s.err;
    }
  };

  double tv = 0.0;
  double te = 0.0;
  totals(tv, te);
  while (te > std::max(spec.abs_tol, spec.rel_tol * std::fabs(tv))) {
    if (heap.empty() || nsplit >= spec.max_subdivisions) {
      std::ostringstream os;
      os << "adaptive quadrature: "
         << (heap.empty() ? "all intervals at roundoff width" : "subdivision budget exhausted")
         << " (value " << tv << ", error " << te << ", target "
         << std::max(spec.abs_tol, spec.rel_tol * std::fabs(tv)) << ", " << nsplit
         << " bisections)";
      throw ConvergenceError(os.str());
    }
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Seg worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {
      locked_v += worst.value;
      locked_e += worst.err;
      continue;
    }
    heap.push_back(eval_gk15(f, worst.a, mid));
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(eval_gk15(f, mid, worst.b));
    std::push_heap(heap.begin(), heap.end(), by_error);
    ++nsplit;
    totals(tv, te);
  }
  return QuadResult{tv, te, nsplit};
}

}  // namespace

QuadResult integrate(const Fn& f, double lo, double hi, const QuadSpec& spec) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("integrate: endpoints must be finite (use integrate_to_inf)");
  }
  if (lo == hi) return QuadResult{0.0, 0.0, 0};
  if (lo > hi) throw DomainError("integrate: requires lo <= hi");

  QuadSpec inner = spec;
  inner.endpoint_handling = Endpoint::Closed;
  switch (spec.endpoint_handling) {
    case Endpoint::Closed:
      return adaptive(f, lo, hi, inner);
    case Endpoint::OpenLeft: {
      // t = lo + u^2 absorbs an integrable left-endpoint singularity.
      const Fn g = [&f, lo](double u) { return 2.0 * u * f(lo + u * u); };
      return adaptive(g, 0.0, std::sqrt(hi - lo), inner);
    }
    case Endpoint::OpenRight: {
      const Fn g = [&f, hi](double u) { return 2.0 * u * f(hi - u * u); };
      return adaptive(g, 0.0, std::sqrt(hi - lo), inner);
    }
  }
  throw DomainError("integrate: unknown endpoint handling");
}

QuadResult integrate_to_inf(const Fn& f, double lo, const QuadSpec& spec) {
  const Fn g = [&f, lo](double u) {
    const double om = 1.0 - u;
    if (om <= 0.0) return 0.0;
    const double t = lo + u / om;
    if (!std::isfinite(t)) return 0.0;
    const double v = f(t);
    if (v == 0.0) return 0.0;  // avoid 0 * inf at the compactified end
    return v / (om * om);
  };
  QuadSpec inner = spec;
  inner.endpoint_handling = Endpoint::Closed;
  return adaptive(g, 0.0, 1.0, inner);
}

QuadResult integrate_segments(const Fn& f, const std::vector<double>& pts, const QuadSpec& spec) {
  if (pts.size() < 2) throw DomainError("integrate_segments: need at least two points");
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i] < pts[i + 1])) {
      throw DomainError("integrate_segments: points must be strictly increasing");
    }
  }
  QuadResult total;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    QuadSpec seg_spec = spec;
    seg_spec.endpoint_handling = Endpoint::Closed;
    if (i == 0 && spec.endpoint_handling == Endpoint::OpenLeft) {
      seg_spec.endpoint_handling = Endpoint::OpenLeft;
    }
    if (i + 2 == pts.size() && spec.endpoint_handling == Endpoint::OpenRight) {
      seg_spec.endpoint_handling = Endpoint::OpenRight;
    }
    const QuadResult r = integrate(f, pts[i], pts[i + 1], seg_spec);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.subdivisions += r.subdivisions;
  }
  return total;
}

namespace {

// Interior split points for metric integrands over the end-to-end gain law on
// (0, a2]: the upper-edge scale a2/2 plus, for the Gaussian-tail kernel, the
// e^{-q h^2} transition scales sqrt(c/q) that adaptive refinement started on
// the full interval would otherwise step over entirely.
std::vector<double> gain_grid(double a2, double q_gauss) {
  std::vector<double> pts{0.0};
  if (q_gauss > 0.0) {
    for (const double c : {1.0, 10.0, 100.0, 1000.0}) {
      const double h = std::sqrt(c / q_gauss);
      if (h < a2) pts.push_back(h);
    }
  }
  if (a2 * 0.5 > 0.0) pts.push_back(a2 * 0.5);
  pts.push_back(a2);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double metric_by_quadrature(Metric metric, const RelayPair& pair, double gamma_th, double ook_a,
                            double ook_b) {
  const double a2 = pair.min_support_gain();
  const double g0 = pair.gamma0;
  if (!(g0 > 0.0)) throw DomainError("metric_by_quadrature: gamma0 must be > 0");

  QuadSpec spec;
  spec.abs_tol = 1e-14;
  spec.rel_tol = 1e-9;
  spec.max_subdivisions = 4000;
  spec.endpoint_handling = Endpoint::OpenLeft;

  switch (metric) {
    case Metric::Outage: {
      if (gamma_th <= 0.0) return 0.0;
      const double h_th = std::sqrt(gamma_th / g0);
      if (h_th >= a2) return 1.0;
      std::vector<double> pts{0.0};
      if (h_th > 2e-2 * a2) pts.push_back(1e-2 * a2);
      pts.push_back(h_th * 0.5);
      pts.push_back(h_th);
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      return integrate_segments([&pair](double h) { return df_gain_pdf(h, pair); }, pts, spec)
          .value;
    }
    case Metric::AvgSnr: {
      const auto f = [&pair, g0](double h) { return g0 * h * h * df_gain_pdf(h, pair); };
      return integrate_segments(f, gain_grid(a2, 0.0), spec).value;
    }
    case Metric::Rate: {
      const double c = std::numbers::e / (2.0 * std::numbers::pi) * g0;
      const auto f = [&pair, c](double h) {
        return std::log2(1.0 + c * h * h) * df_gain_pdf(h, pair);
      };
      return integrate_segments(f, gain_grid(a2, 0.0), spec).value;
    }
    case Metric::Ber: {
      const double q = ook_b * g0 / 2.0;
      const auto f = [&pair, q](double h) {
        const double w = std::exp(-q * h * h);
        if (w == 0.0) return 0.0;
        return w * df_gain_cdf(h, pair);
      };
      QuadSpec ber_spec = spec;
      ber_spec.abs_tol = 1e-300;  // answers span many decades; drive by rel_tol
      ber_spec.rel_tol = 1e-10;
      const double body = integrate_segments(f, gain_grid(a2, q), ber_spec).value;
      const double boundary = ook_a * 0.5 * std::erfc(std::sqrt(q) * a2);
      return ook_a * std::sqrt(q / std::numbers::pi) * body + boundary;
    }
  }
  throw DomainError("metric_by_quadrature: unknown metric");
}

}  // namespace owc::quad
