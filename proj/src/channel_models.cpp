#include "owc/channel_models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "owc/quadrature_oracle.hpp"
#include "owc/specfun.hpp"

namespace owc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

// ---------------------------------------------------------------- parameters

void FogParams::validate() const {
  require(k > 0.0, "FogParams.k must be > 0");
  require(beta_db_km > 0.0, "FogParams.beta_db_km must be > 0");
  require(d_km > 0.0, "FogParams.d_km must be > 0");
}

void PointingParams::validate() const {
  require(a_r > 0.0, "PointingParams.a_r must be > 0");
  require(w_z > 0.0, "PointingParams.w_z must be > 0");
  require(sigma_s > 0.0, "PointingParams.sigma_s must be > 0");
  require(sigma_x >= 0.0, "PointingParams.sigma_x must be >= 0");
  require(sigma_y >= 0.0, "PointingParams.sigma_y must be >= 0");
}

PointingGeometry PointingGeometry::from(const PointingParams& p) {
  p.validate();
  PointingGeometry g;
  g.upsilon = std::sqrt(std::numbers::pi / 2.0) * p.a_r / p.w_z;
  const double erf_u = std::erf(g.upsilon);
  g.A0 = erf_u * erf_u;
  g.w_zeq2 = p.w_z * p.w_z * std::sqrt(std::numbers::pi) * erf_u /
             (2.0 * g.upsilon * std::exp(-g.upsilon * g.upsilon));
  g.rho2 = g.w_zeq2 / (4.0 * p.sigma_s * p.sigma_s);
  return g;
}

void TurbulenceParams::validate() const {
  require(alpha_t > 0.0, "TurbulenceParams.alpha_t must be > 0");
  require(beta_t > 0.0, "TurbulenceParams.beta_t must be > 0");
  require(eta_t > 0.0, "TurbulenceParams.eta_t must be > 0");
}

// ------------------------------------------------------------ factor laws

double fog_pdf(double h_f, const FogParams& p) {
  p.validate();
  if (h_f <= 0.0 || h_f > 1.0) return 0.0;
  const double z = p.z();
  const double u = std::log(1.0 / h_f);
  // z^k/Gamma(k) u^{k-1} h^{z-1}, assembled in log space.
  if (u == 0.0) return (p.k == 1.0) ? z : (p.k > 1.0 ? 0.0 : HUGE_VAL);
  return std::exp(p.k * std::log(z) - sf::ln_gamma(p.k) + (p.k - 1.0) * std::log(u) +
                  (z - 1.0) * std::log(h_f));
}

double fog_cdf(double h_f, const FogParams& p) {
  p.validate();
  if (h_f <= 0.0) return 0.0;
  if (h_f >= 1.0) return 1.0;
  return sf::reg_upper_gamma(p.k, p.z() * std::log(1.0 / h_f));
}

double pointing_pdf(double h_p, const PointingParams& p) {
  const PointingGeometry g = PointingGeometry::from(p);
  if (h_p <= 0.0 || h_p > g.A0) return 0.0;
  return g.rho2 / std::pow(g.A0, g.rho2) * std::pow(h_p, g.rho2 - 1.0);
}

double pointing_cdf(double h_p, const PointingParams& p) {
  const PointingGeometry g = PointingGeometry::from(p);
  if (h_p <= 0.0) return 0.0;
  if (h_p >= g.A0) return 1.0;
  return std::pow(h_p / g.A0, g.rho2);
}

double ew_turbulence_pdf(double h_t, const TurbulenceParams& p) {
  p.validate();
  if (h_t <= 0.0) return 0.0;
  const double r = std::pow(h_t / p.eta_t, p.beta_t);
  const double core = std::exp(-r);
  return p.alpha_t * p.beta_t / p.eta_t * std::pow(h_t / p.eta_t, p.beta_t - 1.0) * core *
         std::pow(-std::expm1(-r), p.alpha_t - 1.0);
}

double ew_turbulence_cdf(double h_t, const TurbulenceParams& p) {
  p.validate();
  if (h_t <= 0.0) return 0.0;
  const double r = std::pow(h_t / p.eta_t, p.beta_t);
  return std::pow(-std::expm1(-r), p.alpha_t);
}

double beckmann_mgf(double t, const PointingParams& p) {
  p.validate();
  const double sx = p.jitter_x();
  const double sy = p.jitter_y();
  const double dx = 1.0 - 2.0 * t * sx * sx;
  const double dy = 1.0 - 2.0 * t * sy * sy;
  if (dx <= 0.0 || dy <= 0.0) {
    std::ostringstream os;
    os << "beckmann_mgf: argument t = " << t
       << " outside the convergence strip (need 2 t sigma^2 < 1 per axis)";
    throw DomainError(os.str());
  }
  return std::exp(p.mu_x * p.mu_x * t / dx + p.mu_y * p.mu_y * t / dy) / std::sqrt(dx * dy);
}

// ------------------------------------------------------------ combined law

std::string to_string(ChannelMode m) { return m == ChannelMode::FP ? "FP" : "FPT"; }

int LinkChannel::require_integer_k(const char* caller) const {
  if (!closed_form_ready) {
    std::ostringstream os;
    os << caller << ": closed form requires an integer fog shape k >= 1 (got k = " << k << ")";
    throw DomainError(os.str());
  }
  return k_int;
}

LinkChannel build_link(ChannelMode mode, const FogParams& fog, const PointingParams& point,
                       const std::optional<TurbulenceParams>& turb) {
  fog.validate();
  point.validate();

  LinkChannel link;
  link.mode = mode;
  link.fog = fog;
  link.pointing = point;
  link.geom = PointingGeometry::from(point);
  link.turb = turb;
  link.k = fog.k;
  link.z = fog.z();

  if (mode == ChannelMode::FP) {
    if (turb.has_value()) {
      throw ConstructionError("build_link: FP mode does not take turbulence parameters");
    }
    link.a = link.geom.A0;
    link.phi2 = link.geom.rho2;
  } else {
    if (!turb.has_value()) {
      throw ConstructionError("build_link: FPT mode requires turbulence parameters");
    }
    turb->validate();
    const double ab = turb->alpha_t * turb->beta_t;
    const double t = 2.0 * ab / link.geom.w_zeq2;
    const double sx = point.jitter_x();
    const double sy = point.jitter_y();
    if (1.0 - 2.0 * t * sx * sx <= 0.0 || 1.0 - 2.0 * t * sy * sy <= 0.0) {
      std::ostringstream os;
      os << "build_link: FPT support constant undefined; the displacement MGF needs "
            "w_zeq^2/(4 sigma^2) > alpha_t*beta_t on both axes (alpha_t*beta_t = "
         << ab << ")";
      throw ConstructionError(os.str());
    }
    const double mg = beckmann_mgf(t, point);
    link.a = turb->eta_t * link.geom.A0 / std::pow(mg, 1.0 / ab);
    link.phi2 = ab;
  }

  link.m = link.z - link.phi2;
  if (std::fabs(link.m) < 1e-9) {
    std::ostringstream os;
    os << "build_link: degenerate parameters, fog exponent z = " << link.z
       << " coincides with the power-law exponent phi^2 = " << link.phi2
       << " (kernel constants divide by (z - phi^2)^k)";
    throw ConstructionError(os.str());
  }

  const double k_round = std::round(link.k);
  link.closed_form_ready = std::fabs(link.k - k_round) < 1e-9 && k_round >= 1.0;
  if (link.closed_form_ready) {
    link.k_int = static_cast<int>(k_round);
    link.d1 = sf::ipow(link.z / link.m, link.k_int);
    link.d2 = link.d1 * link.phi2 / sf::factorial(link.k_int - 1);
    link.c1 = link.d1 * link.phi2 / (2.0 * std::pow(link.a, link.phi2));
    link.c2 = link.c1 / sf::factorial(link.k_int - 1);
  }
  return link;
}

double hop_gain_pdf(double h, const LinkChannel& link) {
  if (h <= 0.0 || h > link.a) return 0.0;
  const double u = std::log(link.a / h);
  if (u == 0.0) return 0.0;  // the fog kernel vanishes at the support edge
  const double ln_pref = std::log(link.phi2) + link.k * std::log(link.z) - sf::ln_gamma(link.k) -
                         link.phi2 * std::log(link.a) + (link.phi2 - 1.0) * std::log(h);
  double ln_kernel;
  if (link.m < 0.0 && -link.m * u > 40.0) {
    ln_kernel = sf::fog_kernel_ln_neg_m(link.k, link.m, u);
  } else {
    const double kernel = sf::fog_kernel(link.k, link.m, u);
    if (kernel <= 0.0) return 0.0;
    ln_kernel = std::log(kernel);
  }
  return std::exp(ln_pref + ln_kernel);
}

double hop_gain_cdf(double h, const LinkChannel& link) {
  const int k = link.require_integer_k("hop_gain_cdf");
  if (h <= 0.0) return 0.0;
  if (h > link.a) return 1.0;
  const double big_l = std::log(link.a / h);
  // Telescoped polynomial in L = ln(a/h): the only cancellation left is the
  // final subtraction of the two power terms.
  double poly = 0.0;
  double lpow = 1.0;
  for (int s = 0; s < k; ++s) {
    double ws = 0.0;
    for (int r = s; r < k; ++r) {
      ws += sf::ipow(link.m, r) * sf::ipow(link.z, s - r - 1);
    }
    ws /= sf::factorial(s);
    poly += ws * lpow;
    lpow *= big_l;
  }
  const double ratio = h / link.a;
  return link.d1 * std::pow(ratio, link.phi2) -
         link.d2 * sf::factorial(k - 1) * std::pow(ratio, link.z) * poly;
}

double hop_gain_cdf_gamma_series(double h, const LinkChannel& link) {
  const int k = link.require_integer_k("hop_gain_cdf_gamma_series");
  if (h <= 0.0) return 0.0;
  if (h > link.a) return 1.0;
  const double big_l = std::log(link.a / h);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    sum += sf::ipow(link.m, i) * sf::ipow(link.z, -i - 1) / sf::factorial(i) *
           sf::upper_inc_gamma_int(i + 1, link.z * big_l);
  }
  // The series weight is d2 * Gamma(k) == d1 * phi2 (not d2 alone, which only
  // matches when Gamma(k) = 1, i.e. k <= 2).
  return link.d1 * std::pow(h / link.a, link.phi2) - link.d1 * link.phi2 * sum;
}

double hop_gain_cdf_quadrature(double h, const LinkChannel& link) {
  if (h <= 0.0) return 0.0;
  if (h >= link.a) return 1.0;
  const double u = std::log(link.a / h);
  const double k = link.k;
  const double z = link.z;
  const double phi2 = link.phi2;
  const double ln_c = k * std::log(z) - sf::ln_gamma(k);
  const auto integrand = [=](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp(ln_c + (k - 1.0) * std::log(t) - z * t + phi2 * (t - u));
  };
  quad::QuadSpec spec;
  spec.abs_tol = 1e-14;
  spec.rel_tol = 1e-11;
  if (k < 1.0) spec.endpoint_handling = quad::Endpoint::OpenLeft;
  const double body = quad::integrate_segments(integrand, {0.0, 0.5 * u, u}, spec).value;
  return body + sf::reg_upper_gamma(k, z * u);
}

double combined_snr_pdf(double gamma, const LinkChannel& link, double gamma0) {
  if (!(gamma0 > 0.0)) throw DomainError("combined_snr_pdf: gamma0 must be > 0");
  if (gamma <= 0.0) return 0.0;
  const double h = std::sqrt(gamma / gamma0);
  if (h > link.a) return 0.0;
  return hop_gain_pdf(h, link) / (2.0 * std::sqrt(gamma * gamma0));
}

double combined_snr_cdf(double gamma, const LinkChannel& link, double gamma0) {
  if (!(gamma0 > 0.0)) throw DomainError("combined_snr_cdf: gamma0 must be > 0");
  if (gamma <= 0.0) return 0.0;
  const double h = std::sqrt(gamma / gamma0);
  if (h > link.a) return 1.0;
  return hop_gain_cdf(h, link);
}

}  // namespace owc
