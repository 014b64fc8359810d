#pragma once
// Parameter containers and density/distribution evaluators for the three
// per-hop fading mechanisms and their combined per-hop law:
//
//  * random fog       — optical attenuation whose dB value over the hop is
//                       Gamma(k, scale beta*d/4.343) distributed, i.e. the
//                       gain h_f = e^{-T} with T ~ Gamma(k, rate z),
//                       z = 4.343/(beta*d);
//  * pointing errors  — power-law gain law h_p in (0, A0] with exponent
//                       rho^2 derived from aperture/beamwidth/jitter geometry
//                       (zero boresight), plus the Beckmann displacement MGF
//                       for per-axis jitter with boresight offsets;
//  * turbulence       — exponentiated-Weibull irradiance fading.
//
// A LinkChannel combines fog x pointing (mode FP) or fog x pointing x
// turbulence (mode FPT, a high-SNR tail construction) into the two-parameter
// law with support (0, a], exponent pair (phi^2, z) and kernel constants
// (c1, c2, d1, d2) used by every closed-form metric.

#include <optional>
#include <string>

#include "owc/errors.hpp"

namespace owc {

// ---------------------------------------------------------------- parameters

struct FogParams {
  double k;           // shape of the Gamma-distributed attenuation [-]
  double beta_db_km;  // attenuation scale [dB/km]
  double d_km;        // hop length [km]

  double z() const { return 4.343 / (beta_db_km * d_km); }
  void validate() const;  // throws DomainError naming the offending field

  // Named fog severity classes (shape, scale) paired with a hop length.
  static FogParams light(double d_km) { return {2.32, 13.12, d_km}; }
  static FogParams moderate(double d_km) { return {5.49, 12.06, d_km}; }
  static FogParams thick(double d_km) { return {6.0, 23.06, d_km}; }
};

struct PointingParams {
  double a_r;            // receiver aperture radius [m]
  double w_z;            // beam width at the receiver [m]
  double sigma_s;        // radial jitter std, zero-boresight case [m]
  double mu_x = 0.0;     // boresight offset, x axis [m]
  double mu_y = 0.0;     // boresight offset, y axis [m]
  double sigma_x = 0.0;  // per-axis jitter std (0 => use sigma_s)
  double sigma_y = 0.0;

  void validate() const;
  double jitter_x() const { return sigma_x > 0.0 ? sigma_x : sigma_s; }
  double jitter_y() const { return sigma_y > 0.0 ? sigma_y : sigma_s; }
};

// Derived pointing geometry: upsilon = sqrt(pi/2) a_r / w_z, the maximum
// collected fraction A0 = erf(upsilon)^2, the equivalent beam width
// w_zeq^2 = w_z^2 sqrt(pi) erf(upsilon) / (2 upsilon e^{-upsilon^2}), and the
// jitter exponent rho^2 = w_zeq^2 / (4 sigma_s^2).
struct PointingGeometry {
  double upsilon;
  double A0;
  double w_zeq2;
  double rho2;
  static PointingGeometry from(const PointingParams& p);
};

struct TurbulenceParams {
  double alpha_t;  // aperture-averaging shape [-]
  double beta_t;   // scintillation shape [-]
  double eta_t;    // irradiance scale [-]
  void validate() const;
};

// ------------------------------------------------------------ factor laws

// Fog gain density on (0, 1]:  z^k/Gamma(k) (ln 1/h)^{k-1} h^{z-1}.
double fog_pdf(double h_f, const FogParams& p);
// Fog gain CDF  P[h_f <= x] = Q(k, z ln(1/x))  (regularized upper gamma).
double fog_cdf(double h_f, const FogParams& p);

// Zero-boresight pointing gain density on (0, A0]: rho^2/A0^{rho^2} h^{rho^2-1}.
double pointing_pdf(double h_p, const PointingParams& p);
double pointing_cdf(double h_p, const PointingParams& p);

// Exponentiated-Weibull turbulence density; CDF is
// [1 - exp(-(h/eta)^beta)]^alpha on h >= 0.
double ew_turbulence_pdf(double h_t, const TurbulenceParams& p);
double ew_turbulence_cdf(double h_t, const TurbulenceParams& p);

// Moment generating function of the squared Beckmann displacement
// r^2 = x^2 + y^2, x ~ N(mu_x, sigma_x^2), y ~ N(mu_y, sigma_y^2):
//   M(t) = exp(mu_x^2 t/(1-2t sigma_x^2) + mu_y^2 t/(1-2t sigma_y^2))
//          / sqrt((1-2t sigma_x^2)(1-2t sigma_y^2)),
// valid while both denominators stay positive (else DomainError).
double beckmann_mgf(double t, const PointingParams& p);

// ------------------------------------------------------------ combined law

enum class ChannelMode { FP, FPT };
std::string to_string(ChannelMode m);

// One hop's combined-channel law.  Immutable after construction.
struct LinkChannel {
  ChannelMode mode;
  FogParams fog;
  PointingParams pointing;
  PointingGeometry geom;
  std::optional<TurbulenceParams> turb;

  double k;     // fog shape (real)
  double z;     // fog exponent 4.343/(beta d)
  double a;     // support edge of the combined gain h in (0, a]
  double phi2;  // pointing/turbulence exponent (rho^2 in FP, alpha*beta in FPT)
  double m;     // z - phi^2 (nonzero by construction)

  // Kernel constants; valid only when closed_form_ready.
  double c1 = 0.0;  // z^k phi^2 / (2 m^k a^{phi^2})
  double c2 = 0.0;  // c1 / Gamma(k)
  double d1 = 0.0;  // (z/m)^k
  double d2 = 0.0;  // d1 phi^2 / Gamma(k)

  bool closed_form_ready = false;  // integer k (closed forms need finite sums)
  int k_int = 0;                   // k as integer when closed_form_ready

  double snr_support(double gamma0) const { return a * a * gamma0; }
  // Throws DomainError unless k is integer (closed-form paths call this).
  int require_integer_k(const char* caller) const;
};

// Build one hop's combined law.  FP mode: a = A0, phi^2 = rho^2, turbulence
// must be absent.  FPT mode: turbulence required; phi^2 = alpha_t beta_t and
// a = eta_t A0 / M_{r^2}(2 alpha_t beta_t / w_zeq^2)^{1/(alpha_t beta_t)},
// which needs the MGF argument inside its domain (equivalently
// rho^2 > alpha_t beta_t per axis); otherwise ConstructionError.
// Degenerate |z - phi^2| < 1e-9 is rejected (kernel constants divide by m^k).
LinkChannel build_link(ChannelMode mode, const FogParams& fog, const PointingParams& point,
                       const std::optional<TurbulenceParams>& turb = std::nullopt);

// Combined gain density f_h on (0, a]:
//   phi^2 z^k / (a^{phi^2} Gamma(k)) h^{phi^2-1} I(k, m, ln(a/h)),
// where I is the fog kernel.  Supports real k; evaluates through logs when
// the kernel alone would overflow.  Zero outside (0, a].
double hop_gain_pdf(double h, const LinkChannel& link);

// Combined gain CDF, closed form (integer k): the numerically stable
// telescoped polynomial-in-ln form
//   F(h) = d1 (h/a)^{phi^2} - d2 Gamma(k) (h/a)^z sum_s w_s L^s,
//   w_s  = sum_{r=s}^{k-1} m^r z^{s-r-1} / s!,  L = ln(a/h).
// Throws DomainError for non-integer k (use hop_gain_cdf_quadrature).
double hop_gain_cdf(double h, const LinkChannel& link);

// Same CDF resummed through upper incomplete gamma functions,
//   F(h) = d1 (h/a)^{phi^2} - d2 sum_{i<k} m^i z^{-i-1}/i! IncGamma(i+1, z L),
// kept as an independent consistency check of the telescoped form.
double hop_gain_cdf_gamma_series(double h, const LinkChannel& link);

// CDF for arbitrary real k > 0 by conditioning on the fog attenuation:
//   F(h) = \int_0^u Gamma-density(t) e^{phi^2 (t-u)} dt + Q(k, z u),
// u = ln(a/h); reduces to the closed form at integer k.
double hop_gain_cdf_quadrature(double h, const LinkChannel& link);

// Per-hop SNR-domain law for gamma = gamma0 h^2 on (0, a^2 gamma0]:
// density f_gamma(gamma) = f_h(sqrt(gamma/gamma0)) / (2 sqrt(gamma gamma0)).
double combined_snr_pdf(double gamma, const LinkChannel& link, double gamma0);
// CDF; clamps to 1 above the support edge; integer-k closed form.
double combined_snr_cdf(double gamma, const LinkChannel& link, double gamma0);

}  // namespace owc
