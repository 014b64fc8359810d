#include "owc/relay_snr.hpp"

#include <cmath>
#include <utility>

namespace owc {

namespace {

// Per-hop gain CDF: closed form when the fog shape is integer, fog-conditioned
// quadrature otherwise, so the end-to-end law is defined for every buildable
// channel.
double hop_cdf_any_k(double h, const LinkChannel& link) {
  return link.closed_form_ready ? hop_gain_cdf(h, link) : hop_gain_cdf_quadrature(h, link);
}

}  // namespace

RelayPair make_relay_pair(const LinkChannel& h1, const LinkChannel& h2, double gamma0) {
  if (!(gamma0 > 0.0)) throw DomainError("make_relay_pair: gamma0 must be > 0");
  RelayPair pair{h1, h2, gamma0};
  if (pair.hop1.a < pair.hop2.a) std::swap(pair.hop1, pair.hop2);
  return pair;
}

double df_gain_cdf(double h, const RelayPair& pair) {
  if (h <= 0.0) return 0.0;
  if (h >= pair.hop2.a) return 1.0;
  const double f1 = hop_cdf_any_k(h, pair.hop1);
  const double f2 = hop_cdf_any_k(h, pair.hop2);
  return f1 + f2 - f1 * f2;
}

double df_gain_pdf(double h, const RelayPair& pair) {
  if (h <= 0.0 || h >= pair.hop2.a) return 0.0;
  const double p1 = hop_gain_pdf(h, pair.hop1);
  const double p2 = hop_gain_pdf(h, pair.hop2);
  const double f1 = hop_cdf_any_k(h, pair.hop1);
  const double f2 = hop_cdf_any_k(h, pair.hop2);
  return p1 * (1.0 - f2) + p2 * (1.0 - f1);
}

double df_cdf(double gamma, const RelayPair& pair) {
  if (gamma <= 0.0) return 0.0;
  if (gamma >= pair.snr_support()) return 1.0;
  return df_gain_cdf(std::sqrt(gamma / pair.gamma0), pair);
}

double df_pdf(double gamma, const RelayPair& pair) {
  if (gamma <= 0.0 || gamma >= pair.snr_support()) return 0.0;
  const double h = std::sqrt(gamma / pair.gamma0);
  return df_gain_pdf(h, pair) / (2.0 * std::sqrt(gamma * pair.gamma0));
}

double af_snr(double gamma1, double gamma2) {
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) {
    throw DomainError("af_snr: hop SNRs must be >= 0");
  }
  return gamma1 * gamma2 / (gamma1 + gamma2 + 1.0);
}

double af_pdf_numeric(double gamma, const RelayPair& pair, const quad::QuadSpec& spec) {
  if (gamma <= 0.0) return 0.0;
  const double g0 = pair.gamma0;
  const double cap1 = pair.hop1.a * pair.hop1.a * g0;
  const double cap2 = pair.hop2.a * pair.hop2.a * g0;
  const double t_min = gamma / cap1;
  const double t_max = 1.0 - gamma / cap2;
  if (t_min >= t_max) return 0.0;

  const auto snr_pdf = [g0](const LinkChannel& link, double g) {
    const double h = std::sqrt(g / g0);
    if (h >= link.a) return 0.0;
    return hop_gain_pdf(h, link) / (2.0 * std::sqrt(g * g0));
  };
  const auto integrand = [&](double t) {
    const double f1 = snr_pdf(pair.hop1, gamma / t);
    if (f1 == 0.0) return 0.0;
    const double f2 = snr_pdf(pair.hop2, gamma / (1.0 - t));
    if (f2 == 0.0) return 0.0;
    const double tt = t * (1.0 - t);
    return f1 * f2 / (tt * tt);
  };
  const double mid = 0.5 * (t_min + t_max);
  return gamma * quad::integrate_segments(integrand, {t_min, mid, t_max}, spec).value;
}

}  // namespace owc
