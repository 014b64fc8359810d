#pragma once
// End-to-end SNR laws for a dual-hop link built from two per-hop channels:
// decode-and-forward (end-to-end SNR = min of hop SNRs, closed CDF/PDF) and
// channel-assisted amplify-and-forward (gamma1*gamma2/(gamma1+gamma2+1),
// density by quadrature only).

#include "owc/channel_models.hpp"
#include "owc/quadrature_oracle.hpp"

namespace owc {

// Two hops sharing the SNR scale gamma0.  Hops are ordered on construction so
// that hop1.a >= hop2.a (the convention every closed-form metric assumes);
// the decode-and-forward law itself is symmetric, so reordering is lossless.
struct RelayPair {
  LinkChannel hop1;
  LinkChannel hop2;
  double gamma0;

  double min_support_gain() const { return hop2.a; }  // a2 <= a1
  double snr_support() const { return hop2.a * hop2.a * gamma0; }
};

RelayPair make_relay_pair(const LinkChannel& h1, const LinkChannel& h2, double gamma0);

// --------------------------------------------------- decode-and-forward law

// End-to-end CDF of min(gamma1, gamma2):  F1 + F2 - F1 F2.
double df_cdf(double gamma, const RelayPair& pair);
// End-to-end density:  f1 (1 - F2) + f2 (1 - F1).
double df_pdf(double gamma, const RelayPair& pair);

// Gain-domain versions (h = sqrt(gamma/gamma0)); used by the quadrature
// oracle, which integrates in h to absorb the gamma^{-1/2} weight.
double df_gain_cdf(double h, const RelayPair& pair);
double df_gain_pdf(double h, const RelayPair& pair);

// ------------------------------------------------- amplify-and-forward law

// Exact channel-assisted AF end-to-end SNR; always <= min(gamma1, gamma2).
double af_snr(double gamma1, double gamma2);

// Density of the harmonic-sum law gamma1*gamma2/(gamma1+gamma2) by adaptive
// quadrature of
//   f(gamma) = gamma \int f1(gamma/t) f2(gamma/(1-t)) dt / (t^2 (1-t)^2)
// over t in (gamma/(a1^2 gamma0), 1 - gamma/(a2^2 gamma0)); returns 0 when
// that interval is empty.  (The "+1" of the exact AF law is dropped only
// here, where the density is vanishingly small; estimators use the exact law.)
double af_pdf_numeric(double gamma, const RelayPair& pair, const quad::QuadSpec& spec = {});

}  // namespace owc
