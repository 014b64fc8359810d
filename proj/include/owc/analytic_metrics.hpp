#pragma once
// Closed-form performance expressions for the dual-hop decode-and-forward
// link and its baselines: outage probability, diversity order, average
// electrical SNR, ergodic-rate lower bound, and average bit-error rate of
// on-off keying, plus deterministic-attenuation and single-hop (direct)
// variants.
//
// Each metric exists in up to three shapes:
//   * the default ("corrected") closed form, which passes the quadrature
//     gates (adaptive quadrature of the defining integral is the arbiter);
//   * the quadrature oracle itself (see quadrature_oracle.hpp);
//   * a verbatim-transcribed variant in namespace owc::metrics::literal that
//     preserves the original printed form of the expression, including the
//     defects catalogued in docs/corrections.md.  These exist so the
//     divergences can be reproduced and documented, not for production use.

#include "owc/relay_snr.hpp"

namespace owc::metrics {

// On-off keying parameters of the conditional bit-error rate A*Q(sqrt(B*gamma)).
struct OokParams {
  double A = 1.0;
  double B = 0.5;
};

// ------------------------------------------------------------------ outage

struct OutageResult {
  double value = 0.0;        // Pr[SNR < gamma_th]
  bool above_support = false;  // gamma_th exceeded the SNR support (value 1)
};

// Single-hop outage = per-hop SNR CDF at gamma_th, evaluated through the
// explicit double-sum form
//   d1 (a^2 gamma0/gamma_th)^{-phi^2/2}
//     - d2 (k-1)! (h/a)^z sum_{i<k} sum_{j<=i} m^i z^{j-i-1} L^j / j!
// (an independent regrouping of the telescoped CDF; the two agree to 1e-10).
// gamma_th above the support returns {1, true} instead of throwing.
OutageResult outage_per_hop(const LinkChannel& link, double gamma0, double gamma_th);

// Dual-hop decode-and-forward outage  P1 + P2 - P1 P2.
OutageResult outage_df(const RelayPair& pair, double gamma_th);

// ---------------------------------------------------------- diversity order

enum class DiversityLimiter { PointingHop1, PointingHop2, FogHop1, FogHop2 };
std::string to_string(DiversityLimiter lim);

struct DiversityResult {
  double order;              // (1/2) min{phi1^2, phi2^2, z1, z2}
  DiversityLimiter limiter;  // which argument attains the min (ties broken in
                             // the order phi1, phi2, z1, z2)
};
DiversityResult diversity_order(const RelayPair& pair);

// ------------------------------------------------- average SNR and rate

// General two-hop closed forms (hops may differ in all parameters; both hops
// must share the same integer fog shape k).  The average-SNR expression sums
// twelve term groups labelled A..L; the rate bound reuses the same grouping.
// Special-function failures inside a group are rethrown naming the group and
// the (i, j, t) summation indices at fault.
double avg_snr_general(const RelayPair& pair);
double ergodic_rate_general(const RelayPair& pair);  // bits/s/Hz, lower bound

// Symmetric-hop closed forms (identical hops, relay at the midpoint); six
// term groups, any integer k.
double avg_snr_symmetric(const LinkChannel& link, double gamma0);
double ergodic_rate_symmetric(const LinkChannel& link, double gamma0);

// Compact k = 2 symmetric forms.
double avg_snr_k2(const LinkChannel& link, double gamma0);
// First (positive) term of the k=2 average SNR and the magnitude ratio of the
// negative correction term to it; the correction is structurally < 1.
double avg_snr_k2_first_term(const LinkChannel& link, double gamma0);
double ergodic_rate_k2(const LinkChannel& link, double gamma0);

// ------------------------------------- deterministic-attenuation baselines

// Fixed (non-random) fog: attenuation e^{-psi d} instead of a random draw.
struct DeterministicPathLoss {
  double psi_per_km = 0.0;  // attenuation coefficient [1/km]
  double d_km = 0.0;        // total link length [km]
  double end_to_end_gain() const;  // e^{-psi d}
  double per_hop_gain() const;     // e^{-psi d/2} (relay at midpoint)
};

// Power-law channel h in (0, a]: F(h) = (h/a)^{phi^2}.  This is the per-hop
// law once fog is deterministic; a and phi^2 come from the same
// pointing x turbulence construction as FPT mode.
struct PowerLawChannel {
  double a;
  double phi2;
};
PowerLawChannel build_power_law_channel(const PointingParams& point,
                                        const TurbulenceParams& turb);

struct SnrRatePair {
  double avg_snr;       // linear
  double ergodic_rate;  // bits/s/Hz, lower bound
};

// Deterministic-fog average SNR and rate.  relayed=true: symmetric dual-hop
// decode-and-forward with per-hop gain e^{-psi d/2},
//   avg = (a L_r)^2 phi^4 gamma0 / (2 + 3 phi^2 + phi^4).
// relayed=false: single direct link with gain e^{-psi d},
//   avg = phi^2 (a L)^2 gamma0 / (2 + phi^2).
SnrRatePair deterministic_metrics(const PowerLawChannel& ch, const DeterministicPathLoss& pl,
                                  double gamma0, bool relayed);

// ------------------------------------------------------------------- BER

// Dual-hop decode-and-forward average BER, closed form for k = 2 (eight term
// groups plus a support-edge boundary term).  Other shapes: use the
// quadrature oracle.  Errors are rethrown naming the failing term group.
double avg_ber_k2(const RelayPair& pair, const OokParams& ook = {});

// Deterministic-fog relayed average BER (power-law channel), with
// P = B (a L_r)^2 gamma0 / 2:
//   (1/sqrt(pi)) [P^{-phi^2/2} g((1+phi^2)/2, P) - P^{-phi^2} g(1/2+phi^2, P)/2]
//   + erfc(sqrt(P))/2,        g = lower incomplete gamma.
double avg_ber_deterministic(const PowerLawChannel& ch, const DeterministicPathLoss& pl,
                             double gamma0, const OokParams& ook = {});

// ------------------------------------------------------- single-hop direct

// Direct (no relay) link under the random-fog combined law; moment
// identities valid for real k:
//   E[gamma]    = gamma0 a^2 phi^2/(phi^2+2) (z/(z+2))^k,
//   rate bound  = log2(e/2pi) + (ln gamma0 + 2 ln a - 2/phi^2 - 2k/z)/ln 2.
double avg_snr_direct(const LinkChannel& link, double gamma0);
double ergodic_rate_direct(const LinkChannel& link, double gamma0);

// Direct-link average BER, closed form for integer k <= 3 (log-weighted
// incomplete-gamma machinery covers ln-powers up to 2).
double avg_ber_direct(const LinkChannel& link, double gamma0, const OokParams& ook = {});

// ------------------------------------------------------- literal variants

namespace literal {

// Verbatim transcriptions of the printed closed forms.  Each deviates from
// the corrected implementation only where docs/corrections.md records a
// defect; IDs below refer to that catalogue.
double avg_snr_symmetric(const LinkChannel& link, double gamma0);     // S1, S2
double ergodic_rate_symmetric(const LinkChannel& link, double gamma0);  // R1
double ergodic_rate_k2(const LinkChannel& link, double gamma0);         // R2
double avg_snr_general(const RelayPair& pair);                          // G1-G3
double ergodic_rate_general(const RelayPair& pair);                     // G4-G6, R1
double avg_ber_k2(const RelayPair& pair, const OokParams& ook = {});    // B1-B4
double avg_ber_deterministic(const PowerLawChannel& ch, const DeterministicPathLoss& pl,
                             double gamma0, const OokParams& ook = {});  // B5

}  // namespace literal

}  // namespace owc::metrics
