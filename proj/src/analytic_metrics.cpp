#include "owc/analytic_metrics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "owc/specfun.hpp"

namespace owc::metrics {

namespace {

using sf::factorial;
using sf::ipow;

const double kLn2 = std::numbers::ln2;
// Additive rate constant log2(e / 2 pi) of the input-distribution bound.
const double kRateConst = std::log2(std::numbers::e / (2.0 * std::numbers::pi));

std::string group_ctx(const char* caller, const char* group) {
  std::ostringstream os;
  os << caller << ", term group " << group << ": ";
  return os.str();
}

std::string group_ctx(const char* caller, const char* group, int i, int j, int t) {
  std::ostringstream os;
  os << caller << ", term group " << group << " (i=" << i << ", j=" << j << ", t=" << t << "): ";
  return os.str();
}

template <typename F>
double guarded(const char* caller, const char* group, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw DomainError(group_ctx(caller, group) + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(group_ctx(caller, group) + e.what());
  }
}

// Both hops of every general (asymmetric) closed form must share one integer
// fog shape; precompute the constants the term groups use.
struct TwoHop {
  double a1, p1, z1, m1;
  double a2, p2, z2, m2;
  double c11, c12, c21, c22;
  double d11, d12, d21, d22;
  int k;
  double fk;  // (k-1)!
  double lc;  // ln(a1/a2) >= 0 by the RelayPair ordering
};

TwoHop two_hop(const RelayPair& pair, const char* caller) {
  const int k1 = pair.hop1.require_integer_k(caller);
  const int k2 = pair.hop2.require_integer_k(caller);
  if (k1 != k2) {
    std::ostringstream os;
    os << caller << ": hops must share one integer fog shape k (got " << k1 << " and " << k2
       << ")";
    throw DomainError(os.str());
  }
  TwoHop t;
  t.a1 = pair.hop1.a;
  t.p1 = pair.hop1.phi2;
  t.z1 = pair.hop1.z;
  t.m1 = pair.hop1.m;
  t.a2 = pair.hop2.a;
  t.p2 = pair.hop2.phi2;
  t.z2 = pair.hop2.z;
  t.m2 = pair.hop2.m;
  t.c11 = pair.hop1.c1;
  t.c12 = pair.hop1.c2;
  t.c21 = pair.hop2.c1;
  t.c22 = pair.hop2.c2;
  t.d11 = pair.hop1.d1;
  t.d12 = pair.hop1.d2;
  t.d21 = pair.hop2.d1;
  t.d22 = pair.hop2.d2;
  t.k = k1;
  t.fk = factorial(k1 - 1);
  t.lc = std::log(t.a1 / t.a2);
  return t;
}

}  // namespace

// ------------------------------------------------------------------ outage

OutageResult outage_per_hop(const LinkChannel& link, double gamma0, double gamma_th) {
  const int k = link.require_integer_k("outage_per_hop");
  if (!(gamma0 > 0.0)) throw DomainError("outage_per_hop: gamma0 must be > 0");
  if (gamma_th <= 0.0) return {0.0, false};
  if (gamma_th >= link.snr_support(gamma0)) return {1.0, true};

  const double h = std::sqrt(gamma_th / gamma0);
  const double big_l = std::log(link.a / h);
  double dsum = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      dsum += ipow(link.m, i) * ipow(link.z, j - i - 1) * ipow(big_l, j) / factorial(j);
    }
  }
  const double value = link.d1 * std::pow(gamma_th / (link.a * link.a * gamma0), link.phi2 / 2.0) -
                       link.d2 * factorial(k - 1) * std::pow(h / link.a, link.z) * dsum;
  return {value, false};
}

OutageResult outage_df(const RelayPair& pair, double gamma_th) {
  const OutageResult r1 = outage_per_hop(pair.hop1, pair.gamma0, gamma_th);
  const OutageResult r2 = outage_per_hop(pair.hop2, pair.gamma0, gamma_th);
  return {r1.value + r2.value - r1.value * r2.value, r1.above_support || r2.above_support};
}

// ---------------------------------------------------------- diversity order

std::string to_string(DiversityLimiter lim) {
  switch (lim) {
    case DiversityLimiter::PointingHop1: return "pointing exponent, hop 1";
    case DiversityLimiter::PointingHop2: return "pointing exponent, hop 2";
    case DiversityLimiter::FogHop1: return "fog exponent, hop 1";
    case DiversityLimiter::FogHop2: return "fog exponent, hop 2";
  }
  return "?";
}

DiversityResult diversity_order(const RelayPair& pair) {
  const double cand[4] = {pair.hop1.phi2, pair.hop2.phi2, pair.hop1.z, pair.hop2.z};
  const DiversityLimiter who[4] = {DiversityLimiter::PointingHop1, DiversityLimiter::PointingHop2,
                                   DiversityLimiter::FogHop1, DiversityLimiter::FogHop2};
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (cand[i] < cand[best]) best = i;  // ties keep the earlier entry
  }
  return {0.5 * cand[best], who[best]};
}

// ------------------------------------------------- average SNR and rate

namespace {

// Six-group symmetric average SNR; `corrected` toggles the defects S1 and S2
// of docs/corrections.md.
double snr_symmetric_impl(const LinkChannel& link, double g0, bool corrected) {
  const int k = link.require_integer_k("avg_snr_symmetric");
  if (!(g0 > 0.0)) throw DomainError("avg_snr_symmetric: gamma0 must be > 0");
  const double a = link.a, p2 = link.phi2, z = link.z, m = link.m;
  const double c1 = link.c1, c2 = link.c2, d1 = link.d1, d2 = link.d2;
  const double fk = factorial(k - 1);
  const double a2g = std::pow(a, 2.0 + p2) * g0;

  const double t1 = 2.0 * c1 * a2g / (2.0 + p2);
  const double t2 = 2.0 * c2 * a2g * (-1.0 + ipow(m / (2.0 + z), k)) * fk / (2.0 + p2);
  const double t3 = -c1 * d1 * a2g / (1.0 + p2);
  double s4 = 0.0;
  for (int i = 0; i < k; ++i) {
    s4 += ipow(m, i) * ipow(z, -i - 1) / factorial(i) * factorial(i) *
          ipow(p2 + z + 2.0, -i - 1) * (ipow(p2 + z + 2.0, i + 1) - ipow(z, i + 1)) /
          (p2 + 2.0);
  }
  double t4 = c1 * d2 * fk * s4;
  if (corrected) t4 *= 2.0 * a2g;  // S1: restores the dropped factor 2 a^{2+phi^2} gamma0
  const double t5 =
      -c2 * d1 * a2g * (-1.0 + ipow(m / (2.0 + m + 2.0 * p2), k)) * fk / (1.0 + p2);
  // S2: the exponential-rate base is 2 + 2z, not phi^2 + 2.
  const double base = corrected ? (2.0 + 2.0 * z) : (p2 + 2.0);
  double s6 = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      for (int t = 0; t <= i; ++t) {
        s6 += ipow(m, i + j) * ipow(z, t - i - 1) * factorial(j + t) /
              (factorial(j) * factorial(t) * ipow(base, j + t + 1));
      }
    }
  }
  double t6 = -c2 * d2 * std::pow(a, p2 + 2.0) * fk * fk * s6;
  if (corrected) t6 *= 2.0 * g0;  // S2 (continued): dimensional factor 2 gamma0
  return 2.0 * (t1 + t2 + t3 + t4 + t5 + t6);
}

// Six-group symmetric rate bound; `corrected` selects the exact prefactor
// 2/ln 2 over the printed rounding 2.8854 (R1).
double rate_symmetric_impl(const LinkChannel& link, double g0, bool corrected) {
  const int k = link.require_integer_k("ergodic_rate_symmetric");
  if (!(g0 > 0.0)) throw DomainError("ergodic_rate_symmetric: gamma0 must be > 0");
  const double a = link.a, p2 = link.phi2, z = link.z, m = link.m;
  const double c1 = link.c1, c2 = link.c2, d1 = link.d1, d2 = link.d2;
  const double fk = factorial(k - 1);
  const double ap = std::pow(a, p2);
  const double kk = std::log(a * a * g0);

  const double r1 = 2.0 * c1 * ap * (-2.0 + p2 * kk) / (p2 * p2);
  double sum2 = 0.0;
  for (int i = 0; i < k; ++i) {
    sum2 += ipow(m, i) * (-2.0 * (1.0 + i) + z * kk) / ipow(z, 2 + i);
  }
  const double r2 = -2.0 * c2 * ap * fk * sum2;
  const double r3 = -c1 * d1 * ap * (-1.0 + p2 * kk) / (p2 * p2);
  double sum4 = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      sum4 += ipow(m, i) * ipow(z, j - i - 1) * (-2.0 * (1.0 + j) + (p2 + z) * kk) /
              ipow(p2 + z, 2 + j);
    }
  }
  const double r4 = 2.0 * c1 * d2 * ap * fk * sum4;
  double sum5 = 0.0;
  for (int i = 0; i < k; ++i) {
    sum5 += ipow(m, i) * (-2.0 * (1.0 + i) + (p2 + z) * kk) / ipow(p2 + z, 2 + i);
  }
  const double r5 = 2.0 * c2 * d1 * ap * fk * sum5;
  double sum6 = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      for (int t = 0; t <= i; ++t) {
        sum6 += ipow(m, i + j) * ipow(z, -i - j - 3) * factorial(j + t) *
                (1.0 + j + t - z * kk) / (factorial(j) * factorial(t) * ipow(2.0, j + t));
      }
    }
  }
  const double r6 = c2 * d2 * ap * fk * fk * sum6;
  const double pref = corrected ? 2.0 / kLn2 : 2.8854;  // R1
  return kRateConst + pref * (r1 + r2 + r3 + r4 + r5 + r6);
}

}  // namespace

double avg_snr_symmetric(const LinkChannel& link, double gamma0) {
  return snr_symmetric_impl(link, gamma0, true);
}

double ergodic_rate_symmetric(const LinkChannel& link, double gamma0) {
  return rate_symmetric_impl(link, gamma0, true);
}

double avg_snr_k2(const LinkChannel& link, double gamma0) {
  if (link.require_integer_k("avg_snr_k2") != 2) {
    throw DomainError("avg_snr_k2: compact form covers fog shape k = 2 only");
  }
  if (!(gamma0 > 0.0)) throw DomainError("avg_snr_k2: gamma0 must be > 0");
  const double p2 = link.phi2, z = link.z;
  const double lead = 2.0 * (link.a * std::sqrt(p2) * z) * (link.a * std::sqrt(p2) * z) * gamma0;
  const double term1 = 1.0 / ((2.0 + p2) * (2.0 + z) * (2.0 + z));
  const double term2 =
      (2.0 * ipow(1.0 + z, 3) + p2 * p2 * (1.0 + 2.0 * z) + p2 * (3.0 + 4.0 * z * (2.0 + z))) /
      (4.0 * (1.0 + p2) * ipow(1.0 + z, 3) * (2.0 + p2 + z) * (2.0 + p2 + z));
  return lead * (term1 - term2);
}

double avg_snr_k2_first_term(const LinkChannel& link, double gamma0) {
  if (link.require_integer_k("avg_snr_k2_first_term") != 2) {
    throw DomainError("avg_snr_k2_first_term: compact form covers fog shape k = 2 only");
  }
  const double p2 = link.phi2, z = link.z;
  const double lead = 2.0 * (link.a * std::sqrt(p2) * z) * (link.a * std::sqrt(p2) * z) * gamma0;
  return lead / ((2.0 + p2) * (2.0 + z) * (2.0 + z));
}

namespace {

double rate_k2_impl(const LinkChannel& link, double g0, bool corrected) {
  if (link.require_integer_k("ergodic_rate_k2") != 2) {
    throw DomainError("ergodic_rate_k2: compact form covers fog shape k = 2 only");
  }
  if (!(g0 > 0.0)) throw DomainError("ergodic_rate_k2: gamma0 must be > 0");
  const double a = link.a, p2 = link.phi2, z = link.z;
  const double lng = std::log(g0);
  const double lna = std::log(a);
  // R2: the printed decimal 0.36 is the rounded value of 1/(4 ln 2).
  const double c36 = corrected ? 1.0 / (4.0 * kLn2) : 0.36;
  return kRateConst +
         2.0 * ((p2 * z * (2.0 * lna + lng) - 2.0 * (2.0 * p2 + z)) / (p2 * z * kLn2) -
                c36 * (p2 / ((p2 + z) * (p2 + z)) - 2.0 / p2 - 5.0 / z - 3.0 / (p2 + z) +
                       4.0 * lna + 2.0 * lng));
}

}  // namespace

double ergodic_rate_k2(const LinkChannel& link, double gamma0) {
  return rate_k2_impl(link, gamma0, true);
}

// --------------------------------------------- general twelve-group forms

namespace {

// Twelve-group general average SNR.  `corrected` toggles G1 (group J
// prefactor), G2 (group L support exponent) and G3 (the spurious second
// Kummer series in groups H and L).
double snr_general_impl(const RelayPair& pair, bool corrected) {
  const char* caller = "avg_snr_general";
  const TwoHop th = two_hop(pair, caller);
  const double g0 = pair.gamma0;
  if (!(g0 > 0.0)) throw DomainError("avg_snr_general: gamma0 must be > 0");
  const double a1 = th.a1, p1 = th.p1, z1 = th.z1, m1 = th.m1;
  const double a2 = th.a2, p2 = th.p2, z2 = th.z2, m2 = th.m2;
  const int k = th.k;
  const double fk = th.fk, lc = th.lc;

  const double gA = guarded(caller, "A", [&] {
    return th.c11 * std::pow(a2, 2.0 + p1) * g0 / (2.0 + p1);
  });
  const double gB = guarded(caller, "B", [&] {
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      s += ipow(m1 / (2.0 + z1), j) * sf::upper_inc_gamma_int(1 + j, (2.0 + z1) * lc) /
           factorial(j);
    }
    return -(th.c12 * std::pow(a1, 2.0 + p1) * g0 * fk / (2.0 + z1)) * s;
  });
  const double gC = guarded(caller, "C", [&] {
    return th.c21 * std::pow(a2, 2.0 + p2) * g0 / (2.0 + p2);
  });
  const double gD = guarded(caller, "D", [&] {
    return -(th.c22 * std::pow(a2, 2.0 + p2) * g0 * fk / (2.0 + p2)) *
           (1.0 - ipow(m2 / (2.0 + z2), k));
  });
  const double gE = guarded(caller, "E", [&] {
    return -th.c11 * th.d21 * std::pow(a2, 2.0 + p1) * g0 / (2.0 + p1 + p2);
  });
  const double gF = guarded(caller, "F", [&] {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      s += ipow(m2, i) * ipow(z2, -i - 1) * factorial(i) * ipow(p1 + z2 + 2.0, -i - 1) *
           (ipow(p1 + z2 + 2.0, i + 1) - ipow(z2, i + 1)) / (factorial(i) * (p1 + 2.0));
    }
    return th.c11 * th.d22 * std::pow(a2, 2.0 + p1) * g0 * fk * s;
  });
  const double gG = guarded(caller, "G", [&] {
    const double b = 2.0 + z1 + p2;
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      s += ipow(m1 / b, j) * sf::upper_inc_gamma_int(1 + j, b * lc) / factorial(j);
    }
    return (th.c12 * th.d21 * std::pow(a1, 2.0 + p1) * std::pow(a1 / a2, p2) * g0 * fk / b) * s;
  });

  const double pbase = 2.0 + z1 + z2;
  double sh = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      for (int t = 0; t <= i; ++t) {
        try {
          const double coef =
              ipow(m2, i) * ipow(m1, j) * ipow(z2, t - i - 1) / (factorial(j) * factorial(t));
          double term = factorial(j + t) * ipow(pbase, -1 - j - t) *
                        sf::kummer_1f1(-j, -j - t, pbase * lc);
          if (!corrected) {
            // G3: artifact series from an invalid Gamma(-n)/Gamma(-m) step
            const double ratio = ipow(-1.0, 1 + t) * factorial(j) / factorial(1 + j + t);
            term += ratio * factorial(t) * std::pow(lc, 1.0 + j + t) *
                    sf::kummer_1f1(1 + t, 2 + j + t, pbase * lc);
          }
          sh += coef * term;
        } catch (const DomainError& e) {
          throw DomainError(group_ctx(caller, "H", i, j, t) + e.what());
        } catch (const ConvergenceError& e) {
          throw ConvergenceError(group_ctx(caller, "H", i, j, t) + e.what());
        }
      }
    }
  }
  const double gH =
      -(th.c12 * th.d22 * std::pow(a2, 2.0 + p1) * g0 * std::pow(a1 / a2, -m1) * fk * fk) * sh;

  const double gI = guarded(caller, "I", [&] {
    return -th.c21 * th.d11 * std::pow(a2, 2.0 + p2) * std::pow(a1 / a2, -p1) * g0 /
           (2.0 + p1 + p2);
  });
  const double gJ = guarded(caller, "J", [&] {
    double pref = th.c21 * th.d12 * std::pow(a2, 2.0 + p2) * g0 * fk;
    if (!corrected) pref /= (2.0 + z1 + p2);  // G1: spurious extra denominator
    const double b = 2.0 + p2 + z1;
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      s += ipow(m1, i) * ipow(z1, -i - 1) / factorial(i) *
           (sf::upper_inc_gamma_int(1 + i, z1 * lc) -
            std::pow(a1 / a2, 2.0 + p2) * ipow(z1 / b, i + 1) *
                sf::upper_inc_gamma_int(1 + i, b * lc)) /
           (2.0 + p2);
    }
    return pref * s;
  });
  const double gK = guarded(caller, "K", [&] {
    return (th.c22 * th.d11 * std::pow(a2, 2.0 + p2) * std::pow(a1 / a2, -p1) * g0 * fk /
            (2.0 + p1 + p2)) *
           (1.0 - ipow(m2 / (2.0 + z2 + p1), k));
  });

  double sl = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      for (int t = 0; t <= i; ++t) {
        try {
          const double coef =
              ipow(m1, i) * ipow(m2, j) * ipow(z1, t - i - 1) / (factorial(j) * factorial(t));
          double term = factorial(j + t) * ipow(pbase, -1 - j - t) *
                        sf::kummer_1f1(-t, -j - t, pbase * lc);
          if (!corrected) {
            // G3 again, with the hop roles swapped
            const double ratio = ipow(-1.0, 1 + j) * factorial(t) / factorial(1 + j + t);
            term += factorial(j) * ratio * std::pow(lc, 1.0 + j + t) *
                    sf::kummer_1f1(1 + j, 2 + j + t, pbase * lc);
          }
          sl += coef * term;
        } catch (const DomainError& e) {
          throw DomainError(group_ctx(caller, "L", i, j, t) + e.what());
        } catch (const ConvergenceError& e) {
          throw ConvergenceError(group_ctx(caller, "L", i, j, t) + e.what());
        }
      }
    }
  }
  // G2: the support-edge power belongs to hop 2 (exponent 2 + phi2^2)
  const double aL_exp = corrected ? (2.0 + p2) : (2.0 + p1);
  const double gL =
      -(th.c22 * th.d12 * std::pow(a2, aL_exp) * g0 / std::pow(a1 / a2, z1) * fk * fk) * sl;

  return 2.0 * (gA + gB + gC + gD + gE + gF + gG + gH + gI + gJ + gK + gL);
}

// Twelve-group general rate bound.  `corrected` toggles G4 (groups A/B
// denominators), G3 (groups H and L artifact series) and R1 (prefactor).
double rate_general_impl(const RelayPair& pair, bool corrected) {
  const char* caller = "ergodic_rate_general";
  const TwoHop th = two_hop(pair, caller);
  const double g0 = pair.gamma0;
  if (!(g0 > 0.0)) throw DomainError("ergodic_rate_general: gamma0 must be > 0");
  const double a1 = th.a1, p1 = th.p1, z1 = th.z1, m1 = th.m1;
  const double a2 = th.a2, p2 = th.p2, z2 = th.z2, m2 = th.m2;
  const int k = th.k;
  const double fk = th.fk, lc = th.lc;
  const double k1 = std::log(a1 * a1 * g0);
  const double k2c = std::log(a2 * a2 * g0);

  // G4: the printed groups A and B divide by phi^2 where phi^4 is required.
  const double denA = corrected ? p1 * p1 : p1;
  const double denB = corrected ? p2 * p2 : p2;
  const double rA = th.c11 * std::pow(a2, p1) * (-2.0 + p1 * k2c) / denA;
  const double rB = th.c21 * std::pow(a2, p2) * (-2.0 + p2 * k2c) / denB;
  const double rC = guarded(caller, "C", [&] {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      s += ipow(m1, i) *
           (z1 * sf::upper_inc_gamma_int(1 + i, z1 * lc) * k1 -
            2.0 * sf::upper_inc_gamma_int(2 + i, z1 * lc)) /
           (factorial(i) * ipow(z1, 2 + i));
    }
    return -th.c12 * std::pow(a1, p1) * fk * s;
  });
  const double rD = guarded(caller, "D", [&] {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      s += ipow(m2, i) * (-2.0 * (1.0 + i) + z2 * k2c) / ipow(z2, 2 + i);
    }
    return -th.c22 * std::pow(a2, p2) * fk * s;
  });
  const double pE = p1 + p2;
  const double rE = -th.c11 * th.d21 * std::pow(a2, p1) * (-2.0 + pE * k2c) / (pE * pE);
  const double pF = p1 + z2;
  const double rF = guarded(caller, "F", [&] {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j <= i; ++j) {
        s += ipow(m2, i) * ipow(z2, j - i - 1) * (-2.0 * (1.0 + j) + pF * k2c) / ipow(pF, 2 + j);
      }
    }
    return th.c11 * th.d22 * std::pow(a2, p1) * fk * s;
  });
  const double pG = p2 + z1;
  const double rG = guarded(caller, "G", [&] {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      s += ipow(m1, i) *
           (-2.0 * sf::upper_inc_gamma_int(2 + i, pG * lc) +
            pG * sf::upper_inc_gamma_int(1 + i, pG * lc) * k1) /
           (factorial(i) * ipow(pG, 2 + i));
    }
    return th.c12 * th.d21 * std::pow(a1, p1) * std::pow(a1 / a2, p2) * fk * s;
  });

  const double n1 = z1 + z2;
  double accH = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      for (int t = 0; t <= i; ++t) {
        try {
          const double coef =
              ipow(m1, j) * ipow(m2, i) * ipow(z2, t - i - 1) / (factorial(j) * factorial(t));
          double i_jt = factorial(j + t) * ipow(n1, -1 - j - t) *
                        sf::kummer_1f1(-j, -j - t, n1 * lc);
          double i_jt1 = factorial(1 + j + t) * ipow(n1, -2 - j - t) *
                         sf::kummer_1f1(-j, -1 - j - t, n1 * lc);
          if (!corrected) {  // G5: artifact series in the rate group H
            const double r1 = ipow(-1.0, 1 + t) * factorial(j) / factorial(1 + j + t);
            const double r2 = ipow(-1.0, 2 + t) * factorial(j) / factorial(2 + j + t);
            i_jt += factorial(t) * r1 * std::pow(lc, 1.0 + j + t) *
                    sf::kummer_1f1(1 + t, 2 + j + t, n1 * lc);
            i_jt1 += factorial(1 + t) * r2 * std::pow(lc, 2.0 + j + t) *
                     sf::kummer_1f1(2 + t, 3 + j + t, n1 * lc);
          }
          accH += coef * (i_jt * k2c - 2.0 * i_jt1);
        } catch (const DomainError& e) {
          throw DomainError(group_ctx(caller, "H", i, j, t) + e.what());
        } catch (const ConvergenceError& e) {
          throw ConvergenceError(group_ctx(caller, "H", i, j, t) + e.what());
        }
      }
    }
  }
  const double rH =
      -th.c12 * th.d22 * std::pow(a2, p1) * std::pow(a1 / a2, -m1) * fk * fk * accH;

  const double pI = p1 + p2;
  const double rI = -th.c21 * th.d11 * std::pow(a2, p2) * std::pow(a2 / a1, p1) *
                    (-2.0 + pI * k2c) / (pI * pI);
  const double pJ = p2 + z1;
  const double rJ = guarded(caller, "J", [&] {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j <= i; ++j) {
        s += ipow(m1, i) * ipow(z1, j - i - 1) *
             (-2.0 * sf::upper_inc_gamma_int(2 + j, pJ * lc) +
              pJ * sf::upper_inc_gamma_int(1 + j, pJ * lc) * k1) /
             (factorial(j) * ipow(pJ, 2 + j));
      }
    }
    return th.c21 * th.d12 * std::pow(a1, p2) * fk * s;
  });
  const double pK = p1 + z2;
  const double rK = guarded(caller, "K", [&] {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      s += ipow(m2, i) * (-2.0 * (1.0 + i) + pK * k2c) / ipow(pK, 2 + i);
    }
    return th.c22 * th.d11 * std::pow(a2, p2) * std::pow(a1 / a2, -p1) * fk * s;
  });

  double accL = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      for (int t = 0; t <= i; ++t) {
        try {
          const double coef =
              ipow(m1, i) * ipow(m2, j) * ipow(z1, t - i - 1) / (factorial(j) * factorial(t));
          double i_tj = factorial(j + t) * ipow(n1, -1 - j - t) *
                        sf::kummer_1f1(-t, -j - t, n1 * lc);
          double i_tj1 = factorial(1 + j + t) * ipow(n1, -2 - j - t) *
                         sf::kummer_1f1(-t, -1 - j - t, n1 * lc);
          if (!corrected) {  // G6: artifact series in the rate group L
            const double r1 = ipow(-1.0, 1 + j) * factorial(t) / factorial(1 + j + t);
            const double r2 = ipow(-1.0, 2 + j) * factorial(t) / factorial(2 + j + t);
            i_tj += factorial(j) * r1 * std::pow(lc, 1.0 + j + t) *
                    sf::kummer_1f1(1 + j, 2 + j + t, n1 * lc);
            i_tj1 += factorial(1 + j) * r2 * std::pow(lc, 2.0 + j + t) *
                     sf::kummer_1f1(2 + j, 3 + j + t, n1 * lc);
          }
          accL += coef * (i_tj * k2c - 2.0 * i_tj1);
        } catch (const DomainError& e) {
          throw DomainError(group_ctx(caller, "L", i, j, t) + e.what());
        } catch (const ConvergenceError& e) {
          throw ConvergenceError(group_ctx(caller, "L", i, j, t) + e.what());
        }
      }
    }
  }
  const double rL =
      -th.c22 * th.d12 * std::pow(a2, p2) * std::pow(a1 / a2, -z1) * fk * fk * accL;

  const double pref = corrected ? 2.0 / kLn2 : 2.8854;  // R1
  return kRateConst +
         pref * (rA + rB + rC + rD + rE + rF + rG + rH + rI + rJ + rK + rL);
}

}  // namespace

double avg_snr_general(const RelayPair& pair) { return snr_general_impl(pair, true); }
double ergodic_rate_general(const RelayPair& pair) { return rate_general_impl(pair, true); }

// ------------------------------------- deterministic-attenuation baselines

double DeterministicPathLoss::end_to_end_gain() const { return std::exp(-psi_per_km * d_km); }
double DeterministicPathLoss::per_hop_gain() const { return std::exp(-psi_per_km * d_km / 2.0); }

PowerLawChannel build_power_law_channel(const PointingParams& point,
                                        const TurbulenceParams& turb) {
  point.validate();
  turb.validate();
  const PointingGeometry geom = PointingGeometry::from(point);
  const double ab = turb.alpha_t * turb.beta_t;
  const double t = 2.0 * ab / geom.w_zeq2;
  const double sx = point.jitter_x();
  const double sy = point.jitter_y();
  if (1.0 - 2.0 * t * sx * sx <= 0.0 || 1.0 - 2.0 * t * sy * sy <= 0.0) {
    throw ConstructionError(
        "build_power_law_channel: displacement MGF outside its domain "
        "(need w_zeq^2/(4 sigma^2) > alpha_t*beta_t per axis)");
  }
  const double mg = beckmann_mgf(t, point);
  return {turb.eta_t * geom.A0 / std::pow(mg, 1.0 / ab), ab};
}

SnrRatePair deterministic_metrics(const PowerLawChannel& ch, const DeterministicPathLoss& pl,
                                  double gamma0, bool relayed) {
  if (!(gamma0 > 0.0)) throw DomainError("deterministic_metrics: gamma0 must be > 0");
  if (!(ch.a > 0.0) || !(ch.phi2 > 0.0)) {
    throw DomainError("deterministic_metrics: channel needs a > 0 and phi2 > 0");
  }
  const double p2 = ch.phi2;
  SnrRatePair out{};
  if (relayed) {
    const double al = ch.a * pl.per_hop_gain();
    out.avg_snr = al * al * p2 * p2 * gamma0 / (2.0 + 3.0 * p2 + p2 * p2);
    out.ergodic_rate = kRateConst + (p2 * std::log(al * al * gamma0) - 3.0) / (p2 * kLn2);
  } else {
    const double al = ch.a * pl.end_to_end_gain();
    out.avg_snr = p2 * al * al * gamma0 / (2.0 + p2);
    out.ergodic_rate =
        kRateConst + 2.0 * (-2.0 + p2 * std::log(al * al * gamma0)) / (std::log(4.0) * p2);
  }
  return out;
}

// ------------------------------------------------------------------- BER

namespace {

// Gauss-tail moment helpers over the upper tail, written with the
// log-weighted incomplete gammas (see specfun.hpp).
double g_lower(double s, double x) { return sf::lower_inc_gamma(s, x); }

double ghat3(double s, double x) {
  return sf::log_weighted_upper_gamma(s, x, 1) - std::log(x) * sf::upper_inc_gamma(s, x);
}

double ghat4(double s, double x) {
  const double lx = std::log(x);
  return (sf::log_weighted_upper_gamma(s, x, 2) -
          2.0 * lx * sf::log_weighted_upper_gamma(s, x, 1) +
          lx * lx * sf::upper_inc_gamma(s, x)) /
         2.0;
}

// Eight-group k=2 BER; `corrected` toggles B1 (group 3 exponent), B2 (group 8
// third-bracket argument), B3 (group 8 weight binding) and B4 (support-edge
// boundary term).
double ber_k2_impl(const RelayPair& pair, const OokParams& ook, bool corrected) {
  const char* caller = "avg_ber_k2";
  const TwoHop th = two_hop(pair, caller);
  if (th.k != 2) {
    std::ostringstream os;
    os << caller << ": closed form covers fog shape k = 2 only (got k = " << th.k << ")";
    throw DomainError(os.str());
  }
  const double g0 = pair.gamma0;
  if (!(g0 > 0.0)) throw DomainError("avg_ber_k2: gamma0 must be > 0");
  const double A = ook.A, B = ook.B;
  const double a1 = th.a1, p1 = th.p1, z1 = th.z1, m1 = th.m1;
  const double a2 = th.a2, p2 = th.p2, z2 = th.z2, m2 = th.m2;
  const double d11 = th.d11, d12 = th.d12, d21 = th.d21, d22 = th.d22;

  const double P1 = B * a1 * a1 * g0 / 2.0;
  const double P2 = B * a2 * a2 * g0 / 2.0;
  const double sq = 2.0 * std::sqrt(std::numbers::pi);
  const double X1 = a2 * a2 * P1 / (a1 * a1);  // equals P2

  double s = (1.0 + p1) / 2.0;
  const double g1 = guarded(caller, "1", [&] {
    return A * d11 * std::pow(P1, -p1 / 2.0) / sq * g_lower(s, P2);
  });
  s = (1.0 + z1) / 2.0;
  const double g2 = guarded(caller, "2", [&, s] {
    return -(A * d12 * std::pow(P1, -z1 / 2.0) / (sq * z1)) *
           (g_lower(s, P2) * (1.0 + m1 / z1) +
            m1 / 2.0 *
                (sf::upper_inc_gamma(s, X1) * std::log(a2 * a2 / (a1 * a1)) + ghat3(s, X1) +
                 sf::gamma_fn(s) * (std::log(P1) - sf::digamma(s))));
  });
  s = (1.0 + p2) / 2.0;
  // B1: the printed exponent borrows hop 1's phi^2
  const double e3 = corrected ? -p2 / 2.0 : -p1 / 2.0;
  const double g3 = guarded(caller, "3", [&, s] {
    return A * d21 * std::pow(P2, e3) / sq * g_lower(s, P2);
  });
  s = (1.0 + z2) / 2.0;
  const double g4 = guarded(caller, "4", [&, s] {
    return -(A * d22 * std::pow(P2, -z2 / 2.0) / (sq * z2)) *
           (g_lower(s, P2) * (1.0 + m2 / z2) +
            m2 / 2.0 * (ghat3(s, P2) + sf::gamma_fn(s) * (std::log(P2) - sf::digamma(s))));
  });
  s = (1.0 + p1 + p2) / 2.0;
  const double g5 = guarded(caller, "5", [&, s] {
    return -A * d11 * d21 * std::pow(P1, -p1 / 2.0) * std::pow(P2, -p2 / 2.0) / sq *
           g_lower(s, P2);
  });
  s = (1.0 + p1 + z2) / 2.0;
  const double g6 = guarded(caller, "6", [&, s] {
    return (A * d11 * d22 / (sq * z2)) *
           (std::pow(P1, -p1 / 2.0) * std::pow(P2, -z2 / 2.0) * g_lower(s, P2) *
                (1.0 + m2 / z2) +
            (m2 * std::pow(P2, (-p1 - z2) / 2.0) / (2.0 * std::pow(a1 / a2, p1))) *
                (ghat3(s, P2) + sf::gamma_fn(s) * (std::log(P2) - sf::digamma(s))));
  });
  s = (1.0 + p2 + z1) / 2.0;
  const double g7 = guarded(caller, "7", [&, s] {
    return (A * d12 * d21 / (sq * z1)) *
           (std::pow(P1, -z1 / 2.0) * std::pow(P2, -p2 / 2.0) * g_lower(s, P2) *
                (1.0 + m1 / z1) +
            (m1 * std::pow(P1, (-p2 - z1) / 2.0) / (2.0 * std::pow(a2 / a1, p2))) *
                (sf::upper_inc_gamma(s, X1) * std::log(a2 * a2 / (a1 * a1)) + ghat3(s, X1) +
                 sf::gamma_fn(s) * (std::log(P1) - sf::digamma(s))));
  });
  s = (1.0 + z1 + z2) / 2.0;
  const double g8 = guarded(caller, "8", [&, s] {
    // B2: the printed third bracket evaluates at a2 P1/a1 with log(a2/a1)
    // instead of the squared support ratio.
    const double third_arg = corrected ? X1 : a2 * P1 / a1;
    const double third_log =
        corrected ? std::log(a2 * a2 / (a1 * a1)) : std::log(a2 / a1);
    // B3: the (1 + m1/z1) weight must scale the whole second bracket.
    const double core2 = ghat3(s, P2) + sf::gamma_fn(s) * (std::log(P2) - sf::digamma(s));
    const double piece2 =
        corrected ? core2 * (1.0 + m1 / z1)
                  : ghat3(s, P2) +
                        sf::gamma_fn(s) * (std::log(P2) - sf::digamma(s)) * (1.0 + m1 / z1);
    const double psi_s = sf::digamma(s);
    return -(A * d12 * d22 / (sq * z1 * z2)) *
           (std::pow(P1, -z1 / 2.0) * std::pow(P2, -z2 / 2.0) * g_lower(s, P2) *
                (1.0 + m1 / z1 + m2 / z2 + m1 * m2 / (z1 * z2)) +
            (m2 * std::pow(P2, (-z1 - z2) / 2.0) / (2.0 * std::pow(a1 / a2, z1))) * piece2 +
            (m1 * std::pow(P1, (-z1 - z2) / 2.0) / (2.0 * std::pow(a2 / a1, z2))) *
                (sf::upper_inc_gamma(s, third_arg) * third_log + ghat3(s, X1) +
                 sf::gamma_fn(s) * (std::log(P1) - psi_s)) *
                (1.0 + m2 / z2) +
            (m1 * m2 * std::pow(P2, (-z1 - z2) / 2.0) / (4.0 * std::pow(a1 / a2, z1))) *
                (2.0 * std::log(a1 / a2) * ghat3(s, P2) - 2.0 * ghat4(s, P2) +
                 sf::gamma_fn(s) *
                     (2.0 * std::log(a1 / a2) * std::log(P2) +
                      std::log(P2) * std::log(P2) -
                      2.0 * std::log(a1 * P2 / a2) * psi_s + psi_s * psi_s +
                      sf::trigamma(s))));
  });

  double total = g1 + g2 + g3 + g4 + g5 + g6 + g7 + g8;
  if (corrected) {
    total += A * std::erfc(std::sqrt(P2)) / 2.0;  // B4: support-edge boundary term
  }
  return total;
}

double ber_deterministic_impl(const PowerLawChannel& ch, const DeterministicPathLoss& pl,
                              double g0, const OokParams& ook, bool corrected) {
  if (!(g0 > 0.0)) throw DomainError("avg_ber_deterministic: gamma0 must be > 0");
  const double p2 = ch.phi2;
  const double al = ch.a * pl.per_hop_gain();
  const double P = ook.B * al * al * g0 / 2.0;
  const double core = std::pow(P, -p2 / 2.0) * g_lower((1.0 + p2) / 2.0, P) -
                      std::pow(P, -p2) * g_lower(0.5 + p2, P) / 2.0;
  if (corrected) {
    return ook.A * (core / std::sqrt(std::numbers::pi) + std::erfc(std::sqrt(P)) / 2.0);
  }
  // B5: printed with sqrt(pi) in the numerator (a factor pi too large) and
  // without the support-edge boundary term.
  return ook.A * std::sqrt(std::numbers::pi) * core;
}

}  // namespace

double avg_ber_k2(const RelayPair& pair, const OokParams& ook) {
  return ber_k2_impl(pair, ook, true);
}

double avg_ber_deterministic(const PowerLawChannel& ch, const DeterministicPathLoss& pl,
                             double gamma0, const OokParams& ook) {
  return ber_deterministic_impl(ch, pl, gamma0, ook, true);
}

// ------------------------------------------------------- single-hop direct

double avg_snr_direct(const LinkChannel& link, double gamma0) {
  if (!(gamma0 > 0.0)) throw DomainError("avg_snr_direct: gamma0 must be > 0");
  return gamma0 * link.a * link.a * link.phi2 / (link.phi2 + 2.0) *
         std::exp(link.k * std::log(link.z / (link.z + 2.0)));
}

double ergodic_rate_direct(const LinkChannel& link, double gamma0) {
  if (!(gamma0 > 0.0)) throw DomainError("ergodic_rate_direct: gamma0 must be > 0");
  return kRateConst + (std::log(gamma0) + 2.0 * std::log(link.a) - 2.0 / link.phi2 -
                       2.0 * link.k / link.z) /
                          kLn2;
}

double avg_ber_direct(const LinkChannel& link, double gamma0, const OokParams& ook) {
  const int k = link.require_integer_k("avg_ber_direct");
  if (k > 3) {
    throw DomainError(
        "avg_ber_direct: closed form covers integer k <= 3 (log-weighted incomplete gammas "
        "are tabulated up to ln^2)");
  }
  if (!(gamma0 > 0.0)) throw DomainError("avg_ber_direct: gamma0 must be > 0");
  const double q = ook.B * gamma0 / 2.0;
  const double pa = q * link.a * link.a;
  const double ln_pa = std::log(pa);

  // CDF as a sum of power-times-log-power pieces c * h^eps ln^w(a/h): the
  // leading pointing power plus the telescoped fog polynomial.
  struct Piece {
    double c;
    double eps;
    int w;
  };
  std::vector<Piece> pieces;
  pieces.push_back({link.d1 * std::pow(link.a, -link.phi2), link.phi2, 0});
  for (int sdx = 0; sdx < k; ++sdx) {
    double ws = 0.0;
    for (int r = sdx; r < k; ++r) ws += ipow(link.m, r) * ipow(link.z, sdx - r - 1);
    ws /= factorial(sdx);
    pieces.push_back(
        {-link.d2 * factorial(k - 1) * ws * std::pow(link.a, -link.z), link.z, sdx});
  }

  // int_0^a e^{-q h^2} c h^eps ln^w(a/h) dh
  //   = c 2^{-1-w} q^{-s} sum_u C(w,u) ln^{w-u}(q a^2) (-1)^u G_u(s, q a^2),
  // s = (eps+1)/2, G_u the log-weighted lower incomplete gamma.
  double body = 0.0;
  for (const Piece& pc : pieces) {
    const double s = (pc.eps + 1.0) / 2.0;
    double inner = 0.0;
    for (int u = 0; u <= pc.w; ++u) {
      inner += sf::binomial(pc.w, u) * std::pow(ln_pa, pc.w - u) * ipow(-1.0, u) *
               sf::log_weighted_lower_gamma(s, pa, u);
    }
    body += pc.c * std::pow(2.0, -1.0 - pc.w) * std::pow(q, -s) * inner;
  }
  return ook.A * std::sqrt(q / std::numbers::pi) * body +
         ook.A * std::erfc(std::sqrt(pa)) / 2.0;
}

// ------------------------------------------------------- literal variants

namespace literal {

double avg_snr_symmetric(const LinkChannel& link, double gamma0) {
  return snr_symmetric_impl(link, gamma0, false);
}

double ergodic_rate_symmetric(const LinkChannel& link, double gamma0) {
  return rate_symmetric_impl(link, gamma0, false);
}

double ergodic_rate_k2(const LinkChannel& link, double gamma0) {
  return rate_k2_impl(link, gamma0, false);
}

double avg_snr_general(const RelayPair& pair) { return snr_general_impl(pair, false); }

double ergodic_rate_general(const RelayPair& pair) { return rate_general_impl(pair, false); }

double avg_ber_k2(const RelayPair& pair, const OokParams& ook) {
  return ber_k2_impl(pair, ook, false);
}

double avg_ber_deterministic(const PowerLawChannel& ch, const DeterministicPathLoss& pl,
                             double gamma0, const OokParams& ook) {
  return ber_deterministic_impl(ch, pl, gamma0, ook, false);
}

}  // namespace literal

}  // namespace owc::metrics
