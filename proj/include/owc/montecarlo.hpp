#pragma once
// Seeded Monte Carlo samplers for every channel factor and end-to-end
// estimators that serve as the empirical oracle for the analytic results.
//
// Reproducibility contract: estimates are a pure function of (scenario,
// SimConfig).  Samples are drawn in fixed-size blocks; block b of hop i uses
// an independent substream derived from (seed, 2b + i - 1), partial sums are
// reduced pairwise in fixed order, so results are bit-identical across runs
// and across worker-thread counts.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "owc/channel_models.hpp"
#include "owc/quadrature_oracle.hpp"

namespace owc::mc {

// xoshiro256++ with splitmix64 stream seeding; deterministic, per-stream.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  double uniform01();          // in (0, 1): (x >> 11) * 2^-53, zero mapped away
  double normal();             // standard normal (Box-Muller, cached pair)

 private:
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Gamma(shape k, rate 1) variate; squeeze-rejection for k >= 1 with the
// U^{1/k} boost for k < 1.  Valid for all real k > 0.
double sample_gamma(double k, Rng& rng);

// Fog gain h_f = e^{-T}, T ~ Gamma(k, rate z).
double sample_fog(const FogParams& p, Rng& rng);

// Pointing gain.  boresight=false: inverse-CDF draw A0 U^{1/rho^2} of the
// zero-boresight power law.  boresight=true: draw per-axis Gaussian
// displacements, r^2 = x^2 + y^2, h_p = A0 exp(-2 r^2 / w_zeq^2).
double sample_pointing(const PointingParams& p, Rng& rng, bool boresight = false);

// Exponentiated-Weibull turbulence gain, inverse CDF:
// h_t = eta (-ln(1 - U^{1/alpha}))^{1/beta}.
double sample_turbulence(const TurbulenceParams& p, Rng& rng);

// ------------------------------------------------------------- estimation

enum class Protocol { Direct, DF, AF };

// One hop as sampled: optional random fog, deterministic gain factor,
// pointing (optionally with boresight offsets), optional turbulence.
struct McHop {
  std::optional<FogParams> fog;  // absent => deterministic fog (PT-style)
  double det_gain = 1.0;         // fixed attenuation factor, e.g. e^{-psi d}
  PointingParams pointing;
  bool boresight = false;
  std::optional<TurbulenceParams> turb;  // sampled exactly when present
};

struct McScenario {
  McHop hop1;
  McHop hop2;          // ignored when protocol == Direct
  Protocol protocol = Protocol::DF;
  double gamma0 = 1.0;
  double gamma_th = 1.0;          // outage threshold (linear)
  double ook_a = 1.0;
  double ook_b = 0.5;
};

struct SimConfig {
  long long n_samples = 1'000'000;
  std::uint64_t seed = 1;
  int n_threads = 0;  // 0 => hardware concurrency (result independent of it)
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  long long n = 0;
};

double sample_hop_gain(const McHop& hop, Rng& rng);

// Sample-mean estimate of the chosen metric with its standard error.
//   Outage: mean of 1[gamma < gamma_th]      AvgSnr: mean of gamma
//   Rate:   mean of log2(1 + (e/2pi) gamma)  Ber:    mean of A Q(sqrt(B gamma))
// DF uses min(gamma1, gamma2); AF uses the exact gamma1 gamma2/(gamma1+gamma2+1).
Estimate estimate(quad::Metric metric, const McScenario& scenario, const SimConfig& sim);

// ------------------------------------------------------------- diagnostics

// One-sample Kolmogorov-Smirnov distance between samples and a model CDF.
// Sorts `samples` in place.
double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov distance; sorts both inputs in place.
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);

// Pearson correlation of two equal-length sample vectors (stream-independence
// checks).
double correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace owc::mc
