#include "owc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "owc/errors.hpp"
#include "owc/specfun.hpp"

namespace owc::mc {

namespace {

std::uint64_t splitmix64_next(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over a seed/stream mix fills the xoshiro state; distinct
  // streams give statistically independent sequences.
  std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  for (auto& s : s_) s = splitmix64_next(x);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // xoshiro forbids all-zero
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl64(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl64(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  for (;;) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(th);
  has_cached_ = true;
  return r * std::cos(th);
}

double sample_gamma(double k, Rng& rng) {
  if (!(k > 0.0)) throw DomainError("sample_gamma: shape must be > 0");
  if (k < 1.0) {
    // boost: X_k = X_{k+1} U^{1/k}
    const double u = rng.uniform01();
    return sample_gamma(k + 1.0, rng) * std::pow(u, 1.0 / k);
  }
  const double d = k - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_fog(const FogParams& p, Rng& rng) {
  return std::exp(-sample_gamma(p.k, rng) / p.z());
}

double sample_pointing(const PointingParams& p, Rng& rng, bool boresight) {
  const PointingGeometry g = PointingGeometry::from(p);
  if (!boresight) {
    return g.A0 * std::pow(rng.uniform01(), 1.0 / g.rho2);
  }
  const double x = p.mu_x + p.jitter_x() * rng.normal();
  const double y = p.mu_y + p.jitter_y() * rng.normal();
  return g.A0 * std::exp(-2.0 * (x * x + y * y) / g.w_zeq2);
}

double sample_turbulence(const TurbulenceParams& p, Rng& rng) {
  const double u = rng.uniform01();
  return p.eta_t * std::pow(-std::log1p(-std::pow(u, 1.0 / p.alpha_t)), 1.0 / p.beta_t);
}

double sample_hop_gain(const McHop& hop, Rng& rng) {
  double h = hop.det_gain;
  if (hop.fog) h *= sample_fog(*hop.fog, rng);
  h *= sample_pointing(hop.pointing, rng, hop.boresight);
  if (hop.turb) h *= sample_turbulence(*hop.turb, rng);
  return h;
}

namespace {

// Geometry-cached copy of sample_hop_gain for the estimation loop; consumes
// the exact same RNG draws in the exact same order.
struct HopSampler {
  const McHop& hop;
  PointingGeometry geom;
  double inv_rho2 = 0.0;
  double sx = 0.0, sy = 0.0;

  explicit HopSampler(const McHop& h) : hop(h), geom(PointingGeometry::from(h.pointing)) {
    h.pointing.validate();
    if (h.fog) h.fog->validate();
    if (h.turb) h.turb->validate();
    inv_rho2 = 1.0 / geom.rho2;
    sx = h.pointing.jitter_x();
    sy = h.pointing.jitter_y();
  }

  double draw(Rng& rng) const {
    double h = hop.det_gain;
    if (hop.fog) h *= std::exp(-sample_gamma(hop.fog->k, rng) / hop.fog->z());
    if (!hop.boresight) {
      h *= geom.A0 * std::pow(rng.uniform01(), inv_rho2);
    } else {
      const double x = hop.pointing.mu_x + sx * rng.normal();
      const double y = hop.pointing.mu_y + sy * rng.normal();
      h *= geom.A0 * std::exp(-2.0 * (x * x + y * y) / geom.w_zeq2);
    }
    if (hop.turb) h *= sample_turbulence(*hop.turb, rng);
    return h;
  }
};

struct BlockSums {
  double s = 0.0;
  double s2 = 0.0;
  long long n = 0;
};

BlockSums merge(const BlockSums& a, const BlockSums& b) {
  return {a.s + b.s, a.s2 + b.s2, a.n + b.n};
}

constexpr long long kBlock = 1LL << 16;

}  // namespace

Estimate estimate(quad::Metric metric, const McScenario& sc, const SimConfig& sim) {
  if (sim.n_samples <= 0) throw DomainError("estimate: n_samples must be > 0");
  if (!(sc.gamma0 > 0.0)) throw DomainError("estimate: gamma0 must be > 0");
  const bool two_hops = sc.protocol != Protocol::Direct;

  const long long n_blocks = (sim.n_samples + kBlock - 1) / kBlock;
  std::vector<BlockSums> sums(static_cast<std::size_t>(n_blocks));
  int n_threads = sim.n_threads > 0
                      ? sim.n_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads <= 0) n_threads = 1;
  n_threads = static_cast<int>(std::min<long long>(n_threads, n_blocks));

  const double c_rate = std::numbers::e / (2.0 * std::numbers::pi);
  std::atomic<long long> next_block{0};
  std::atomic<bool> failed{false};
  std::string fail_msg;
  std::mutex fail_mutex;

  auto worker = [&] {
    try {
      const HopSampler h1(sc.hop1);
      const HopSampler h2(two_hops ? sc.hop2 : sc.hop1);
      for (;;) {
        const long long b = next_block.fetch_add(1);
        if (b >= n_blocks || failed.load()) break;
        Rng r1(sim.seed, 2 * static_cast<std::uint64_t>(b));
        Rng r2(sim.seed, 2 * static_cast<std::uint64_t>(b) + 1);
        const long long n_here = std::min(kBlock, sim.n_samples - b * kBlock);
        double s = 0.0, s2 = 0.0;
        for (long long j = 0; j < n_here; ++j) {
          const double g1v = h1.draw(r1);
          double g;
          if (!two_hops) {
            g = sc.gamma0 * g1v * g1v;
          } else {
            const double g2v = h2.draw(r2);
            const double ga = sc.gamma0 * g1v * g1v;
            const double gb = sc.gamma0 * g2v * g2v;
            g = sc.protocol == Protocol::DF ? std::min(ga, gb)
                                            : ga * gb / (ga + gb + 1.0);
          }
          double x;
          switch (metric) {
            case quad::Metric::Outage: x = g < sc.gamma_th ? 1.0 : 0.0; break;
            case quad::Metric::AvgSnr: x = g; break;
            case quad::Metric::Rate: x = std::log2(1.0 + c_rate * g); break;
            case quad::Metric::Ber: default:
              x = sc.ook_a * sf::q_function(std::sqrt(sc.ook_b * g));
              break;
          }
          s += x;
          s2 += x * x;
        }
        sums[static_cast<std::size_t>(b)] = {s, s2, n_here};
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(fail_mutex);
      failed.store(true);
      if (fail_msg.empty()) fail_msg = e.what();
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw DomainError("estimate: " + fail_msg);

  // Fixed-order pairwise reduction => identical result for any thread count.
  while (sums.size() > 1) {
    std::vector<BlockSums> up((sums.size() + 1) / 2);
    for (std::size_t i = 0; i < up.size(); ++i) {
      up[i] = 2 * i + 1 < sums.size() ? merge(sums[2 * i], sums[2 * i + 1]) : sums[2 * i];
    }
    sums.swap(up);
  }
  const BlockSums tot = sums.front();
  Estimate out;
  out.n = tot.n;
  out.value = tot.s / static_cast<double>(tot.n);
  if (tot.n > 1) {
    const double var =
        std::max(0.0, (tot.s2 - tot.s * tot.s / static_cast<double>(tot.n)) /
                          static_cast<double>(tot.n - 1));
    out.std_error = std::sqrt(var / static_cast<double>(tot.n));
  }
  return out;
}

double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_statistic: empty sample vector");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample vector");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw DomainError("correlation: vectors must be non-empty and equal-length");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw DomainError("correlation: zero-variance input");
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace owc::mc
