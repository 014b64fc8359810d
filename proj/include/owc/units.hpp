#pragma once
// Centralized unit conversions: dBm <-> watts, dB <-> linear ratios, and the
// electrical-SNR scale factor gamma0 of an IM/DD receiver.
//
// gamma0 is defined so that the instantaneous electrical SNR of a link with
// combined optical channel gain h is gamma = gamma0 * h^2 with
//     gamma0 = 2 * (P_t * R)^2 / sigma_w^2,
// where P_t is the transmit optical power [W], R the photodetector
// responsivity [A/W] and sigma_w^2 the receiver thermal-noise variance [A^2].
// The noise variance is specified per GHz of receiver bandwidth.

#include <cmath>

namespace owc::units {

inline double dbm_to_watts(double p_dbm) { return std::pow(10.0, p_dbm / 10.0) * 1e-3; }
inline double watts_to_dbm(double p_w) { return 10.0 * std::log10(p_w * 1e3); }
inline double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Receiver thermal-noise model; defaults match a 1 GHz receiver with
// 1e-14 A^2 noise variance per GHz.
struct NoiseModel {
  double sigma_w2_per_ghz = 1e-14;  // [A^2 / GHz]
  double bandwidth_ghz = 1.0;       // [GHz]
  double sigma_w2() const { return sigma_w2_per_ghz * bandwidth_ghz; }
};

// Electrical-SNR scale gamma0 = 2 (P_t R)^2 / sigma_w^2 for P_t given in dBm.
// Default responsivity 0.5 A/W and default noise give gamma0 = 5e7 at 0 dBm.
inline double gamma0_from_transmit_power(double p_t_dbm, double responsivity = 0.5,
                                         const NoiseModel& noise = {}) {
  const double p_w = dbm_to_watts(p_t_dbm);
  const double s = p_w * responsivity;
  return 2.0 * s * s / noise.sigma_w2();
}

}  // namespace owc::units
