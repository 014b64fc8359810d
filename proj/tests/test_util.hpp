#pragma once
// Shared scenario builders for the unit tests: the lettered hop parameter sets
// from frozen_vectors.hpp and a relative-error helper.

#include <cmath>
#include <optional>

#include "owc/channel_models.hpp"
#include "owc/relay_snr.hpp"
#include "owc/units.hpp"

namespace tu {

inline double rel_err(double got, double want) {
  if (got == want) return 0.0;
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

inline owc::PointingParams point(double wz_ratio, double sig_ratio) {
  owc::PointingParams p{};
  p.a_r = 0.05;
  p.w_z = wz_ratio * 0.05;
  p.sigma_s = sig_ratio * 0.05;
  return p;
}

inline owc::TurbulenceParams turb_ref() { return {3.02, 2.80, 0.84}; }

inline owc::LinkChannel hop_A() {
  return owc::build_link(owc::ChannelMode::FP, {2.0, 13.12, 0.25}, point(25, 3));
}
inline owc::LinkChannel hop_B() {
  return owc::build_link(owc::ChannelMode::FP, {2.0, 13.12, 0.10}, point(15, 5));
}
inline owc::LinkChannel hop_C(double d_km = 0.40) {
  return owc::build_link(owc::ChannelMode::FPT, {2.0, 13.12, d_km}, point(25, 3), turb_ref());
}
inline owc::LinkChannel hop_D() {
  owc::PointingParams p = point(25, 3);
  p.mu_x = 0.05;
  p.mu_y = 0.02;
  p.sigma_x = 0.12;
  p.sigma_y = 0.18;
  return owc::build_link(owc::ChannelMode::FPT, {2.0, 13.12, 0.40}, p, turb_ref());
}
inline owc::LinkChannel hop_E() {
  return owc::build_link(owc::ChannelMode::FP, {6.0, 23.06, 0.50}, point(20, 3));
}
inline owc::LinkChannel hop_F() {
  return owc::build_link(owc::ChannelMode::FP, {3.0, 12.06, 0.30}, point(20, 5));
}
inline owc::LinkChannel hop_G() {
  return owc::build_link(owc::ChannelMode::FP, {2.0, 13.12, 0.25}, point(20, 5));
}

// gamma0 = 5e7 * 10^{P/5} for P in dBm (R = 0.5, sigma_w^2 = 1e-14).
inline double g0(double p_dbm) { return owc::units::gamma0_from_transmit_power(p_dbm); }

}  // namespace tu
