#include <cmath>

#include "doctest.h"
#include "frozen_vectors.hpp"
#include "owc/channel_models.hpp"
#include "owc/errors.hpp"
#include "owc/quadrature_oracle.hpp"
#include "test_util.hpp"

using namespace owc;
using tu::rel_err;

namespace {
constexpr double kTol = 5e-11;
}

TEST_CASE("link construction reproduces frozen parameters") {
  struct Row {
    LinkChannel link;
    double z, a, phi2, m, d1, d2, c1;
  };
  const Row rows[] = {
      {tu::hop_A(), frozen::A_z, frozen::A_a, frozen::A_phi2, frozen::A_m, frozen::A_D1,
       frozen::A_D2, frozen::A_C1},
      {tu::hop_B(), frozen::B_z, frozen::B_a, frozen::B_phi2, frozen::B_m, frozen::B_D1,
       frozen::B_D2, frozen::B_C1},
      {tu::hop_C(), frozen::C_z, frozen::C_a, frozen::C_phi2, frozen::C_m, frozen::C_D1,
       frozen::C_D2, frozen::C_C1},
      {tu::hop_D(), frozen::D_z, frozen::D_a, frozen::D_phi2, frozen::D_m, frozen::D_D1,
       frozen::D_D2, frozen::D_C1},
      {tu::hop_E(), frozen::E_z, frozen::E_a, frozen::E_phi2, frozen::E_m, frozen::E_D1,
       frozen::E_D2, frozen::E_C1},
      {tu::hop_F(), frozen::F_z, frozen::F_a, frozen::F_phi2, frozen::F_m, frozen::F_D1,
       frozen::F_D2, frozen::F_C1},
      {tu::hop_G(), frozen::G_z, frozen::G_a, frozen::G_phi2, frozen::G_m, frozen::G_D1,
       frozen::G_D2, frozen::G_C1},
  };
  for (const Row& r : rows) {
    CHECK(rel_err(r.link.z, r.z) < kTol);
    CHECK(rel_err(r.link.a, r.a) < kTol);
    CHECK(rel_err(r.link.phi2, r.phi2) < kTol);
    CHECK(rel_err(r.link.m, r.m) < kTol);
    CHECK(rel_err(r.link.d1, r.d1) < kTol);
    CHECK(rel_err(r.link.d2, r.d2) < kTol);
    CHECK(rel_err(r.link.c1, r.c1) < 1e-10);  // a^{-phi^2} spans ~1e42
    CHECK(r.link.closed_form_ready);
  }
  // pointing geometry details for the light d=0.25 wz25 s3 hop
  const LinkChannel A = tu::hop_A();
  CHECK(rel_err(A.geom.A0, frozen::A_A0) < kTol);
  CHECK(rel_err(A.geom.w_zeq2, frozen::A_wzeq2) < kTol);
  CHECK(rel_err(A.geom.rho2, frozen::A_rho2) < kTol);
}

TEST_CASE("Beckmann displacement MGF") {
  const LinkChannel C = tu::hop_C();
  const LinkChannel D = tu::hop_D();
  CHECK(rel_err(beckmann_mgf(2.0 * C.phi2 / C.geom.w_zeq2, C.pointing), frozen::C_Mg) < kTol);
  CHECK(rel_err(beckmann_mgf(2.0 * D.phi2 / D.geom.w_zeq2, D.pointing), frozen::D_Mg) < kTol);
  // zero offsets and equal axes: M(t) = 1/(1 - 2 t sigma^2)
  PointingParams p = tu::point(25, 3);
  const double t = 3.0;
  CHECK(rel_err(beckmann_mgf(t, p), 1.0 / (1.0 - 2.0 * t * p.sigma_s * p.sigma_s)) < 1e-12);
  // outside the MGF domain
  CHECK_THROWS_AS(beckmann_mgf(1.0 / (2.0 * p.sigma_s * p.sigma_s), p), DomainError);
}

TEST_CASE("construction guards") {
  // FPT without turbulence
  CHECK_THROWS_AS(build_link(ChannelMode::FPT, {2.0, 13.12, 0.25}, tu::point(25, 3)),
                  DomainError);
  // FP with turbulence
  CHECK_THROWS_AS(
      build_link(ChannelMode::FP, {2.0, 13.12, 0.25}, tu::point(25, 3), tu::turb_ref()),
      DomainError);
  // invalid fog fields are named
  CHECK_THROWS_WITH_AS(build_link(ChannelMode::FP, {0.0, 13.12, 0.25}, tu::point(25, 3)),
                       doctest::Contains("k"), DomainError);
  CHECK_THROWS_AS(build_link(ChannelMode::FP, {2.0, -1.0, 0.25}, tu::point(25, 3)),
                  DomainError);
  CHECK_THROWS_AS(build_link(ChannelMode::FP, {2.0, 13.12, 0.0}, tu::point(25, 3)),
                  DomainError);
  // degenerate z == phi^2 is rejected (kernel constants divide by m^k):
  // choose sigma_s so that rho^2 = z exactly
  PointingParams p = tu::point(25, 3);
  const PointingGeometry g = PointingGeometry::from(p);
  const FogParams fog{2.0, 13.12, 0.25};
  p.sigma_s = std::sqrt(g.w_zeq2 / (4.0 * fog.z()));
  CHECK_THROWS_AS(build_link(ChannelMode::FP, fog, p), DomainError);
  // FPT turbulence exponent must stay inside the per-axis MGF domain:
  // alpha beta >= rho^2 makes the MGF argument reach the pole
  TurbulenceParams strong{6.0, 3.0, 0.84};  // alpha*beta = 18 > rho^2 = 17.39
  CHECK_THROWS_AS(build_link(ChannelMode::FPT, fog, tu::point(25, 3), strong),
                  ConstructionError);
}

TEST_CASE("factor laws: fog") {
  const FogParams fog{2.0, 13.12, 0.25};
  const double z = fog.z();
  CHECK(rel_err(z, frozen::A_z) < kTol);
  // density integrates to 1 and matches the CDF by differentiation
  quad::QuadSpec spec;
  spec.endpoint_handling = quad::Endpoint::OpenLeft;
  const double total =
      quad::integrate([&](double h) { return fog_pdf(h, fog); }, 0.0, 1.0, spec).value;
  CHECK(std::fabs(total - 1.0) < 1e-9);
  for (double h : {0.05, 0.4, 0.9}) {
    const double eps = 1e-6;
    const double fd = (fog_cdf(h + eps, fog) - fog_cdf(h - eps, fog)) / (2.0 * eps);
    CHECK(rel_err(fd, fog_pdf(h, fog)) < 1e-6);
  }
  CHECK(fog_cdf(0.0, fog) == 0.0);
  CHECK(fog_cdf(1.0, fog) == 1.0);
}

TEST_CASE("factor laws: pointing and turbulence") {
  const PointingParams p = tu::point(25, 3);
  const PointingGeometry g = PointingGeometry::from(p);
  // power-law CDF and pdf agree
  for (double frac : {0.1, 0.5, 0.9}) {
    const double h = frac * g.A0;
    CHECK(rel_err(pointing_cdf(h, p), std::pow(frac, g.rho2)) < 1e-12);
    const double eps = g.A0 * 1e-7;
    const double fd = (pointing_cdf(h + eps, p) - pointing_cdf(h - eps, p)) / (2.0 * eps);
    CHECK(rel_err(fd, pointing_pdf(h, p)) < 1e-5);
  }
  CHECK(pointing_cdf(g.A0, p) == 1.0);

  const TurbulenceParams t = tu::turb_ref();
  quad::QuadSpec spec;
  spec.endpoint_handling = quad::Endpoint::OpenLeft;
  const double total =
      quad::integrate_to_inf([&](double h) { return ew_turbulence_pdf(h, t); }, 0.0, spec)
          .value;
  CHECK(std::fabs(total - 1.0) < 1e-8);
  for (double h : {0.3, 0.84, 1.6}) {
    const double x = std::pow(h / t.eta_t, t.beta_t);
    CHECK(rel_err(ew_turbulence_cdf(h, t), std::pow(-std::expm1(-x), t.alpha_t)) < 1e-12);
  }
}

TEST_CASE("combined pdf and closed CDF against frozen references") {
  const LinkChannel A = tu::hop_A();
  const struct {
    double frac, f, F;
  } rowsA[] = {
      {0.05, frozen::A_f_0_05a, frozen::A_F_0_05a},
      {0.3, frozen::A_f_0_3a, frozen::A_F_0_3a},
      {0.6, frozen::A_f_0_6a, frozen::A_F_0_6a},
      {0.95, frozen::A_f_0_95a, frozen::A_F_0_95a},
  };
  for (const auto& r : rowsA) {
    CHECK(rel_err(hop_gain_pdf(r.frac * A.a, A), r.f) < kTol);
    CHECK(rel_err(hop_gain_cdf(r.frac * A.a, A), r.F) < 1e-10);
  }
  const LinkChannel C = tu::hop_C();
  CHECK(rel_err(hop_gain_cdf(0.05 * C.a, C), frozen::C_F_0_05a) < 1e-10);
  CHECK(rel_err(hop_gain_cdf(0.3 * C.a, C), frozen::C_F_0_3a) < 1e-10);
  CHECK(rel_err(hop_gain_cdf(0.95 * C.a, C), frozen::C_F_0_95a) < 1e-10);
  const LinkChannel E = tu::hop_E();
  CHECK(rel_err(hop_gain_pdf(0.3 * E.a, E), frozen::E_f_0_3a) < kTol);
  CHECK(rel_err(hop_gain_cdf(0.3 * E.a, E), frozen::E_F_0_3a) < 1e-9);
  const LinkChannel F = tu::hop_F();
  CHECK(rel_err(hop_gain_pdf(0.6 * F.a, F), frozen::F_f_0_6a) < kTol);
  CHECK(rel_err(hop_gain_cdf(0.6 * F.a, F), frozen::F_F_0_6a) < 1e-10);
}

TEST_CASE("combined law internal consistency") {
  for (const LinkChannel& link : {tu::hop_A(), tu::hop_B(), tu::hop_E(), tu::hop_F(),
                                  tu::hop_C(), tu::hop_D(), tu::hop_G()}) {
    // pdf integrates to 1
    quad::QuadSpec spec;
    spec.abs_tol = 1e-13;
    spec.rel_tol = 1e-10;
    spec.max_subdivisions = 4000;
    spec.endpoint_handling = quad::Endpoint::OpenLeft;
    const double total =
        quad::integrate_segments([&](double h) { return hop_gain_pdf(h, link); },
                                 {0.0, 0.01 * link.a, 0.5 * link.a, link.a}, spec)
            .value;
    CHECK(std::fabs(total - 1.0) < 1e-8);
    // the three CDF forms agree with each other and with the integrated pdf
    for (double frac : {0.08, 0.35, 0.75}) {
      const double h = frac * link.a;
      const double closed = hop_gain_cdf(h, link);
      CHECK(rel_err(hop_gain_cdf_gamma_series(h, link), closed) < 1e-9);
      CHECK(rel_err(hop_gain_cdf_quadrature(h, link), closed) < 1e-8);
      const double integrated =
          quad::integrate_segments([&](double hh) { return hop_gain_pdf(hh, link); },
                                   {0.0, 0.5 * h, h}, spec)
              .value;
      CHECK(rel_err(integrated, closed) < 1e-8);
    }
    // edges
    CHECK(hop_gain_cdf(0.0, link) == 0.0);
    CHECK(hop_gain_cdf(link.a * 1.0000001, link) == 1.0);
    CHECK(std::fabs(hop_gain_cdf(link.a, link) - 1.0) < 1e-9);
    CHECK(hop_gain_pdf(-0.1, link) == 0.0);
    CHECK(hop_gain_pdf(link.a * 1.1, link) == 0.0);
  }
}

TEST_CASE("real fog shape falls back to the conditioned quadrature CDF") {
  const LinkChannel lk =
      build_link(ChannelMode::FP, FogParams::light(0.25), tu::point(25, 3));
  CHECK_FALSE(lk.closed_form_ready);
  CHECK(lk.k == 2.32);
  CHECK_THROWS_AS(hop_gain_cdf(0.3 * lk.a, lk), DomainError);
  CHECK(rel_err(hop_gain_cdf_quadrature(0.05 * lk.a, lk), frozen::realk_F_0_05a) < 1e-9);
  CHECK(rel_err(hop_gain_cdf_quadrature(0.3 * lk.a, lk), frozen::realk_F_0_3a) < 1e-9);
  // integer-k quadrature CDF reduces to the closed form (already covered above)
  // and the real-k CDF still integrates the real-k pdf
  quad::QuadSpec spec;
  spec.abs_tol = 1e-13;
  spec.rel_tol = 1e-10;
  spec.max_subdivisions = 4000;
  spec.endpoint_handling = quad::Endpoint::OpenLeft;
  const double h = 0.3 * lk.a;
  const double integrated =
      quad::integrate_segments([&](double hh) { return hop_gain_pdf(hh, lk); },
                               {0.0, 0.5 * h, h}, spec)
          .value;
  CHECK(rel_err(integrated, frozen::realk_F_0_3a) < 1e-8);
}

TEST_CASE("snr-domain law") {
  const LinkChannel A = tu::hop_A();
  const double g0 = tu::g0(0);
  const double gam = 0.09 * A.a * A.a * g0;  // h = 0.3 a
  CHECK(rel_err(combined_snr_pdf(gam, A, g0), frozen::A_fgam_0_09a2g0) < kTol);
  CHECK(rel_err(combined_snr_cdf(gam, A, g0), frozen::A_Fgam_0_09a2g0) < 1e-10);
  // support edge and beyond
  CHECK(combined_snr_cdf(A.snr_support(g0) * 1.001, A, g0) == 1.0);
  CHECK(combined_snr_pdf(A.snr_support(g0) * 1.001, A, g0) == 0.0);
  CHECK(combined_snr_cdf(0.0, A, g0) == 0.0);
  CHECK_THROWS_AS(combined_snr_cdf(1.0, A, 0.0), DomainError);
}
