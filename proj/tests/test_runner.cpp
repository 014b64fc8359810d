#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "owc/cli_runner.hpp"
#include "owc/errors.hpp"
#include "test_util.hpp"

using namespace owc;
using namespace owc::runner;

namespace {

std::string minimal_fp_json(const std::string& extra = "") {
  std::string s = R"({
    "mode": "fp",
    "protocol": "df",
    "fog": {"k": 2.0, "beta_db_km": 13.12},
    "geometry": {"d_km": 0.5, "a_r_m": 0.05, "wz_over_ar": 25, "sigmas_over_ar": 3},
    "sweep": {"start_dbm": 0, "stop_dbm": 10, "step_db": 5},
    "gamma_th_db": 6,
    "methods": ["analytic", "quadrature"])";
  if (!extra.empty()) s += ",\n" + extra;
  s += "\n}";
  return s;
}

}  // namespace

TEST_CASE("power sweep point generation") {
  PowerSweep s;
  CHECK(s.points().size() == 41);  // 0..40 step 1
  CHECK(s.points().front() == doctest::Approx(0.0));
  CHECK(s.points().back() == doctest::Approx(40.0));

  PowerSweep one{15.0, 15.0, 1.0};
  CHECK(one.points().size() == 1);
  CHECK(one.points()[0] == doctest::Approx(15.0));

  PowerSweep frac{0.0, 1.0, 0.3};  // 0, .3, .6, .9
  CHECK(frac.points().size() == 4);

  CHECK_THROWS_AS((PowerSweep{0.0, 10.0, 0.0}.points()), ConfigError);
  CHECK_THROWS_AS((PowerSweep{10.0, 0.0, 1.0}.points()), ConfigError);
}

TEST_CASE("config parsing fills fields and defaults") {
  const ScenarioConfig cfg = parse_config(minimal_fp_json());
  CHECK(cfg.mode == RunMode::FP);
  CHECK(cfg.protocol == RunProtocol::DF);
  CHECK(cfg.fog_k.value() == doctest::Approx(2.0));
  CHECK(cfg.fog_beta_db_km.value() == doctest::Approx(13.12));
  CHECK_FALSE(cfg.fog_class.has_value());
  CHECK(cfg.d_km == doctest::Approx(0.5));
  CHECK_FALSE(cfg.d1_km.has_value());
  CHECK(cfg.wz_over_ar == doctest::Approx(25.0));
  CHECK(cfg.sweep.step_db == doctest::Approx(5.0));
  CHECK(cfg.gamma_th_db == doctest::Approx(6.0));
  CHECK(cfg.methods.size() == 2);
  CHECK_FALSE(cfg.paper_literal);
  CHECK(cfg.sim.seed == 1);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config parsing rejects unknown keys with their path") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"mode":"fp","bogus":1})"),
                       doctest::Contains("bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"mode":"fp","geometry":{"d_km":0.5,"zzz":1}})"),
      doctest::Contains("geometry.zzz"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"mode":"nosuchmode"})"), ConfigError);
}

TEST_CASE("validation rejects inconsistent scenarios") {
  // deterministic-attenuation mode cannot carry a random fog law
  ScenarioConfig pt = parse_config(R"({
    "mode": "pt", "protocol": "df",
    "fog": {"class": "light"},
    "turbulence": {"alpha": 3.02, "beta": 2.80, "eta": 0.84},
    "path_loss": {"psi_per_km": 1.8}
  })");
  CHECK_THROWS_WITH_AS(pt.validate(), doctest::Contains("mode/fog conflict"),
                       ConfigError);

  // turbulence-bearing mode needs turbulence parameters
  ScenarioConfig fpt = parse_config(R"({
    "mode": "fpt", "protocol": "df", "fog": {"class": "light"}
  })");
  CHECK_THROWS_AS(fpt.validate(), ConfigError);

  // fog-only mode must not carry turbulence
  ScenarioConfig fp_turb = parse_config(minimal_fp_json(
      R"("turbulence": {"alpha": 3.02, "beta": 2.80, "eta": 0.84})"));
  CHECK_THROWS_AS(fp_turb.validate(), ConfigError);

  // fixed-gain relaying is Monte Carlo only
  ScenarioConfig af = parse_config(minimal_fp_json());
  af.protocol = RunProtocol::AfMc;
  CHECK_THROWS_AS(af.validate(), ConfigError);
  af.methods = {"mc"};
  CHECK_NOTHROW(af.validate());

  // hop lengths: both or neither, and they must sum to the total
  ScenarioConfig d1only = parse_config(minimal_fp_json());
  d1only.d1_km = 0.2;
  CHECK_THROWS_AS(d1only.validate(), ConfigError);
  d1only.d2_km = 0.2;  // 0.2 + 0.2 != 0.5
  CHECK_THROWS_AS(d1only.validate(), ConfigError);
  d1only.d2_km = 0.3;
  CHECK_NOTHROW(d1only.validate());

  // boresight offsets require boresight mode, which fog-only mode forbids
  ScenarioConfig off = parse_config(minimal_fp_json());
  off.mu_x_m = 0.05;
  CHECK_THROWS_AS(off.validate(), ConfigError);

  ScenarioConfig bs = parse_config(minimal_fp_json());
  bs.boresight = true;
  CHECK_THROWS_AS(bs.validate(), ConfigError);

  ScenarioConfig badfog = parse_config(minimal_fp_json());
  badfog.fog_class = std::string("pea-soup");
  CHECK_THROWS_AS(badfog.validate(), ConfigError);

  ScenarioConfig badmethod = parse_config(minimal_fp_json());
  badmethod.methods = {"analytic", "sorcery"};
  CHECK_THROWS_WITH_AS(badmethod.validate(), doctest::Contains("methods"),
                       ConfigError);
}

TEST_CASE("scenario run produces ordered rows and consistent methods") {
  const ScenarioConfig cfg = parse_config(minimal_fp_json());
  const RunResult res = run_scenario(cfg);

  REQUIRE(res.rows.size() == 6);  // 3 sweep points x 2 methods
  const double g0_db_at0 = 10.0 * std::log10(tu::g0(0.0));
  for (int i = 0; i < 3; ++i) {
    const auto& ra = res.rows[2 * i];
    const auto& rq = res.rows[2 * i + 1];
    CHECK(ra.method == "analytic");
    CHECK(rq.method == "quadrature");
    CHECK(ra.p_t_dbm == doctest::Approx(5.0 * i));
    CHECK(ra.gamma0_db == doctest::Approx(g0_db_at0 + 2.0 * 5.0 * i));
    // closed forms against the independent integrator
    CHECK(tu::rel_err(ra.outage, rq.outage) < 1e-6);
    CHECK(std::fabs(ra.avg_snr_db - rq.avg_snr_db) < 1e-4);
    CHECK(ra.rate_bps_hz <= rq.rate_bps_hz);  // lower bound vs exact integral
    CHECK(tu::rel_err(ra.ber, rq.ber) < 1e-5);
    CHECK(ra.outage_se == 0.0);
  }

  const std::string header = res.csv.substr(0, res.csv.find('\n'));
  CHECK(header ==
        "p_t_dbm,gamma0_db,method,outage,avg_snr_db,rate_bps_hz,ber,"
        "outage_se,avg_snr_db_se,rate_se,ber_se");

  // manifest echoes the config and the seed
  const auto manifest = nlohmann::json::parse(res.manifest_json);
  CHECK(manifest.contains("config"));
  CHECK(manifest["config"]["mode"] == "FP");
  CHECK(manifest["seed"].get<std::uint64_t>() == cfg.sim.seed);
  // the echoed config re-parses to an equivalent scenario
  const ScenarioConfig echo = parse_config(manifest["config"].dump());
  CHECK(echo.fog_k.value() == doctest::Approx(2.0));
  CHECK(echo.sweep.stop_dbm == doctest::Approx(10.0));
  CHECK(echo.methods == cfg.methods);
}

TEST_CASE("monte carlo rows are reproducible byte for byte") {
  ScenarioConfig cfg = parse_config(minimal_fp_json());
  cfg.methods = {"mc"};
  cfg.sim.n_samples = 20000;
  cfg.sim.seed = 7;
  cfg.sweep = PowerSweep{10.0, 15.0, 5.0};
  const RunResult r1 = run_scenario(cfg);
  const RunResult r2 = run_scenario(cfg);
  CHECK(r1.csv == r2.csv);
  REQUIRE(r1.rows.size() == 2);
  CHECK(r1.rows[0].outage_se > 0.0);
  CHECK(r1.rows[0].ber_se > 0.0);

  cfg.sim.seed = 8;
  const RunResult r3 = run_scenario(cfg);
  CHECK(r1.csv != r3.csv);
}

TEST_CASE("csv comparison verdicts") {
  const std::string header =
      "p_t_dbm,gamma0_db,method,outage,avg_snr_db,rate_bps_hz,ber,"
      "outage_se,avg_snr_db_se,rate_se,ber_se\n";
  const std::string a =
      header + "0,76.99,analytic,0.5,10,1,0.001,0,0,0,0\n";
  const std::string b =
      header + "0,76.99,analytic,0.5000001,10,1,0.001,0,0,0,0\n";
  const std::string c =
      header + "5,76.99,analytic,0.5,10,1,0.001,0,0,0,0\n";
  const std::string with_nan =
      header + "0,76.99,analytic,0.5,nan,1,0.001,0,0,0,0\n";

  const CompareReport same = compare_csv(a, a, 1e-9, 0.0);
  CHECK(same.grids_match);
  CHECK(same.pass);
  CHECK(same.max_rel_delta == 0.0);
  CHECK(same.text().find("PASS") != std::string::npos);

  const CompareReport drift = compare_csv(a, b, 1e-9, 0.0);
  CHECK(drift.grids_match);
  CHECK_FALSE(drift.pass);
  CHECK(drift.max_rel_delta > 1e-8);
  CHECK(drift.text().find("FAIL") != std::string::npos);

  CHECK(compare_csv(a, b, 1e-5, 0.0).pass);  // loose tolerance admits it
  CHECK_FALSE(compare_csv(a, c, 1e-9, 0.0).grids_match);
  CHECK(compare_csv(with_nan, with_nan, 1e-9, 0.0).pass);   // NaN == NaN here
  CHECK_FALSE(compare_csv(a, with_nan, 1e-9, 0.0).pass);    // value vs NaN


}

TEST_CASE("outputs land on disk and configs load from files") {
  namespace fs = std::filesystem;
  ScenarioConfig cfg = parse_config(minimal_fp_json());
  cfg.sweep = PowerSweep{0.0, 0.0, 1.0};
  const RunResult res = run_scenario(cfg);

  const fs::path dir = fs::temp_directory_path() / "owc_runner_test";
  fs::remove_all(dir);
  const std::string csv_path = write_outputs(res, dir.string());
  CHECK(fs::exists(csv_path));
  CHECK(fs::exists(dir / "manifest.json"));
  std::ifstream in(csv_path);
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  CHECK(contents == res.csv);

  const fs::path cfg_path = dir / "cfg.json";
  std::ofstream(cfg_path) << minimal_fp_json();
  const ScenarioConfig loaded = load_config(cfg_path.string());
  CHECK(loaded.fog_beta_db_km.value() == doctest::Approx(13.12));
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("version string identifies the tool") {
  CHECK(version().find("owcsim") != std::string::npos);
}
