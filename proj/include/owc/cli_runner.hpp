#pragma once
// Scenario-driven front end: parse + validate a JSON scenario, sweep transmit
// power, evaluate the requested methods (analytic closed forms, quadrature
// oracle, Monte Carlo), and emit a CSV results table plus a JSON manifest
// that makes the run reproducible (config echo + seed => identical CSV bytes).

#include <optional>
#include <string>
#include <vector>

#include "owc/analytic_metrics.hpp"
#include "owc/montecarlo.hpp"
#include "owc/units.hpp"

namespace owc::runner {

enum class RunMode { FP, FPT, PT };
enum class RunProtocol { Direct, DF, AfMc };

struct PowerSweep {
  double start_dbm = 0.0;
  double stop_dbm = 40.0;
  double step_db = 1.0;
  std::vector<double> points() const;
};

struct ScenarioConfig {
  RunMode mode = RunMode::FP;
  RunProtocol protocol = RunProtocol::DF;

  // Fog: a named class tag and/or explicit (k, beta); explicit wins with a
  // warning when both are present.  PT mode forbids both.
  std::optional<std::string> fog_class;  // "light" | "moderate" | "thick"
  std::optional<double> fog_k;
  std::optional<double> fog_beta_db_km;

  double d_km = 0.5;                 // total link length
  std::optional<double> d1_km;       // hop lengths (default: d/2 each)
  std::optional<double> d2_km;

  double a_r_m = 0.05;
  double wz_over_ar = 25.0;
  double sigmas_over_ar = 3.0;
  double mu_x_m = 0.0, mu_y_m = 0.0;
  double sigma_x_m = 0.0, sigma_y_m = 0.0;
  bool boresight = false;

  std::optional<TurbulenceParams> turbulence;  // required for FPT and PT
  double psi_per_km = 0.0;                     // PT-mode attenuation coefficient

  PowerSweep sweep;
  units::NoiseModel noise;
  double responsivity = 0.5;
  double gamma_th_db = 6.0;

  mc::SimConfig sim;
  std::vector<std::string> methods = {"analytic", "quadrature", "mc"};
  bool paper_literal = false;  // evaluate the verbatim-transcribed closed forms

  // Throws ConfigError naming the offending field path.
  void validate() const;
};

// Parse a JSON document (see README for the schema).  Unknown keys are
// rejected with their path.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

struct ResultRow {
  double p_t_dbm = 0.0;
  double gamma0_db = 0.0;
  std::string method;   // analytic | quadrature | mc
  double outage = 0.0;
  double avg_snr_db = 0.0;
  double rate_bps_hz = 0.0;
  double ber = 0.0;
  double outage_se = 0.0;    // standard errors; 0 for non-mc methods
  double avg_snr_db_se = 0.0;
  double rate_se = 0.0;
  double ber_se = 0.0;
};

struct RunResult {
  std::vector<ResultRow> rows;  // deterministic order: sweep point, then method
  std::string csv;              // full CSV text (header + rows, %.12g, '.' decimal)
  std::string manifest_json;    // config echo, seed, version, per-point timing
};

// Execute a validated scenario.  Rows are computed in a worker pool but
// always emitted in sweep order.  Numerical failures carry module/term names.
RunResult run_scenario(const ScenarioConfig& cfg);

// Write CSV + manifest under out_dir (created if missing); returns CSV path.
std::string write_outputs(const RunResult& result, const std::string& out_dir);

struct CompareReport {
  bool grids_match = false;
  std::vector<std::string> lines;  // per-metric max |delta| summary
  double max_rel_delta = 0.0;
  bool pass = true;  // against the given tolerance
  std::string text() const;
};

// Compare two result CSVs row-by-row on matching (p_t_dbm, method) grids.
CompareReport compare_csv(const std::string& csv_a, const std::string& csv_b,
                          double rel_tol, double abs_tol);

// Entry point used by the owcsim binary: exit 0 success, 1 config error,
// 2 numerical non-convergence.
int main_entry(int argc, char** argv);

std::string version();

}  // namespace owc::runner
