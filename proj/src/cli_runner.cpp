#include "owc/cli_runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "owc/errors.hpp"
#include "owc/quadrature_oracle.hpp"
#include "owc/relay_snr.hpp"

namespace owc::runner {

namespace {

using njson = nlohmann::ordered_json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt_g(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

std::string version() { return "owcsim 1.0.0"; }

// ----------------------------------------------------------------- sweep

std::vector<double> PowerSweep::points() const {
  if (!(step_db > 0.0)) throw ConfigError("sweep.step_db: must be > 0");
  if (stop_dbm < start_dbm) throw ConfigError("sweep.stop_dbm: must be >= start_dbm");
  const int n = static_cast<int>(std::floor((stop_dbm - start_dbm) / step_db + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(1, n)));
  for (int i = 0; i < std::max(1, n); ++i) out.push_back(start_dbm + i * step_db);
  return out;
}

// ------------------------------------------------------------- validation

void ScenarioConfig::validate() const {
  const bool relayed = protocol != RunProtocol::Direct;
  const bool has_fog = fog_class || fog_k || fog_beta_db_km;

  if (mode == RunMode::PT) {
    if (has_fog) {
      throw ConfigError(
          "mode/fog conflict: PT mode replaces random fog with the deterministic "
          "path loss; remove the fog block");
    }
    if (!turbulence) throw ConfigError("turbulence: required in PT mode");
    if (!(psi_per_km > 0.0)) throw ConfigError("path_loss.psi_per_km: must be > 0 in PT mode");
  } else {
    if (!has_fog) {
      throw ConfigError("fog: provide a class tag or explicit (k, beta_db_km)");
    }
    if (static_cast<bool>(fog_k) != static_cast<bool>(fog_beta_db_km)) {
      throw ConfigError("fog.k and fog.beta_db_km must be given together");
    }
    if (fog_k && !(*fog_k > 0.0)) throw ConfigError("fog.k: must be > 0");
    if (fog_beta_db_km && !(*fog_beta_db_km > 0.0)) {
      throw ConfigError("fog.beta_db_km: must be > 0");
    }
    if (fog_class && *fog_class != "light" && *fog_class != "moderate" &&
        *fog_class != "thick") {
      throw ConfigError("fog.class: expected light|moderate|thick, got '" + *fog_class + "'");
    }
    if (mode == RunMode::FP && turbulence) {
      throw ConfigError("turbulence: not allowed in FP mode (use FPT)");
    }
    if (mode == RunMode::FPT && !turbulence) {
      throw ConfigError("turbulence: required in FPT mode");
    }
  }
  if (turbulence) turbulence->validate();

  if (!(d_km > 0.0)) throw ConfigError("geometry.d_km: must be > 0");
  if (relayed) {
    if (static_cast<bool>(d1_km) != static_cast<bool>(d2_km)) {
      throw ConfigError("geometry.d1_km and d2_km must be given together");
    }
    if (d1_km) {
      if (!(*d1_km > 0.0)) throw ConfigError("geometry.d1_km: must be > 0");
      if (!(*d2_km > 0.0)) throw ConfigError("geometry.d2_km: must be > 0");
      if (std::fabs(*d1_km + *d2_km - d_km) > 1e-9 * std::max(1.0, d_km)) {
        throw ConfigError("geometry.d1_km + d2_km must equal d_km");
      }
    }
  } else if (d1_km || d2_km) {
    throw ConfigError("geometry.d1_km: not allowed with protocol=direct");
  }

  if (!(a_r_m > 0.0)) throw ConfigError("geometry.a_r_m: must be > 0");
  if (!(wz_over_ar > 0.0)) throw ConfigError("geometry.wz_over_ar: must be > 0");
  if (!(sigmas_over_ar > 0.0)) throw ConfigError("geometry.sigmas_over_ar: must be > 0");
  if (sigma_x_m < 0.0) throw ConfigError("geometry.sigma_x_m: must be >= 0");
  if (sigma_y_m < 0.0) throw ConfigError("geometry.sigma_y_m: must be >= 0");
  if (boresight && mode == RunMode::FP) {
    throw ConfigError(
        "geometry.boresight: FP closed forms use the zero-boresight law; "
        "boresight offsets need the displacement MGF of FPT or PT mode");
  }
  const bool offset = mu_x_m != 0.0 || mu_y_m != 0.0 ||
                      (sigma_x_m > 0.0 && sigma_y_m > 0.0 && sigma_x_m != sigma_y_m);
  if (offset && mode != RunMode::FP && !boresight) {
    throw ConfigError(
        "geometry.boresight: enable it when boresight offsets or per-axis jitter are "
        "set, so the sampler matches the displacement MGF");
  }

  (void)sweep.points();  // throws on bad step/stop

  if (!(noise.sigma_w2_per_ghz > 0.0)) throw ConfigError("noise.sigma_w2_per_ghz: must be > 0");
  if (!(noise.bandwidth_ghz > 0.0)) throw ConfigError("noise.bandwidth_ghz: must be > 0");
  if (!(responsivity > 0.0)) throw ConfigError("responsivity: must be > 0");
  if (!std::isfinite(gamma_th_db)) throw ConfigError("gamma_th_db: must be finite");
  if (sim.n_samples <= 0) throw ConfigError("sim.n_samples: must be > 0");
  if (sim.n_threads < 0) throw ConfigError("sim.n_threads: must be >= 0");

  if (methods.empty()) throw ConfigError("methods: at least one of analytic|quadrature|mc");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string& m = methods[i];
    if (m != "analytic" && m != "quadrature" && m != "mc") {
      std::ostringstream os;
      os << "methods[" << i << "]: unknown method '" << m << "'";
      throw ConfigError(os.str());
    }
  }
  if (protocol == RunProtocol::AfMc) {
    for (const std::string& m : methods) {
      if (m != "mc") {
        throw ConfigError(
            "protocol: af_mc has no closed forms or quadrature oracle; use methods=[\"mc\"]");
      }
    }
  }
}

// ---------------------------------------------------------------- parsing

namespace {

void check_keys(const njson& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError((path.empty() ? item.key() : path + "." + item.key()) +
                        ": unknown key");
    }
  }
}

double get_num(const njson& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return obj[key].get<double>();
}

std::optional<double> get_opt_num(const njson& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return obj[key].get<double>();
}

bool get_bool(const njson& obj, const char* key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
  return obj[key].get<bool>();
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root: expected a JSON object");
  check_keys(j, "",
             {"mode", "protocol", "fog", "geometry", "turbulence", "path_loss", "sweep",
              "noise", "responsivity", "gamma_th_db", "sim", "methods", "paper_literal"});

  ScenarioConfig cfg;

  if (!j.contains("mode") || !j["mode"].is_string()) {
    throw ConfigError("mode: required, expected FP|FPT|PT");
  }
  const std::string mode_s = to_lower(j["mode"].get<std::string>());
  if (mode_s == "fp") cfg.mode = RunMode::FP;
  else if (mode_s == "fpt") cfg.mode = RunMode::FPT;
  else if (mode_s == "pt") cfg.mode = RunMode::PT;
  else throw ConfigError("mode: expected FP|FPT|PT, got '" + mode_s + "'");

  if (j.contains("protocol")) {
    if (!j["protocol"].is_string()) throw ConfigError("protocol: expected a string");
    const std::string p = to_lower(j["protocol"].get<std::string>());
    if (p == "direct") cfg.protocol = RunProtocol::Direct;
    else if (p == "df") cfg.protocol = RunProtocol::DF;
    else if (p == "af_mc") cfg.protocol = RunProtocol::AfMc;
    else throw ConfigError("protocol: expected direct|df|af_mc, got '" + p + "'");
  }

  if (j.contains("fog")) {
    const njson& f = j["fog"];
    if (!f.is_object()) throw ConfigError("fog: expected an object");
    check_keys(f, "fog", {"class", "k", "beta_db_km"});
    if (f.contains("class")) {
      if (!f["class"].is_string()) throw ConfigError("fog.class: expected a string");
      cfg.fog_class = f["class"].get<std::string>();
    }
    cfg.fog_k = get_opt_num(f, "k", "fog");
    cfg.fog_beta_db_km = get_opt_num(f, "beta_db_km", "fog");
    if (cfg.fog_class && cfg.fog_k) {
      std::cerr << "warning: fog.class is ignored because explicit fog.k/beta_db_km are set\n";
    }
  }

  if (j.contains("geometry")) {
    const njson& g = j["geometry"];
    if (!g.is_object()) throw ConfigError("geometry: expected an object");
    check_keys(g, "geometry",
               {"d_km", "d1_km", "d2_km", "a_r_m", "wz_over_ar", "sigmas_over_ar", "mu_x_m",
                "mu_y_m", "sigma_x_m", "sigma_y_m", "boresight"});
    cfg.d_km = get_num(g, "d_km", "geometry", cfg.d_km);
    cfg.d1_km = get_opt_num(g, "d1_km", "geometry");
    cfg.d2_km = get_opt_num(g, "d2_km", "geometry");
    cfg.a_r_m = get_num(g, "a_r_m", "geometry", cfg.a_r_m);
    cfg.wz_over_ar = get_num(g, "wz_over_ar", "geometry", cfg.wz_over_ar);
    cfg.sigmas_over_ar = get_num(g, "sigmas_over_ar", "geometry", cfg.sigmas_over_ar);
    cfg.mu_x_m = get_num(g, "mu_x_m", "geometry", 0.0);
    cfg.mu_y_m = get_num(g, "mu_y_m", "geometry", 0.0);
    cfg.sigma_x_m = get_num(g, "sigma_x_m", "geometry", 0.0);
    cfg.sigma_y_m = get_num(g, "sigma_y_m", "geometry", 0.0);
    cfg.boresight = get_bool(g, "boresight", "geometry", false);
  }

  if (j.contains("turbulence")) {
    const njson& t = j["turbulence"];
    if (!t.is_object()) throw ConfigError("turbulence: expected an object");
    check_keys(t, "turbulence", {"alpha", "beta", "eta"});
    if (!t.contains("alpha") || !t.contains("beta") || !t.contains("eta")) {
      throw ConfigError("turbulence: alpha, beta and eta are all required");
    }
    TurbulenceParams tp{};
    tp.alpha_t = get_num(t, "alpha", "turbulence", 0.0);
    tp.beta_t = get_num(t, "beta", "turbulence", 0.0);
    tp.eta_t = get_num(t, "eta", "turbulence", 0.0);
    cfg.turbulence = tp;
  }

  if (j.contains("path_loss")) {
    const njson& p = j["path_loss"];
    if (!p.is_object()) throw ConfigError("path_loss: expected an object");
    check_keys(p, "path_loss", {"psi_per_km"});
    cfg.psi_per_km = get_num(p, "psi_per_km", "path_loss", 0.0);
  }

  if (j.contains("sweep")) {
    const njson& s = j["sweep"];
    if (!s.is_object()) throw ConfigError("sweep: expected an object");
    check_keys(s, "sweep", {"start_dbm", "stop_dbm", "step_db"});
    cfg.sweep.start_dbm = get_num(s, "start_dbm", "sweep", cfg.sweep.start_dbm);
    cfg.sweep.stop_dbm = get_num(s, "stop_dbm", "sweep", cfg.sweep.stop_dbm);
    cfg.sweep.step_db = get_num(s, "step_db", "sweep", cfg.sweep.step_db);
  }

  if (j.contains("noise")) {
    const njson& n = j["noise"];
    if (!n.is_object()) throw ConfigError("noise: expected an object");
    check_keys(n, "noise", {"sigma_w2_per_ghz", "bandwidth_ghz"});
    cfg.noise.sigma_w2_per_ghz =
        get_num(n, "sigma_w2_per_ghz", "noise", cfg.noise.sigma_w2_per_ghz);
    cfg.noise.bandwidth_ghz = get_num(n, "bandwidth_ghz", "noise", cfg.noise.bandwidth_ghz);
  }

  cfg.responsivity = get_num(j, "responsivity", "", cfg.responsivity);
  cfg.gamma_th_db = get_num(j, "gamma_th_db", "", cfg.gamma_th_db);

  if (j.contains("sim")) {
    const njson& s = j["sim"];
    if (!s.is_object()) throw ConfigError("sim: expected an object");
    check_keys(s, "sim", {"n_samples", "seed", "n_threads"});
    if (s.contains("n_samples")) {
      if (!s["n_samples"].is_number_integer()) {
        throw ConfigError("sim.n_samples: expected an integer");
      }
      cfg.sim.n_samples = s["n_samples"].get<long long>();
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !s["seed"].is_number_integer()) {
        throw ConfigError("sim.seed: expected a non-negative integer");
      }
      cfg.sim.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("n_threads")) {
      if (!s["n_threads"].is_number_integer()) {
        throw ConfigError("sim.n_threads: expected an integer");
      }
      cfg.sim.n_threads = s["n_threads"].get<int>();
    }
  }

  if (j.contains("methods")) {
    if (!j["methods"].is_array()) throw ConfigError("methods: expected an array of strings");
    cfg.methods.clear();
    for (const auto& m : j["methods"]) {
      if (!m.is_string()) throw ConfigError("methods: expected an array of strings");
      cfg.methods.push_back(m.get<std::string>());
    }
  }

  if (j.contains("paper_literal")) {
    if (!j["paper_literal"].is_boolean()) throw ConfigError("paper_literal: expected a boolean");
    cfg.paper_literal = j["paper_literal"].get<bool>();
  }

  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

// Effective-config echo with the same schema parse_config accepts, so a
// manifest round-trips into an identical run.
njson config_to_json(const ScenarioConfig& cfg) {
  njson j;
  j["mode"] = cfg.mode == RunMode::FP ? "FP" : cfg.mode == RunMode::FPT ? "FPT" : "PT";
  j["protocol"] = cfg.protocol == RunProtocol::Direct ? "direct"
                  : cfg.protocol == RunProtocol::DF   ? "df"
                                                      : "af_mc";
  if (cfg.fog_class || cfg.fog_k) {
    njson f;
    if (cfg.fog_class) f["class"] = *cfg.fog_class;
    if (cfg.fog_k) f["k"] = *cfg.fog_k;
    if (cfg.fog_beta_db_km) f["beta_db_km"] = *cfg.fog_beta_db_km;
    j["fog"] = f;
  }
  njson g;
  g["d_km"] = cfg.d_km;
  if (cfg.d1_km) g["d1_km"] = *cfg.d1_km;
  if (cfg.d2_km) g["d2_km"] = *cfg.d2_km;
  g["a_r_m"] = cfg.a_r_m;
  g["wz_over_ar"] = cfg.wz_over_ar;
  g["sigmas_over_ar"] = cfg.sigmas_over_ar;
  g["mu_x_m"] = cfg.mu_x_m;
  g["mu_y_m"] = cfg.mu_y_m;
  g["sigma_x_m"] = cfg.sigma_x_m;
  g["sigma_y_m"] = cfg.sigma_y_m;
  g["boresight"] = cfg.boresight;
  j["geometry"] = g;
  if (cfg.turbulence) {
    j["turbulence"] = {{"alpha", cfg.turbulence->alpha_t},
                       {"beta", cfg.turbulence->beta_t},
                       {"eta", cfg.turbulence->eta_t}};
  }
  if (cfg.mode == RunMode::PT) j["path_loss"] = {{"psi_per_km", cfg.psi_per_km}};
  j["sweep"] = {{"start_dbm", cfg.sweep.start_dbm},
                {"stop_dbm", cfg.sweep.stop_dbm},
                {"step_db", cfg.sweep.step_db}};
  j["noise"] = {{"sigma_w2_per_ghz", cfg.noise.sigma_w2_per_ghz},
                {"bandwidth_ghz", cfg.noise.bandwidth_ghz}};
  j["responsivity"] = cfg.responsivity;
  j["gamma_th_db"] = cfg.gamma_th_db;
  j["sim"] = {{"n_samples", cfg.sim.n_samples},
              {"seed", cfg.sim.seed},
              {"n_threads", cfg.sim.n_threads}};
  j["methods"] = cfg.methods;
  j["paper_literal"] = cfg.paper_literal;
  return j;
}

// ------------------------------------------------- scenario model binding

struct MetricSet {
  double outage = kNan;
  double snr = kNan;
  double rate = kNan;
  double ber = kNan;
};

// Everything gamma0-independent, built once per run.
struct BuiltScenario {
  const ScenarioConfig& cfg;
  bool relayed;
  double gamma_th;  // linear
  PointingParams point{};
  // FP / FPT
  std::optional<LinkChannel> hop1, hop2;
  // PT
  std::optional<metrics::PowerLawChannel> plc;
  double det1 = 1.0, det2 = 1.0;  // PT per-hop deterministic gains

  explicit BuiltScenario(const ScenarioConfig& c) : cfg(c) {
    relayed = cfg.protocol != RunProtocol::Direct;
    gamma_th = units::db_to_linear(cfg.gamma_th_db);
    point.a_r = cfg.a_r_m;
    point.w_z = cfg.wz_over_ar * cfg.a_r_m;
    point.sigma_s = cfg.sigmas_over_ar * cfg.a_r_m;
    point.mu_x = cfg.mu_x_m;
    point.mu_y = cfg.mu_y_m;
    point.sigma_x = cfg.sigma_x_m;
    point.sigma_y = cfg.sigma_y_m;

    if (cfg.mode == RunMode::PT) {
      plc = metrics::build_power_law_channel(point, *cfg.turbulence);
      const double d1 = relayed ? cfg.d1_km.value_or(cfg.d_km / 2.0) : cfg.d_km;
      const double d2 = relayed ? cfg.d2_km.value_or(cfg.d_km / 2.0) : cfg.d_km;
      det1 = std::exp(-cfg.psi_per_km * d1);
      det2 = std::exp(-cfg.psi_per_km * d2);
      return;
    }

    double fk, fbeta;
    if (cfg.fog_k) {
      fk = *cfg.fog_k;
      fbeta = *cfg.fog_beta_db_km;
    } else if (*cfg.fog_class == "light") {
      fk = FogParams::light(1.0).k;
      fbeta = FogParams::light(1.0).beta_db_km;
    } else if (*cfg.fog_class == "moderate") {
      fk = FogParams::moderate(1.0).k;
      fbeta = FogParams::moderate(1.0).beta_db_km;
    } else {
      fk = FogParams::thick(1.0).k;
      fbeta = FogParams::thick(1.0).beta_db_km;
    }
    const ChannelMode m = cfg.mode == RunMode::FP ? ChannelMode::FP : ChannelMode::FPT;
    if (relayed) {
      const double d1 = cfg.d1_km.value_or(cfg.d_km / 2.0);
      const double d2 = cfg.d2_km.value_or(cfg.d_km / 2.0);
      hop1 = build_link(m, FogParams{fk, fbeta, d1}, point, cfg.turbulence);
      hop2 = build_link(m, FogParams{fk, fbeta, d2}, point, cfg.turbulence);
    } else {
      hop1 = build_link(m, FogParams{fk, fbeta, cfg.d_km}, point, cfg.turbulence);
    }
  }
};

// ------------------------------- local quadrature for direct & PT scenarios

quad::QuadSpec body_spec() {
  quad::QuadSpec s;
  s.abs_tol = 1e-13;
  s.rel_tol = 1e-9;
  s.max_subdivisions = 4000;
  s.endpoint_handling = quad::Endpoint::OpenLeft;
  return s;
}

quad::QuadSpec ber_spec() {
  quad::QuadSpec s;
  s.abs_tol = 1e-300;  // pure relative control; BER spans many decades
  s.rel_tol = 1e-10;
  s.max_subdivisions = 4000;
  s.endpoint_handling = quad::Endpoint::OpenLeft;
  return s;
}

std::vector<double> ber_grid(double edge, double q) {
  std::vector<double> pts{0.0};
  for (double c : {1.0, 10.0, 100.0, 1000.0}) {
    const double h = std::sqrt(c / q);
    if (h < edge) pts.push_back(h);
  }
  pts.push_back(edge / 2.0);
  pts.push_back(edge);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Generic single/dual-hop quadrature on a gain law given by F and f with
// support edge `a`; used for the direct protocol and the PT power law where
// metric_by_quadrature (which is bound to the fog-based RelayPair) does not
// apply.
struct GainLaw {
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;
  double edge;
};

MetricSet quadrature_on_law(const GainLaw& law, double g0, double gth, double ook_a,
                            double ook_b) {
  MetricSet out;
  const double a = law.edge;
  const double h_th = std::sqrt(gth / g0);
  if (h_th >= a) {
    out.outage = 1.0;
  } else {
    std::vector<double> pts{0.0};
    if (h_th > 2e-2 * a) pts.push_back(1e-2 * a);
    pts.push_back(h_th / 2.0);
    pts.push_back(h_th);
    std::sort(pts.begin(), pts.end());
    out.outage = quad::integrate_segments(law.pdf, pts, body_spec()).value;
  }

  const std::vector<double> body_pts{0.0, a / 2.0, a};
  out.snr = g0 * quad::integrate_segments(
                     [&](double h) { return h * h * law.pdf(h); }, body_pts, body_spec())
                     .value;
  const double c_rate = std::numbers::e / (2.0 * std::numbers::pi) * g0;
  out.rate = quad::integrate_segments(
                 [&](double h) { return std::log2(1.0 + c_rate * h * h) * law.pdf(h); },
                 body_pts, body_spec())
                 .value;
  const double q = ook_b * g0 / 2.0;
  out.ber = ook_a * std::sqrt(q / std::numbers::pi) *
                quad::integrate_segments(
                    [&](double h) { return std::exp(-q * h * h) * law.cdf(h); },
                    ber_grid(a, q), ber_spec())
                    .value +
            ook_a * std::erfc(std::sqrt(q) * a) / 2.0;
  return out;
}

GainLaw power_law(double a, double p2) {
  GainLaw law;
  law.edge = a;
  law.pdf = [a, p2](double h) {
    if (h <= 0.0 || h > a) return 0.0;
    return p2 / a * std::pow(h / a, p2 - 1.0);
  };
  law.cdf = [a, p2](double h) {
    if (h <= 0.0) return 0.0;
    if (h >= a) return 1.0;
    return std::pow(h / a, p2);
  };
  return law;
}

GainLaw min_law(const GainLaw& l1, const GainLaw& l2) {
  GainLaw law;
  law.edge = std::min(l1.edge, l2.edge);
  law.pdf = [l1, l2](double h) {
    return l1.pdf(h) * (1.0 - l2.cdf(h)) + l2.pdf(h) * (1.0 - l1.cdf(h));
  };
  law.cdf = [l1, l2](double h) {
    const double f1 = l1.cdf(h), f2 = l2.cdf(h);
    return f1 + f2 - f1 * f2;
  };
  return law;
}

GainLaw link_law(const LinkChannel& link) {
  GainLaw law;
  law.edge = link.a;
  law.pdf = [link](double h) { return hop_gain_pdf(h, link); };
  if (link.closed_form_ready) {
    law.cdf = [link](double h) { return hop_gain_cdf(h, link); };
  } else {
    law.cdf = [link](double h) { return hop_gain_cdf_quadrature(h, link); };
  }
  return law;
}

// ------------------------------------------------------ method evaluators

MetricSet eval_analytic(const BuiltScenario& bs, double g0) {
  const ScenarioConfig& cfg = bs.cfg;
  const bool lit = cfg.paper_literal;
  MetricSet m;
  if (cfg.mode == RunMode::PT) {
    const metrics::PowerLawChannel& ch = *bs.plc;
    const metrics::DeterministicPathLoss pl{cfg.psi_per_km, cfg.d_km};
    const double p2 = ch.phi2;
    const double h_th = std::sqrt(bs.gamma_th / g0);
    if (bs.relayed) {
      const double a1 = ch.a * bs.det1, a2 = ch.a * bs.det2;
      const double f1 = h_th >= a1 ? 1.0 : std::pow(h_th / a1, p2);
      const double f2 = h_th >= a2 ? 1.0 : std::pow(h_th / a2, p2);
      m.outage = f1 + f2 - f1 * f2;
      // closed relayed forms assume a symmetric split
      if (std::fabs(bs.det1 - bs.det2) < 1e-12) {
        const metrics::SnrRatePair sr = metrics::deterministic_metrics(ch, pl, g0, true);
        m.snr = sr.avg_snr;
        m.rate = sr.ergodic_rate;
        m.ber = lit ? metrics::literal::avg_ber_deterministic(ch, pl, g0)
                    : metrics::avg_ber_deterministic(ch, pl, g0);
      }
    } else {
      const double a = ch.a * bs.det1;
      m.outage = h_th >= a ? 1.0 : std::pow(h_th / a, p2);
      const metrics::SnrRatePair sr = metrics::deterministic_metrics(ch, pl, g0, false);
      m.snr = sr.avg_snr;
      m.rate = sr.ergodic_rate;
      // no closed direct-link BER corollary on the PT power law
    }
    return m;
  }

  if (bs.relayed) {
    const RelayPair pair = make_relay_pair(*bs.hop1, *bs.hop2, g0);
    const bool int_k = bs.hop1->closed_form_ready && bs.hop2->closed_form_ready;
    m.outage = int_k ? metrics::outage_df(pair, bs.gamma_th).value
                     : df_cdf(bs.gamma_th, pair);
    if (int_k && bs.hop1->k_int == bs.hop2->k_int) {
      m.snr = lit ? metrics::literal::avg_snr_general(pair) : metrics::avg_snr_general(pair);
      m.rate = lit ? metrics::literal::ergodic_rate_general(pair)
                   : metrics::ergodic_rate_general(pair);
      if (bs.hop1->k_int == 2) {
        m.ber = lit ? metrics::literal::avg_ber_k2(pair) : metrics::avg_ber_k2(pair);
      }
    }
    return m;
  }

  const LinkChannel& link = *bs.hop1;
  const double h_th = std::sqrt(bs.gamma_th / g0);
  if (h_th >= link.a) {
    m.outage = 1.0;
  } else {
    m.outage = link.closed_form_ready ? hop_gain_cdf(h_th, link)
                                      : hop_gain_cdf_quadrature(h_th, link);
  }
  m.snr = metrics::avg_snr_direct(link, g0);
  m.rate = metrics::ergodic_rate_direct(link, g0);
  if (link.closed_form_ready && link.k_int <= 3) {
    m.ber = metrics::avg_ber_direct(link, g0);
  }
  return m;
}

MetricSet eval_quadrature(const BuiltScenario& bs, double g0) {
  const ScenarioConfig& cfg = bs.cfg;
  MetricSet m;
  if (cfg.mode != RunMode::PT && bs.relayed) {
    const RelayPair pair = make_relay_pair(*bs.hop1, *bs.hop2, g0);
    m.outage = quad::metric_by_quadrature(quad::Metric::Outage, pair, bs.gamma_th);
    m.snr = quad::metric_by_quadrature(quad::Metric::AvgSnr, pair);
    m.rate = quad::metric_by_quadrature(quad::Metric::Rate, pair);
    m.ber = quad::metric_by_quadrature(quad::Metric::Ber, pair);
    return m;
  }
  GainLaw law = cfg.mode == RunMode::PT
                    ? (bs.relayed ? min_law(power_law(bs.plc->a * bs.det1, bs.plc->phi2),
                                            power_law(bs.plc->a * bs.det2, bs.plc->phi2))
                                  : power_law(bs.plc->a * bs.det1, bs.plc->phi2))
                    : link_law(*bs.hop1);
  return quadrature_on_law(law, g0, bs.gamma_th, 1.0, 0.5);
}

mc::McScenario mc_scenario(const BuiltScenario& bs, double g0) {
  const ScenarioConfig& cfg = bs.cfg;
  mc::McScenario sc;
  sc.gamma0 = g0;
  sc.gamma_th = bs.gamma_th;
  sc.protocol = cfg.protocol == RunProtocol::Direct ? mc::Protocol::Direct
                : cfg.protocol == RunProtocol::DF   ? mc::Protocol::DF
                                                    : mc::Protocol::AF;
  auto fill_hop = [&](mc::McHop& hop, double d_hop, double det) {
    hop.pointing = bs.point;
    hop.boresight = cfg.boresight;
    hop.turb = cfg.turbulence;
    if (cfg.mode == RunMode::PT) {
      hop.fog.reset();
      hop.det_gain = det;
    } else {
      double fk, fbeta;
      if (cfg.fog_k) {
        fk = *cfg.fog_k;
        fbeta = *cfg.fog_beta_db_km;
      } else if (*cfg.fog_class == "light") {
        fk = FogParams::light(1.0).k;
        fbeta = FogParams::light(1.0).beta_db_km;
      } else if (*cfg.fog_class == "moderate") {
        fk = FogParams::moderate(1.0).k;
        fbeta = FogParams::moderate(1.0).beta_db_km;
      } else {
        fk = FogParams::thick(1.0).k;
        fbeta = FogParams::thick(1.0).beta_db_km;
      }
      hop.fog = FogParams{fk, fbeta, d_hop};
      hop.det_gain = 1.0;
    }
  };
  const double d1 = bs.relayed ? cfg.d1_km.value_or(cfg.d_km / 2.0) : cfg.d_km;
  const double d2 = bs.relayed ? cfg.d2_km.value_or(cfg.d_km / 2.0) : cfg.d_km;
  fill_hop(sc.hop1, d1, bs.det1);
  fill_hop(sc.hop2, d2, bs.det2);
  return sc;
}

}  // namespace

// -------------------------------------------------------------------- run

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const BuiltScenario bs(cfg);
  const std::vector<double> pts = cfg.sweep.points();

  struct PointOut {
    std::vector<ResultRow> rows;
    double ms = 0.0;
  };
  std::vector<PointOut> outs(pts.size());

  const bool has_mc =
      std::find(cfg.methods.begin(), cfg.methods.end(), "mc") != cfg.methods.end();
  int n_workers = static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers <= 0) n_workers = 1;
  n_workers = static_cast<int>(std::min<std::size_t>(n_workers, pts.size()));

  // When the sweep itself is parallel, run each MC estimate single-threaded;
  // estimates are thread-count independent, so the CSV is unchanged.
  mc::SimConfig sim = cfg.sim;
  if (n_workers > 1 && has_mc) sim.n_threads = 1;

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pts.size()) break;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const double p_dbm = pts[i];
        const double g0 =
            units::gamma0_from_transmit_power(p_dbm, cfg.responsivity, cfg.noise);
        for (const std::string& method : cfg.methods) {
          ResultRow row;
          row.p_t_dbm = p_dbm;
          row.gamma0_db = units::linear_to_db(g0);
          row.method = method;
          if (method == "analytic") {
            const MetricSet m = eval_analytic(bs, g0);
            row.outage = m.outage;
            row.avg_snr_db = units::linear_to_db(m.snr);
            row.rate_bps_hz = m.rate;
            row.ber = m.ber;
          } else if (method == "quadrature") {
            const MetricSet m = eval_quadrature(bs, g0);
            row.outage = m.outage;
            row.avg_snr_db = units::linear_to_db(m.snr);
            row.rate_bps_hz = m.rate;
            row.ber = m.ber;
          } else {
            const mc::McScenario sc = mc_scenario(bs, g0);
            const mc::Estimate out_e = mc::estimate(quad::Metric::Outage, sc, sim);
            const mc::Estimate snr_e = mc::estimate(quad::Metric::AvgSnr, sc, sim);
            const mc::Estimate rate_e = mc::estimate(quad::Metric::Rate, sc, sim);
            const mc::Estimate ber_e = mc::estimate(quad::Metric::Ber, sc, sim);
            row.outage = out_e.value;
            row.outage_se = out_e.std_error;
            row.avg_snr_db = units::linear_to_db(snr_e.value);
            row.avg_snr_db_se =
                snr_e.value > 0.0 ? 10.0 / std::numbers::ln10 * snr_e.std_error / snr_e.value
                                  : 0.0;
            row.rate_bps_hz = rate_e.value;
            row.rate_se = rate_e.std_error;
            row.ber = ber_e.value;
            row.ber_se = ber_e.std_error;
          }
          outs[i].rows.push_back(row);
        }
        outs[i].ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const auto run_t0 = std::chrono::steady_clock::now();
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  const double total_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - run_t0)
                              .count();

  RunResult res;
  std::ostringstream csv;
  csv << "p_t_dbm,gamma0_db,method,outage,avg_snr_db,rate_bps_hz,ber,"
         "outage_se,avg_snr_db_se,rate_se,ber_se\n";
  for (const PointOut& po : outs) {
    for (const ResultRow& r : po.rows) {
      csv << fmt_g(r.p_t_dbm) << ',' << fmt_g(r.gamma0_db) << ',' << r.method << ','
          << fmt_g(r.outage) << ',' << fmt_g(r.avg_snr_db) << ',' << fmt_g(r.rate_bps_hz)
          << ',' << fmt_g(r.ber) << ',' << fmt_g(r.outage_se) << ','
          << fmt_g(r.avg_snr_db_se) << ',' << fmt_g(r.rate_se) << ',' << fmt_g(r.ber_se)
          << '\n';
      res.rows.push_back(r);
    }
  }
  res.csv = csv.str();

  njson manifest;
  manifest["tool"] = version();
  manifest["config"] = config_to_json(cfg);
  manifest["seed"] = cfg.sim.seed;
  njson timing;
  timing["total_ms"] = total_ms;
  njson per_point = njson::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    per_point.push_back({{"p_t_dbm", pts[i]}, {"ms", outs[i].ms}});
  }
  timing["points"] = per_point;
  manifest["timing"] = timing;
  res.manifest_json = manifest.dump(2) + "\n";
  return res;
}

std::string write_outputs(const RunResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
  const fs::path csv_path = fs::path(out_dir) / "results.csv";
  const fs::path man_path = fs::path(out_dir) / "manifest.json";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write " + csv_path.string());
  csv << result.csv;
  std::ofstream man(man_path, std::ios::binary);
  if (!man) throw ConfigError("cannot write " + man_path.string());
  man << result.manifest_json;
  return csv_path.string();
}

// ---------------------------------------------------------------- compare

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (first) {
      t.header = fields;
      first = false;
    } else {
      t.rows.push_back(fields);
    }
  }
  return t;
}

}  // namespace

std::string CompareReport::text() const {
  std::ostringstream os;
  for (const std::string& l : lines) os << l << "\n";
  os << (pass && grids_match ? "PASS" : "FAIL") << "\n";
  return os.str();
}

CompareReport compare_csv(const std::string& csv_a, const std::string& csv_b, double rel_tol,
                          double abs_tol) {
  CompareReport rep;
  const CsvTable a = parse_csv(csv_a);
  const CsvTable b = parse_csv(csv_b);
  if (a.header != b.header) {
    rep.grids_match = false;
    rep.pass = false;
    rep.lines.push_back("grid mismatch: CSV headers differ");
    return rep;
  }
  if (a.rows.size() != b.rows.size()) {
    rep.grids_match = false;
    rep.pass = false;
    std::ostringstream os;
    os << "grid mismatch: " << a.rows.size() << " vs " << b.rows.size() << " rows";
    rep.lines.push_back(os.str());
    return rep;
  }
  // identical (p_t_dbm, method) grid, in order
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].size() != a.header.size() || b.rows[i].size() != b.header.size()) {
      rep.grids_match = false;
      rep.pass = false;
      rep.lines.push_back("grid mismatch: ragged row " + std::to_string(i + 1));
      return rep;
    }
    if (std::strtod(a.rows[i][0].c_str(), nullptr) !=
            std::strtod(b.rows[i][0].c_str(), nullptr) ||
        a.rows[i][2] != b.rows[i][2]) {
      rep.grids_match = false;
      rep.pass = false;
      rep.lines.push_back("grid mismatch: row " + std::to_string(i + 1) +
                          " differs in (p_t_dbm, method)");
      return rep;
    }
  }
  rep.grids_match = true;

  const int metric_cols[] = {3, 4, 5, 6};  // outage, avg_snr_db, rate_bps_hz, ber
  for (int col : metric_cols) {
    double max_abs = 0.0, max_rel = 0.0;
    std::size_t where = 0;
    bool col_pass = true;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      const double x = std::strtod(a.rows[i][col].c_str(), nullptr);
      const double y = std::strtod(b.rows[i][col].c_str(), nullptr);
      const bool nx = std::isnan(x), ny = std::isnan(y);
      if (nx && ny) continue;
      double ad, rd;
      if (nx != ny) {
        ad = rd = std::numeric_limits<double>::infinity();
      } else {
        ad = std::fabs(x - y);
        rd = ad / std::max({std::fabs(x), std::fabs(y), 1e-300});
      }
      if (rd > max_rel) {
        max_rel = rd;
        max_abs = ad;
        where = i;
      }
      if (!(ad <= abs_tol || rd <= rel_tol)) col_pass = false;
    }
    rep.max_rel_delta = std::max(rep.max_rel_delta, max_rel);
    std::ostringstream os;
    os << a.header[col] << ": max |delta| = " << fmt_g(max_abs) << " (rel "
       << fmt_g(max_rel) << ")";
    if (max_rel > 0.0 && where < a.rows.size()) {
      os << " at p_t_dbm=" << a.rows[where][0] << " method=" << a.rows[where][2];
    }
    if (!col_pass) {
      os << "  [exceeds tolerance]";
      rep.pass = false;
    }
    rep.lines.push_back(os.str());
  }
  return rep;
}

// ------------------------------------------------------------------- main

int main_entry(int argc, char** argv) {
  CLI::App app{"dual-hop optical wireless link performance toolkit"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "evaluate a scenario and write CSV + manifest");
  std::string config_path;
  std::string out_dir = ".";
  std::string methods_csv;
  double pt_dbm = 0.0;
  std::uint64_t seed = 0;
  long long samples = 0;
  bool literal_flag = false;
  run_cmd->add_option("config", config_path, "scenario config JSON file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (default: current)");
  auto* pt_opt = run_cmd->add_option("--pt-dbm", pt_dbm, "override: single transmit power");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override: RNG seed");
  auto* samples_opt = run_cmd->add_option("--samples", samples, "override: MC sample count");
  auto* methods_opt =
      run_cmd->add_option("--methods", methods_csv, "override: comma list of methods");
  run_cmd->add_flag("--paper-literal", literal_flag,
                    "evaluate the verbatim-transcribed closed forms");

  auto* cmp_cmd = app.add_subcommand("compare", "compare two result CSVs on matching grids");
  std::string csv_a_path, csv_b_path;
  double rel_tol = 1e-9, abs_tol = 0.0;
  cmp_cmd->add_option("a", csv_a_path, "first results.csv")->required();
  cmp_cmd->add_option("b", csv_b_path, "second results.csv")->required();
  cmp_cmd->add_option("--rel-tol", rel_tol, "relative tolerance (default 1e-9)");
  cmp_cmd->add_option("--abs-tol", abs_tol, "absolute tolerance (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      ScenarioConfig cfg = load_config(config_path);
      if (seed_opt->count() > 0) cfg.sim.seed = seed;
      if (samples_opt->count() > 0) cfg.sim.n_samples = samples;
      if (pt_opt->count() > 0) {
        cfg.sweep.start_dbm = pt_dbm;
        cfg.sweep.stop_dbm = pt_dbm;
      }
      if (methods_opt->count() > 0) cfg.methods = split_csv_list(methods_csv);
      if (literal_flag) cfg.paper_literal = true;
      const RunResult res = run_scenario(cfg);
      const std::string csv_path = write_outputs(res, out_dir);
      std::cout << csv_path << "\n";
      return 0;
    }
    // compare
    auto slurp = [](const std::string& p) {
      std::ifstream in(p, std::ios::binary);
      if (!in) throw ConfigError("cannot open " + p);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const CompareReport rep =
        compare_csv(slurp(csv_a_path), slurp(csv_b_path), rel_tol, abs_tol);
    std::cout << rep.text();
    return rep.grids_match && rep.pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ConstructionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace owc::runner
