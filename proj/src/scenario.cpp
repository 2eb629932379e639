#include "nmq/scenario.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "nmq/io.hpp"
#include "nmq/observables.hpp"
#include "nmq/steadystate.hpp"

namespace nmq {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(RunKind k) {
  switch (k) {
    case RunKind::evolve: return "evolve";
    case RunKind::rates: return "rates";
    case RunKind::steady: return "steady";
    case RunKind::scan: return "scan";
    case RunKind::oracle: return "oracle";
  }
  return "";
}

std::optional<RunKind> parse_run_kind(const std::string& s) {
  for (RunKind k : {RunKind::evolve, RunKind::rates, RunKind::steady, RunKind::scan, RunKind::oracle})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

int integer(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<int>();
}

// Temperatures accept a number >= 0 or the string "inf".
double temperature(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") return kInf;
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number or \"inf\"");
  double t = v.get<double>();
  if (!std::isfinite(t) || t < 0.0) throw ConfigError(where + "." + key + " must be finite and >= 0");
  return t;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

ModelConfig parse_model(const json& j, const fs::path& base) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ConfigError("model.type is required (tight_binding | xy | generic)");
  ModelConfig m;
  m.type = j.at("type").get<std::string>();
  if (m.type == "tight_binding") {
    check_keys(j, {"type", "M", "hopping", "Gamma_L", "Gamma_R", "T_L", "T_R", "mu_L", "mu_R"}, "model");
    auto& s = m.tb;
    s.M = integer(j, "M", s.M, "model");
    s.hopping = number(j, "hopping", s.hopping, "model");
    s.Gamma_L = number(j, "Gamma_L", s.Gamma_L, "model");
    s.Gamma_R = number(j, "Gamma_R", s.Gamma_R, "model");
    s.T_L = temperature(j, "T_L", s.T_L, "model");
    s.T_R = temperature(j, "T_R", s.T_R, "model");
    s.mu_L = number(j, "mu_L", s.mu_L, "model");
    s.mu_R = number(j, "mu_R", s.mu_R, "model");
  } else if (m.type == "xy") {
    check_keys(j, {"type", "M", "J_c", "gamma_c", "h_c", "Delta_h", "Gamma_L", "Gamma_R", "T_L", "T_R"}, "model");
    auto& s = m.xy;
    s.M = integer(j, "M", s.M, "model");
    s.J_c = number(j, "J_c", s.J_c, "model");
    s.gamma_c = number(j, "gamma_c", s.gamma_c, "model");
    s.h_c = number(j, "h_c", s.h_c, "model");
    s.Delta_h = number(j, "Delta_h", s.Delta_h, "model");
    s.Gamma_L = number(j, "Gamma_L", s.Gamma_L, "model");
    s.Gamma_R = number(j, "Gamma_R", s.Gamma_R, "model");
    s.T_L = temperature(j, "T_L", s.T_L, "model");
    s.T_R = temperature(j, "T_R", s.T_R, "model");
  } else if (m.type == "generic") {
    check_keys(j, {"type", "h", "delta", "reservoirs"}, "model");
    if (!j.contains("h") || !j.at("h").is_string()) throw ConfigError("model.h must be a matrix file path");
    m.h = resolve(base, j.at("h").get<std::string>());
    if (j.contains("delta")) {
      if (!j.at("delta").is_string()) throw ConfigError("model.delta must be a matrix file path");
      m.delta = resolve(base, j.at("delta").get<std::string>());
    }
    if (j.contains("reservoirs")) {
      if (!j.at("reservoirs").is_array()) throw ConfigError("model.reservoirs must be an array");
      for (const auto& r : j.at("reservoirs")) {
        check_keys(r, {"gamma", "T", "mu"}, "model.reservoirs[]");
        if (!r.contains("gamma") || !r.at("gamma").is_string())
          throw ConfigError("model.reservoirs[].gamma must be a matrix file path");
        m.reservoirs.push_back({resolve(base, r.at("gamma").get<std::string>()),
                                temperature(r, "T", 0.0, "model.reservoirs[]"),
                                number(r, "mu", 0.0, "model.reservoirs[]")});
      }
    }
  } else {
    throw ConfigError("unknown model.type '" + m.type + "'");
  }
  return m;
}

AxisConfig parse_axis(const json& j, const std::string& where) {
  check_keys(j, {"param", "values", "start", "stop", "count", "spacing"}, where);
  if (!j.contains("param") || !j.at("param").is_string()) throw ConfigError(where + ".param is required");
  AxisConfig a;
  a.param = j.at("param").get<std::string>();
  if (j.contains("values")) {
    if (j.contains("start") || j.contains("stop") || j.contains("count"))
      throw ConfigError(where + ": give either values or start/stop/count");
    if (!j.at("values").is_array()) throw ConfigError(where + ".values must be an array");
    for (const auto& v : j.at("values")) {
      if (!v.is_number() || !std::isfinite(v.get<double>()))
        throw ConfigError(where + ".values must be finite numbers");
      a.values.push_back(v.get<double>());
    }
  } else {
    double start = number(j, "start", NAN, where), stop = number(j, "stop", NAN, where);
    int count = integer(j, "count", 0, where);
    if (std::isnan(start) || std::isnan(stop) || count < 1)
      throw ConfigError(where + " needs values or start, stop and count >= 1");
    std::string spacing = j.value("spacing", std::string("linear"));
    if (spacing != "linear" && spacing != "log") throw ConfigError(where + ".spacing must be linear or log");
    if (spacing == "log" && !(start > 0 && stop > 0)) throw ConfigError(where + ": log spacing needs positive bounds");
    for (int k = 0; k < count; ++k) {
      double f = count == 1 ? 0.0 : double(k) / (count - 1);
      a.values.push_back(spacing == "log" ? start * std::pow(stop / start, f) : start + (stop - start) * f);
    }
  }
  if (a.values.empty()) throw ConfigError(where + " has no values");
  return a;
}

}  // namespace

std::string config_hash(const json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

ScenarioConfig parse_config(const json& j, const fs::path& base) {
  check_keys(j, {"schema_version", "run", "model", "initial_state", "time_grid", "tolerances", "scan", "oracle",
                 "output", "threads"},
             "config");
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer())
    throw ConfigError("config.schema_version is required");
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + j.at("schema_version").dump());
  ScenarioConfig c;
  c.hash = config_hash(j);
  if (j.contains("run")) {
    if (!j.at("run").is_string()) throw ConfigError("config.run must be a string");
    c.run = parse_run_kind(j.at("run").get<std::string>());
    if (!c.run) throw ConfigError("unknown run kind '" + j.at("run").get<std::string>() + "'");
  }
  if (!j.contains("model")) throw ConfigError("config.model is required");
  c.model = parse_model(j.at("model"), base);

  if (j.contains("initial_state")) {
    const json& s = j.at("initial_state");
    check_keys(s, {"kind", "T", "mu"}, "initial_state");
    std::string kind = s.value("kind", std::string("vacuum"));
    if (kind == "vacuum") c.initial.kind = InitialKind::vacuum;
    else if (kind == "filled") c.initial.kind = InitialKind::filled;
    else if (kind == "infinite_temperature") c.initial.kind = InitialKind::infinite_temperature;
    else if (kind == "thermal") c.initial.kind = InitialKind::thermal;
    else throw ConfigError("unknown initial_state.kind '" + kind + "'");
    c.initial.beta = beta_from_temperature(temperature(s, "T", 1.0, "initial_state"));
    c.initial.mu = number(s, "mu", 0.0, "initial_state");
  }

  if (j.contains("time_grid")) {
    const json& g = j.at("time_grid");
    check_keys(g, {"times", "t_max", "n_log", "n_lin", "t_min", "t_split"}, "time_grid");
    if (g.contains("times")) {
      if (!g.at("times").is_array()) throw ConfigError("time_grid.times must be an array");
      for (const auto& v : g.at("times")) {
        if (!v.is_number() || !std::isfinite(v.get<double>()) || v.get<double>() < 0)
          throw ConfigError("time_grid.times must be finite non-negative numbers");
        c.times.push_back(v.get<double>());
      }
      for (std::size_t k = 1; k < c.times.size(); ++k)
        if (!(c.times[k] > c.times[k - 1])) throw ConfigError("time_grid.times must be increasing");
    } else {
      double t_max = number(g, "t_max", NAN, "time_grid");
      if (!(t_max > 0)) throw ConfigError("time_grid needs times or t_max > 0");
      try {
        c.times = hybrid_time_grid(t_max, integer(g, "n_log", 20, "time_grid"), integer(g, "n_lin", 100, "time_grid"),
                                   number(g, "t_min", 1e-3, "time_grid"), number(g, "t_split", -1.0, "time_grid"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("time_grid: ") + e.what());
      }
    }
  }

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    check_keys(t, {"rel", "abs", "zero_threshold", "steady"}, "tolerances");
    c.rel_tol = number(t, "rel", c.rel_tol, "tolerances");
    c.abs_tol = number(t, "abs", c.abs_tol, "tolerances");
    c.zero_threshold = number(t, "zero_threshold", c.zero_threshold, "tolerances");
    c.steady_tol = number(t, "steady", c.steady_tol, "tolerances");
    if (!(c.rel_tol > 0 && c.abs_tol > 0 && c.zero_threshold >= 0 && c.steady_tol > 0))
      throw ConfigError("tolerances must be positive");
  }

  if (j.contains("scan")) {
    const json& s = j.at("scan");
    check_keys(s, {"x", "y", "max_points"}, "scan");
    if (!s.contains("x")) throw ConfigError("scan.x is required");
    c.x = parse_axis(s.at("x"), "scan.x");
    if (s.contains("y")) c.y = parse_axis(s.at("y"), "scan.y");
    c.max_points = integer(s, "max_points", c.max_points, "scan");
  }

  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    check_keys(o, {"levels", "bandwidth"}, "oracle");
    c.bath.levels = integer(o, "levels", c.bath.levels, "oracle");
    c.bath.bandwidth = number(o, "bandwidth", c.bath.bandwidth, "oracle");
    if (c.bath.levels < 1 || !(c.bath.bandwidth > 0)) throw ConfigError("oracle needs levels >= 1, bandwidth > 0");
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"directory", "dump_matrices"}, "output");
    if (o.contains("directory")) {
      if (!o.at("directory").is_string()) throw ConfigError("output.directory must be a string");
      c.output_dir = o.at("directory").get<std::string>();
    }
    if (o.contains("dump_matrices")) {
      if (!o.at("dump_matrices").is_boolean()) throw ConfigError("output.dump_matrices must be a boolean");
      c.dump_matrices = o.at("dump_matrices").get<bool>();
    }
  }
  c.threads = integer(j, "threads", c.threads, "config");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  return c;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

QuadraticModel build_model(const ModelConfig& m) {
  if (m.type == "tight_binding") return tight_binding_chain(m.tb);
  if (m.type == "xy") return xy_chain(m.xy);
  CMatrix h = read_matrix_csv(m.h);
  CMatrix d = m.delta.empty() ? CMatrix::Zero(h.rows(), h.cols()) : read_matrix_csv(m.delta);
  HamiltonianMatrix hc = build_hamiltonian(h, d);
  std::vector<Reservoir> res;
  for (const auto& r : m.reservoirs) {
    CMatrix g = read_matrix_csv(r.gamma);
    if (g.rows() != h.rows() || g.cols() != h.cols())
      throw std::invalid_argument("reservoir matrix " + r.gamma.string() + " has the wrong size");
    res.push_back(make_reservoir(HybridizationMatrix::particle(g), beta_from_temperature(r.T), r.mu));
  }
  return QuadraticModel(std::move(hc), std::move(res));
}

int chain_length(const ModelConfig& m) {
  if (m.type == "tight_binding") return m.tb.M;
  if (m.type == "xy") return m.xy.M;
  return -1;
}

void apply_parameter(ModelConfig& m, const std::string& name, double v) {
  if (m.type == "tight_binding") {
    auto& s = m.tb;
    if (name == "V") {
      s.mu_L = 0.5 * v;
      s.mu_R = -0.5 * v;
    } else if (name == "T") s.T_L = s.T_R = v;
    else if (name == "T_L") s.T_L = v;
    else if (name == "T_R") s.T_R = v;
    else if (name == "mu_L") s.mu_L = v;
    else if (name == "mu_R") s.mu_R = v;
    else if (name == "Gamma_L") s.Gamma_L = v;
    else if (name == "Gamma_R") s.Gamma_R = v;
    else throw ConfigError("scan parameter '" + name + "' is not available for tight_binding");
  } else if (m.type == "xy") {
    auto& s = m.xy;
    if (name == "h_c") s.h_c = v;
    else if (name == "Delta_h") s.Delta_h = v;
    else if (name == "gamma_c") s.gamma_c = v;
    else if (name == "T") s.T_L = s.T_R = v;
    else if (name == "T_L") s.T_L = v;
    else if (name == "T_R") s.T_R = v;
    else if (name == "Gamma_L") s.Gamma_L = v;
    else if (name == "Gamma_R") s.Gamma_R = v;
    else throw ConfigError("scan parameter '" + name + "' is not available for xy");
  } else {
    throw ConfigError("scans need a tight_binding or xy model");
  }
}

RunOverrides overrides_from_env() {
  RunOverrides ov;
  if (const char* s = std::getenv("NMQ_OUT"); s && *s) ov.out = fs::path(s);
  if (const char* s = std::getenv("NMQ_THREADS"); s && *s) ov.threads = std::atoi(s);
  if (const char* s = std::getenv("NMQ_TOL"); s && *s) ov.tol = std::strtod(s, nullptr);
  return ov;
}

namespace {

struct SteadyDetails {
  SteadyStateResult ss;
  RateDecomposition rd;
  std::vector<double> profile;
  SteadyRow row;
  double condition = 0.0;
};

double middle_energy_current(const ModelConfig& m, const QuadraticModel& model, const CMatrix& chi) {
  const int M = model.modes();
  const int mid = M / 2;
  if (m.type == "xy") {
    if (mid < 1 || mid > M - 2) return NAN;
    return quadratic_expectation(chi, energy_current_xy(m.xy, mid));
  }
  if (mid < 1) return NAN;
  const HamiltonianMatrix& h = model.hamiltonian();
  // same orientation as the explicit XY current, which equals bc.left for Sigma = [mid, M-1]
  BoundaryCurrents bc = boundary_current(h, {mid, M - 1}, QuadraticObservable(h.matrix(), "H"));
  return quadratic_expectation(chi, bc.left);
}

SteadyDetails compute_steady(const ModelConfig& m, double zero_threshold, double steady_tol) {
  QuadraticModel model = build_model(m);
  OpenSystem system(model);
  SteadyDetails d{steady_chi(system, steady_tol), {}, {}, {}, system.spectrum().condition()};
  d.rd = rate_decomposition(d.ss.n_inf, zero_threshold);
  const CMatrix& chi = d.ss.chi_inf.matrix();
  d.row.f_nm = non_markovianity(d.rd);
  d.row.min_gap = d.ss.min_gap;
  d.row.residual = d.ss.residual;
  d.row.j_e = middle_energy_current(m, model, chi);
  if (model.modes() >= 4) {
    d.profile = correlation_profile(chi);
    try {
      DecayFit fit = classify_decay(d.profile, DecayOptions::for_chain(model.modes()));
      d.row.decay_kind = to_string(fit.kind);
      d.row.decay_exponent = fit.exponent;
      d.row.decay_length = fit.length;
    } catch (const InsufficientPointsError&) {
    }
  }
  return d;
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

const char* kSteadyHeader = "f_nM,J_e,decay_kind,decay_exponent,decay_length,min_gap,residual,status";

std::string steady_fields(const SteadyRow& r) {
  std::ostringstream os;
  os << format_double(r.f_nm) << ',' << format_double(r.j_e) << ',' << r.decay_kind << ','
     << format_double(r.decay_exponent) << ',' << format_double(r.decay_length) << ',' << format_double(r.min_gap)
     << ',' << format_double(r.residual) << ',' << r.status;
  return os.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

struct RunContext {
  ScenarioConfig cfg;
  RunKind kind;
  fs::path config_path;
  fs::path out;
  int threads = 1;
  json outputs = json::array();
  json invariants = json::object();
  std::ostream* log = nullptr;
};

void write_manifest(const RunContext& ctx, const std::string& status, const std::string& message) {
  json m;
  m["schema_version"] = kSchemaVersion;
  m["program"] = "nmq";
  m["version"] = kVersion;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["compiler"] = __VERSION__;
  m["run"] = to_string(ctx.kind);
  m["config"] = ctx.config_path.string();
  m["config_hash"] = ctx.cfg.hash;
  m["tolerances"] = {{"rel", ctx.cfg.rel_tol},
                     {"abs", ctx.cfg.abs_tol},
                     {"zero_threshold", ctx.cfg.zero_threshold},
                     {"steady", ctx.cfg.steady_tol}};
  m["outputs"] = ctx.outputs;
  m["invariants"] = ctx.invariants;
  m["status"] = status;
  if (!message.empty()) m["message"] = message;
  std::ofstream os = open_out(ctx.out / "manifest.json");
  os << m.dump(2) << '\n';
}

void run_evolve(RunContext& ctx) {
  const auto& c = ctx.cfg;
  if (c.times.empty()) throw ConfigError("evolve needs a time_grid");
  QuadraticModel model = build_model(c.model);
  OpenSystem system(model);
  CorrelationMatrix chi0 = gaussian_initial_state(c.initial, model.hamiltonian());
  EvolveOptions opt;
  opt.rel_tol = c.rel_tol;
  opt.abs_tol = c.abs_tol;
  Trajectory traj = evolve_chi(system, chi0, c.times, opt);

  std::vector<RateRow> rows = rate_trace(system, c.times, c.zero_threshold);
  {
    std::ofstream os = open_out(ctx.out / "rates.csv");
    write_rate_csv(os, rows, system.dim());
  }
  ctx.outputs.push_back("rates.csv");

  InvariantReport worst;
  fs::create_directories(ctx.out / "trajectory");
  std::ofstream index = open_out(ctx.out / "trajectory" / "index.csv");
  index << "k,t,file,hermiticity,particle_hole,trace,spectrum_below,spectrum_above\n";
  for (std::size_t k = 0; k < traj.points.size(); ++k) {
    const auto& p = traj.points[k];
    char name[32];
    std::snprintf(name, sizeof name, "chi_%05zu.csv", k);
    if (c.dump_matrices) write_matrix_csv(ctx.out / "trajectory" / name, p.chi);
    const auto& d = p.defects;
    index << k << ',' << format_double(p.t) << ',' << (c.dump_matrices ? name : "") << ','
          << format_double(d.hermiticity) << ',' << format_double(d.particle_hole) << ',' << format_double(d.trace)
          << ',' << format_double(d.spectrum_below) << ',' << format_double(d.spectrum_above) << '\n';
    worst.hermiticity = std::max(worst.hermiticity, d.hermiticity);
    worst.particle_hole = std::max(worst.particle_hole, d.particle_hole);
    worst.trace = std::max(worst.trace, d.trace);
    worst.spectrum_below = std::max(worst.spectrum_below, d.spectrum_below);
    worst.spectrum_above = std::max(worst.spectrum_above, d.spectrum_above);
  }
  ctx.outputs.push_back("trajectory/index.csv");
  ctx.invariants = {{"hermiticity", worst.hermiticity},
                    {"particle_hole", worst.particle_hole},
                    {"trace", worst.trace},
                    {"spectrum_below", worst.spectrum_below},
                    {"spectrum_above", worst.spectrum_above},
                    {"worst_step_defect", traj.worst_step_defect},
                    {"accepted_steps", traj.accepted_steps},
                    {"rejected_steps", traj.rejected_steps},
                    {"condition_K", system.spectrum().condition()}};
}

void run_rates(RunContext& ctx) {
  const auto& c = ctx.cfg;
  if (c.times.empty()) throw ConfigError("rates needs a time_grid");
  OpenSystem system(build_model(c.model));
  std::vector<RateRow> rows;
  std::ofstream modes = open_out(ctx.out / "modes.csv");
  modes << "t,l,gamma,label,particle_weight,left_weight\n";
  double worst_qk = 0.0, worst_herm = 0.0;
  for (double t : c.times) {
    double herm = 0.0;
    CMatrix n = system.noise(t, &herm);
    worst_herm = std::max(worst_herm, herm);
    worst_qk = std::max(worst_qk, 0.5 * max_abs(n + ph_conjugate(n) - 2.0 * system.gamma()));
    RateDecomposition rd = rate_decomposition(n, c.zero_threshold);
    rows.push_back({t, rd.rates, non_markovianity(rd)});
    for (int l = 0; l < rd.size(); ++l) {
      if (std::abs(rd.rates(l)) < c.zero_threshold) continue;
      ModeLabel lab = label_mode(rd.modes.col(l));
      modes << format_double(t) << ',' << l + 1 << ',' << format_double(rd.rates(l)) << ',' << lab.name() << ','
            << format_double(lab.particle_weight) << ',' << format_double(lab.left_weight) << '\n';
    }
  }
  std::ofstream os = open_out(ctx.out / "rates.csv");
  write_rate_csv(os, rows, system.dim());
  ctx.outputs = {"rates.csv", "modes.csv"};
  ctx.invariants = {{"noise_hermiticity", worst_herm},
                    {"q_equals_k_defect", worst_qk},
                    {"condition_K", system.spectrum().condition()}};
}

void run_steady(RunContext& ctx) {
  const auto& c = ctx.cfg;
  SteadyDetails d = compute_steady(c.model, c.zero_threshold, c.steady_tol);
  write_matrix_csv(ctx.out / "chi_inf.csv", d.ss.chi_inf.matrix());
  write_matrix_csv(ctx.out / "n_inf.csv", d.ss.n_inf);
  {
    std::ofstream os = open_out(ctx.out / "steady.csv");
    os << kSteadyHeader << '\n' << steady_fields(d.row) << '\n';
  }
  {
    std::ofstream os = open_out(ctx.out / "rates_inf.csv");
    os << "l,gamma,label\n";
    for (int l = 0; l < d.rd.size(); ++l)
      os << l + 1 << ',' << format_double(d.rd.rates(l)) << ','
         << (std::abs(d.rd.rates(l)) < c.zero_threshold ? "null" : label_mode(d.rd.modes.col(l)).name()) << '\n';
  }
  ctx.outputs = {"steady.csv", "chi_inf.csv", "n_inf.csv", "rates_inf.csv"};
  if (!d.profile.empty()) {
    std::ofstream os = open_out(ctx.out / "profile.csv");
    os << "r,C_bar_r\n";
    for (std::size_t r = 0; r < d.profile.size(); ++r) os << r << ',' << format_double(d.profile[r]) << '\n';
    ctx.outputs.push_back("profile.csv");
  }
  InvariantReport inv = check_invariants(d.ss.chi_inf.matrix());
  ctx.invariants = {{"residual", d.ss.residual},
                    {"min_gap", d.ss.min_gap},
                    {"condition_K", d.condition},
                    {"chi_defect", inv.worst()}};
}

void run_scan(RunContext& ctx) {
  const auto& c = ctx.cfg;
  if (!c.x) throw ConfigError("scan needs scan.x");
  struct Point {
    int index;
    double x, y;
  };
  std::vector<Point> points;
  const std::vector<double> ys = c.y ? c.y->values : std::vector<double>{NAN};
  for (double x : c.x->values)
    for (double y : ys) points.push_back({static_cast<int>(points.size()), x, y});
  if (static_cast<int>(points.size()) > c.max_points)
    throw ConfigError("scan has " + std::to_string(points.size()) + " points, above max_points " +
                      std::to_string(c.max_points));
  {
    // Fail early on parameters the model does not have.
    ModelConfig probe = c.model;
    apply_parameter(probe, c.x->param, c.x->values.front());
    if (c.y) apply_parameter(probe, c.y->param, c.y->values.front());
  }

  const std::string header = "x,y," + std::string(kSteadyHeader) + ",index,message";
  const fs::path file = ctx.out / "scan.csv";
  std::set<int> done;
  std::vector<std::string> kept;
  if (fs::exists(file)) {
    std::ifstream is(file);
    std::string line;
    if (std::getline(is, line) && line == header) {
      const std::size_t columns = std::count(header.begin(), header.end(), ',') + 1;
      while (std::getline(is, line)) {
        if (static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1) != columns) break;
        // index is the second-to-last column
        std::size_t last = line.rfind(',');
        std::size_t prev = line.rfind(',', last - 1);
        int idx = std::atoi(line.substr(prev + 1, last - prev - 1).c_str());
        if (idx < 0 || idx >= static_cast<int>(points.size()) || done.count(idx)) break;
        done.insert(idx);
        kept.push_back(line);
      }
    }
  }
  std::ofstream os = open_out(file);
  os << header << '\n';
  for (const auto& l : kept) os << l << '\n';
  os.flush();
  if (!done.empty()) *ctx.log << "resuming scan: " << done.size() << " of " << points.size() << " points done\n";

  std::vector<Point> todo;
  for (const auto& p : points)
    if (!done.count(p.index)) todo.push_back(p);

  std::mutex mu;
  std::map<std::size_t, std::string> ready;
  std::size_t next_to_write = 0;
  std::atomic<std::size_t> next{0};
  int failures = 0;
  auto worker = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      const Point& p = todo[k];
      SteadyRow row;
      try {
        ModelConfig m = c.model;
        apply_parameter(m, c.x->param, p.x);
        if (c.y) apply_parameter(m, c.y->param, p.y);
        row = compute_steady(m, c.zero_threshold, c.steady_tol).row;
      } catch (const std::exception& e) {
        row = SteadyRow{};
        row.status = "error";
        row.f_nm = row.j_e = row.min_gap = row.residual = NAN;
        row.message = csv_safe(e.what());
      }
      std::ostringstream line;
      line << format_double(p.x) << ',' << (c.y ? format_double(p.y) : std::string()) << ',' << steady_fields(row)
           << ',' << p.index << ',' << row.message;
      std::lock_guard<std::mutex> lock(mu);
      if (row.status != "ok") ++failures;
      ready[k] = line.str();
      // rows go out in grid order so reruns and resumed runs give identical files
      while (ready.count(next_to_write)) {
        os << ready[next_to_write] << '\n';
        ready.erase(next_to_write);
        ++next_to_write;
      }
      os.flush();
    }
  };
  const int nthreads = std::max(1, std::min<int>(ctx.threads, static_cast<int>(todo.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  ctx.outputs = {"scan.csv"};
  ctx.invariants = {{"points", points.size()},
                    {"computed", todo.size()},
                    {"resumed", done.size()},
                    {"failed_in_this_run", failures}};
}

void run_oracle(RunContext& ctx) {
  const auto& c = ctx.cfg;
  if (c.times.empty()) throw ConfigError("oracle needs a time_grid");
  QuadraticModel model = build_model(c.model);
  CorrelationMatrix chi0 = gaussian_initial_state(c.initial, model.hamiltonian());
  EvolveOptions opt;
  opt.rel_tol = c.rel_tol;
  opt.abs_tol = c.abs_tol;
  BathBenchmarkResult r = bath_benchmark(model, chi0, c.bath, c.times, opt);
  std::ofstream os = open_out(ctx.out / "deviation.csv");
  os << "t,max_abs_deviation\n";
  for (std::size_t k = 0; k < r.t.size(); ++k)
    os << format_double(r.t[k]) << ',' << format_double(r.deviation[k]) << '\n';
  if (r.recurrence_warning)
    *ctx.log << "warning: t_max exceeds half the bath recurrence time " << r.recurrence_time << '\n';
  ctx.outputs = {"deviation.csv"};
  ctx.invariants = {{"max_deviation", r.max_deviation()},
                    {"recurrence_time", r.recurrence_time},
                    {"recurrence_warning", r.recurrence_warning},
                    {"total_modes", r.total_modes}};
}

}  // namespace

SteadyRow evaluate_steady(const ModelConfig& m, double zero_threshold, double steady_tol) {
  return compute_steady(m, zero_threshold, steady_tol).row;
}

int run_scenario(RunKind kind, const fs::path& config_path, const RunOverrides& ov, std::ostream& log) {
  RunContext ctx;
  ctx.kind = kind;
  ctx.config_path = config_path;
  ctx.log = &log;
  try {
    ctx.cfg = load_config(config_path);
    if (ctx.cfg.run && *ctx.cfg.run != kind)
      throw ConfigError("config declares run '" + to_string(*ctx.cfg.run) + "' but '" + to_string(kind) +
                        "' was requested");
    if (ov.tol) {
      if (!(*ov.tol > 0) || !std::isfinite(*ov.tol)) throw ConfigError("--tol must be positive");
      ctx.cfg.rel_tol = *ov.tol;
    }
    ctx.threads = ctx.cfg.threads;
    if (ov.threads) {
      if (*ov.threads < 1) throw ConfigError("--threads must be >= 1");
      ctx.threads = *ov.threads;
    }
    ctx.out = ov.out ? *ov.out : ctx.cfg.output_dir;
    if (ctx.out.is_relative() && !ov.out) ctx.out = config_path.parent_path() / ctx.out;
    try {
      build_model(ctx.cfg.model);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid model: ") + e.what());
    } catch (const SymmetryError& e) {
      throw ConfigError(std::string("invalid model: ") + e.what());
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    fs::create_directories(ctx.out);
  } catch (const std::exception& e) {
    log << "cannot create output directory: " << e.what() << '\n';
    return kExitNumerical;
  }
  try {
    switch (kind) {
      case RunKind::evolve: run_evolve(ctx); break;
      case RunKind::rates: run_rates(ctx); break;
      case RunKind::steady: run_steady(ctx); break;
      case RunKind::scan: run_scan(ctx); break;
      case RunKind::oracle: run_oracle(ctx); break;
    }
    write_manifest(ctx, "ok", "");
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "numerical failure: " << e.what() << '\n';
    try {
      std::ofstream diag(ctx.out / "diagnostic.txt");
      diag << "run: " << to_string(kind) << "\nconfig: " << config_path.string() << "\nerror: " << e.what() << '\n';
      write_manifest(ctx, "failed", e.what());
    } catch (...) {
    }
    return kExitNumerical;
  }
  log << to_string(kind) << " finished, outputs in " << ctx.out.string() << '\n';
  return kExitOk;
}

}  // namespace nmq
