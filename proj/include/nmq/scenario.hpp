#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmq/models.hpp"
#include "nmq/oracle.hpp"

namespace nmq {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunKind { evolve, rates, steady, scan, oracle };
std::string to_string(RunKind k);
std::optional<RunKind> parse_run_kind(const std::string& s);

struct GenericReservoirConfig {
  std::filesystem::path gamma;  // n x n particle block
  double T = 0.0;
  double mu = 0.0;
};

struct ModelConfig {
  std::string type;  // tight_binding | xy | generic
  TightBindingSpec tb;
  XYSpec xy;
  std::filesystem::path h, delta;
  std::vector<GenericReservoirConfig> reservoirs;
};

struct AxisConfig {
  std::string param;
  std::vector<double> values;
};

struct ScenarioConfig {
  std::optional<RunKind> run;
  ModelConfig model;
  InitialStateSpec initial;
  std::vector<double> times;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double zero_threshold = 1e-10;
  double steady_tol = 1e-10;
  std::optional<AxisConfig> x, y;
  int max_points = 10000;
  DiscretizedBath bath;
  std::filesystem::path output_dir = "out";
  bool dump_matrices = true;
  int threads = 1;
  std::string hash;
};

// Unknown keys and non-finite physical parameters raise ConfigError.
ScenarioConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 of the compact JSON dump, hex.
std::string config_hash(const nlohmann::json& j);

QuadraticModel build_model(const ModelConfig& m);
void apply_parameter(ModelConfig& m, const std::string& name, double value);
int chain_length(const ModelConfig& m);

struct RunOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  std::optional<double> tol;
};

// NMQ_OUT, NMQ_THREADS, NMQ_TOL
RunOverrides overrides_from_env();

struct SteadyRow {
  std::string status = "ok";
  double f_nm = 0.0;
  double j_e = 0.0;
  std::string decay_kind = "undetermined";
  double decay_exponent = 0.0;
  double decay_length = 0.0;
  double min_gap = 0.0;
  double residual = 0.0;
  std::string message;
};

// Steady-state summary of one model: f_nM of N_inf, middle-bond energy current, decay class.
SteadyRow evaluate_steady(const ModelConfig& m, double zero_threshold, double steady_tol);

int run_scenario(RunKind kind, const std::filesystem::path& config_path, const RunOverrides& ov,
                 std::ostream& log);

}  // namespace nmq
