#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "nmq/scenario.hpp"

// Precedence: command-line flag, then NMQ_* environment variable, then the config file.
int main(int argc, char** argv) {
  CLI::App app{"Exact non-Markovian dynamics of quadratic fermions with wide-band reservoirs"};
  app.set_version_flag("--version", std::string(nmq::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int threads = 0;
  double tol = 0.0;

  for (nmq::RunKind kind : {nmq::RunKind::evolve, nmq::RunKind::rates, nmq::RunKind::steady, nmq::RunKind::scan,
                            nmq::RunKind::oracle}) {
    static const std::map<nmq::RunKind, const char*> about{
        {nmq::RunKind::evolve, "Integrate chi(t) and record rates along the way"},
        {nmq::RunKind::rates, "Decoherence rates and jump-mode labels on a time grid"},
        {nmq::RunKind::steady, "Steady state, its rates and correlation profile"},
        {nmq::RunKind::scan, "Steady-state summaries over a 2-D parameter grid"},
        {nmq::RunKind::oracle, "Compare with a finite discretized bath"}};
    auto* sub = app.add_subcommand(nmq::to_string(kind), about.at(kind));
    sub->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--threads", threads, "Worker threads for scans")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "Relative integration tolerance")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : nmq::kExitConfig;
  }

  nmq::RunOverrides ov = nmq::overrides_from_env();
  if (!out.empty()) ov.out = out;
  if (threads > 0) ov.threads = threads;
  if (tol > 0.0) ov.tol = tol;

  auto* sub = app.get_subcommands().front();
  nmq::RunKind kind = *nmq::parse_run_kind(sub->get_name());
  return nmq::run_scenario(kind, config, ov, std::cerr);
}
