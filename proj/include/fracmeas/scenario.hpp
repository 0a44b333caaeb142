#pragma once

#include "fracmeas/io.hpp"
#include "fracmeas/l2_embed.hpp"

namespace fracmeas {

struct GoldenCheck {
  json probe;                 // raw description, echoed into the report
  BorelSet set;
  Vec expected;
  json expected_raw;          // keeps rationals like "5/16" readable
  double tol = 1e-6;
};

// One parsed scenario. Parsing validates everything up front so that running
// can only fail with numerical errors or solver refusals, never schema ones.
struct Scenario {
  std::string name;
  std::string kind;  // h1 | h2 | constant | countable | l2_kernel | norms

  std::optional<MarkovOperator> op;    // h1, h2

  std::optional<ConstantSystem> system;  // constant
  bool cross_check = false;              // also iterate and compare probes

  // countable: a named preset family, truncated before solving.
  std::string preset;  // exp_series | geometric
  Mat preset_matrix;   // P for exp_series, seed for geometric
  double preset_ratio = 0.5;
  double truncate_eps = 1e-12;
  std::optional<VectorMeasure> offset;  // H2 offset term

  std::vector<std::string> kernels;  // l2_kernel
  std::vector<LipMap> maps;
  int Q = 64;
  double mu0_scale = 0.5;
  std::optional<double> golden_alpha, golden_beta;
  double golden_tol = 1e-5;
  double golden_phi_tol = 1e-4;

  std::optional<VectorMeasure> norm_measure;  // norms

  int N = 2187;
  SolveOptions solve;
  std::vector<json> probes;
  std::vector<BorelSet> probe_sets;
  std::vector<GoldenCheck> expect;
};

struct ScenarioResult {
  std::string name;
  bool pass = true;     // all golden checks passed
  bool refused = false;
  std::string message;
};

Scenario parse_scenario(const json& j);
// A config is either a single scenario object or {"spec":1,"scenarios":[..]}.
std::vector<Scenario> parse_config(const json& config);

// Runs one scenario, writing report.json, measure.json, measure.csv and
// trace.csv under out_dir/<name>/.
ScenarioResult run_scenario(const Scenario& s, const std::string& out_dir);

// Parses and runs a whole config file; batches run on up to FM_THREADS
// workers. Returns the process exit code: 0 ok, 1 golden failure, 3 refusal.
// Parse problems throw (the CLI maps them to exit 2).
int run_config_file(const std::string& config_path, const std::string& out_dir);

// The norms report block for one measure, as written by norms scenarios.
nlohmann::ordered_json norms_json(const VectorMeasure& mu, double tol);

}  // namespace fracmeas
