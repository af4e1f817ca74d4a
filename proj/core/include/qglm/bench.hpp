#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qglm {

// Everything the CLI can configure, with the documented defaults. Config
// files are line-based `key = value` with `#` comments; CLI flags override
// file keys, file keys override defaults.
struct RunConfig {
  std::string command = "bench";  // simulate | preprocess | train | bench
  std::string data;               // input dataset / raw CSV path
  std::string out;                // output path
  std::uint64_t seed = 1;
  std::vector<std::string> models = {"qglm", "glm", "boost", "mean"};
  std::string label = "simulated";
  std::string format = "markdown";  // report format: markdown | csv

  // circuit training
  int cutoff = 10;
  double encoding_scale = 0.5;
  double lr = 0.1;
  int iters = 80;
  int repeats = 10;

  // simulation
  int n = 1000;
  double xi = 1.0;
  double phi = 8.0;
  std::vector<double> coefficients = {0.5, 0.3, -0.4};
  int noise_features = 1;

  // preprocessing
  int components = 4;
  double tsne_perplexity = 30.0;
  int tsne_iterations = 1000;
  double tsne_lr = 200.0;
  double tsne_exaggeration = 12.0;

  // boosting baseline
  int boost_mstop = 100;
  double boost_shrinkage = 0.1;

  bool operator==(const RunConfig&) const = default;
};

// args = CLI tokens after the program name: an optional leading subcommand,
// then --flag value pairs. --config <path> loads a config file first.
RunConfig parse_config(const std::vector<std::string>& args);

// Inverse of the config-file syntax: parse_config on the result (as file
// content) reproduces the config exactly.
std::string serialize_config(const RunConfig& config);

struct ReportRow {
  std::string algorithm;
  double scaled_mse = 0.0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct BenchmarkReport {
  std::string label;
  std::vector<ReportRow> computed_rows;
  // Literature values for models this artifact does not implement; rendered
  // in a separate section flagged source=paper.
  std::vector<ReportRow> context_rows;
  RunConfig config;
};

// Fits every requested model on the train split and scores scaled MSE on
// the test split. A model failure becomes an explicit error row and the
// remaining models still run.
BenchmarkReport run_benchmark(const RunConfig& config);

// format: markdown (deterministic, no timings) or csv (adds source and
// wall-clock seconds columns).
std::string render_report(const BenchmarkReport& report,
                          const std::string& format);

}  // namespace qglm
