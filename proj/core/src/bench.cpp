#include "qglm/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qglm/baselines.hpp"
#include "qglm/circuit.hpp"
#include "qglm/errors.hpp"
#include "qglm/preprocess.hpp"
#include "qglm/text.hpp"

namespace qglm {

namespace {

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands = {"simulate", "preprocess",
                                                    "train", "bench"};
  return commands;
}

const std::vector<std::string>& known_models() {
  static const std::vector<std::string> models = {"qglm", "glm", "boost",
                                                  "mean"};
  return models;
}

bool contains(const std::vector<std::string>& values,
              const std::string& value) {
  for (const std::string& v : values) {
    if (v == value) return true;
  }
  return false;
}

long long int_value(const std::string& key, const std::string& value) {
  try {
    return parse_int(value);
  } catch (const DataError&) {
    throw UsageError("key '" + key + "': expected an integer, got '" + value +
                     "'");
  }
}

double real_value(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const DataError&) {
    throw UsageError("key '" + key + "': expected a number, got '" + value +
                     "'");
  }
}

std::vector<std::string> model_list(const std::string& value) {
  std::vector<std::string> models;
  for (const std::string& token : split(value, ',')) {
    const std::string name = trim(token);
    if (!contains(known_models(), name)) {
      throw UsageError("key 'models': unknown model '" + name +
                       "' (choose from qglm,glm,boost,mean)");
    }
    models.push_back(name);
  }
  if (models.empty()) {
    throw UsageError("key 'models': expected a comma separated list");
  }
  return models;
}

std::vector<double> coefficient_list(const std::string& value) {
  std::vector<double> coefficients;
  for (const std::string& token : split(value, ',')) {
    coefficients.push_back(real_value("coefficients", trim(token)));
  }
  if (coefficients.empty()) {
    throw UsageError("key 'coefficients': expected a comma separated list");
  }
  return coefficients;
}

void apply_key(RunConfig& config, const std::string& key,
               const std::string& value) {
  if (key == "command") {
    if (!contains(known_commands(), value)) {
      throw UsageError("key 'command': unknown command '" + value +
                       "' (choose from simulate,preprocess,train,bench)");
    }
    config.command = value;
  } else if (key == "data") {
    config.data = value;
  } else if (key == "out") {
    config.out = value;
  } else if (key == "seed") {
    const long long seed = int_value(key, value);
    if (seed < 0) throw UsageError("key 'seed': must be nonnegative");
    config.seed = static_cast<std::uint64_t>(seed);
  } else if (key == "models") {
    config.models = model_list(value);
  } else if (key == "label") {
    config.label = value;
  } else if (key == "format") {
    if (value != "markdown" && value != "csv") {
      throw UsageError("key 'format': expected markdown or csv, got '" +
                       value + "'");
    }
    config.format = value;
  } else if (key == "cutoff") {
    config.cutoff = static_cast<int>(int_value(key, value));
  } else if (key == "encoding_scale") {
    config.encoding_scale = real_value(key, value);
  } else if (key == "lr") {
    config.lr = real_value(key, value);
  } else if (key == "iters") {
    config.iters = static_cast<int>(int_value(key, value));
  } else if (key == "repeats") {
    config.repeats = static_cast<int>(int_value(key, value));
  } else if (key == "n") {
    config.n = static_cast<int>(int_value(key, value));
  } else if (key == "xi") {
    config.xi = real_value(key, value);
  } else if (key == "phi") {
    config.phi = real_value(key, value);
  } else if (key == "coefficients") {
    config.coefficients = coefficient_list(value);
  } else if (key == "noise_features") {
    config.noise_features = static_cast<int>(int_value(key, value));
  } else if (key == "components") {
    config.components = static_cast<int>(int_value(key, value));
  } else if (key == "tsne_perplexity") {
    config.tsne_perplexity = real_value(key, value);
  } else if (key == "tsne_iterations") {
    config.tsne_iterations = static_cast<int>(int_value(key, value));
  } else if (key == "tsne_lr") {
    config.tsne_lr = real_value(key, value);
  } else if (key == "tsne_exaggeration") {
    config.tsne_exaggeration = real_value(key, value);
  } else if (key == "boost_mstop") {
    config.boost_mstop = static_cast<int>(int_value(key, value));
  } else if (key == "boost_shrinkage") {
    config.boost_shrinkage = real_value(key, value);
  } else {
    throw UsageError("unknown key '" + key + "'");
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw UsageError("cannot open config file '" + path + "'");
  }
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const std::size_t eq = content.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config file '" + path + "' line " +
                       std::to_string(line_number) +
                       ": expected 'key = value'");
    }
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) {
      throw UsageError("config file '" + path + "' line " +
                       std::to_string(line_number) + ": empty key");
    }
    apply_key(config, key, value);
  }
}

// CLI flag -> config key; flags listed here are the whole CLI surface.
const char* flag_key(const std::string& flag) {
  if (flag == "--data") return "data";
  if (flag == "--out") return "out";
  if (flag == "--seed") return "seed";
  if (flag == "--models") return "models";
  if (flag == "--repeats") return "repeats";
  if (flag == "--iters") return "iters";
  if (flag == "--lr") return "lr";
  if (flag == "--cutoff") return "cutoff";
  if (flag == "--tsne-perplexity") return "tsne_perplexity";
  if (flag == "--components") return "components";
  return nullptr;
}

std::string join(const std::vector<std::string>& values,
                 const std::string& separator) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += separator;
    out += values[i];
  }
  return out;
}

double mean_prediction_mse(const Eigen::VectorXd& train_scaled,
                           const Eigen::MatrixXd& test_features,
                           const Eigen::VectorXd& test_scaled) {
  const LinearModel model = fit_mean(train_scaled);
  return scaled_mse(model.predict(test_features), test_scaled);
}

// The dataset CSV does not carry the scaler, so refit it from the raw
// targets and verify it reproduces the stored scaled targets.
OutcomeScaler recover_scaler(const Dataset& dataset) {
  const auto matches = [&](const ScaledOutcome& fit) {
    return (fit.scaled - dataset.targets_scaled).cwiseAbs().maxCoeff() <=
           1e-6;
  };
  if (dataset.targets_raw.minCoeff() >= 0.0) {
    const ScaledOutcome log_fit = scale_outcome(dataset.targets_raw);
    if (matches(log_fit)) return log_fit.scaler;
  }
  const ScaledOutcome linear_fit = scale_outcome_linear(dataset.targets_raw);
  if (matches(linear_fit)) return linear_fit.scaler;
  throw DataError(
      "bench: cannot recover the outcome scaler from the dataset targets");
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig config;
  std::size_t start = 0;
  bool command_from_cli = false;
  std::string cli_command;
  if (!args.empty() && !args[0].empty() && args[0].front() != '-') {
    cli_command = args[0];
    if (!contains(known_commands(), cli_command)) {
      throw UsageError("unknown command '" + cli_command +
                       "' (choose from simulate,preprocess,train,bench)");
    }
    command_from_cli = true;
    start = 1;
  }

  // pass 1: config file
  for (std::size_t i = start; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        throw UsageError("flag --config expects a path");
      }
      apply_config_file(config, args[i + 1]);
      ++i;
    }
  }
  // pass 2: the remaining flags override
  for (std::size_t i = start; i < args.size(); ++i) {
    const std::string& flag = args[i];
    if (flag == "--config") {
      ++i;
      continue;
    }
    const char* key = flag_key(flag);
    if (key == nullptr) {
      throw UsageError("unknown flag '" + flag + "'");
    }
    if (i + 1 >= args.size()) {
      throw UsageError("flag " + flag + " expects a value");
    }
    apply_key(config, key, args[i + 1]);
    ++i;
  }
  if (command_from_cli) config.command = cli_command;
  return config;
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  out << "command = " << config.command << "\n";
  out << "data = " << config.data << "\n";
  out << "out = " << config.out << "\n";
  out << "seed = " << config.seed << "\n";
  out << "models = " << join(config.models, ",") << "\n";
  out << "label = " << config.label << "\n";
  out << "format = " << config.format << "\n";
  out << "cutoff = " << config.cutoff << "\n";
  out << "encoding_scale = " << format_g17(config.encoding_scale) << "\n";
  out << "lr = " << format_g17(config.lr) << "\n";
  out << "iters = " << config.iters << "\n";
  out << "repeats = " << config.repeats << "\n";
  out << "n = " << config.n << "\n";
  out << "xi = " << format_g17(config.xi) << "\n";
  out << "phi = " << format_g17(config.phi) << "\n";
  std::vector<std::string> coefficients;
  for (double c : config.coefficients) coefficients.push_back(format_g17(c));
  out << "coefficients = " << join(coefficients, ",") << "\n";
  out << "noise_features = " << config.noise_features << "\n";
  out << "components = " << config.components << "\n";
  out << "tsne_perplexity = " << format_g17(config.tsne_perplexity) << "\n";
  out << "tsne_iterations = " << config.tsne_iterations << "\n";
  out << "tsne_lr = " << format_g17(config.tsne_lr) << "\n";
  out << "tsne_exaggeration = " << format_g17(config.tsne_exaggeration)
      << "\n";
  out << "boost_mstop = " << config.boost_mstop << "\n";
  out << "boost_shrinkage = " << format_g17(config.boost_shrinkage) << "\n";
  return out.str();
}

BenchmarkReport run_benchmark(const RunConfig& config) {
  if (config.data.empty()) {
    throw UsageError("bench: --data <dataset csv> is required");
  }
  const Dataset dataset = read_dataset_csv(config.data);
  if (dataset.train_indices.empty() || dataset.test_indices.empty()) {
    throw DataError("bench: dataset needs a nonempty train and test split");
  }
  const Eigen::MatrixXd train_x = dataset.rows(dataset.train_indices);
  const Eigen::MatrixXd test_x = dataset.rows(dataset.test_indices);
  const Eigen::VectorXd train_scaled = dataset.scaled(dataset.train_indices);
  const Eigen::VectorXd test_scaled = dataset.scaled(dataset.test_indices);
  const Eigen::VectorXd train_raw = dataset.raw(dataset.train_indices);

  BenchmarkReport report;
  report.label = config.label;
  report.config = config;

  for (const std::string& name : config.models) {
    ReportRow row;
    const auto started = std::chrono::steady_clock::now();
    try {
      if (name == "mean") {
        row.algorithm = "Mean";
        row.scaled_mse =
            mean_prediction_mse(train_scaled, test_x, test_scaled);
      } else if (name == "glm") {
        row.algorithm = "Poisson GLM";
        const OutcomeScaler scaler = recover_scaler(dataset);
        const PoissonFit fit = fit_poisson_irls(train_x, train_raw);
        const Eigen::VectorXd raw_preds = fit.model.predict(test_x);
        row.scaled_mse = scaled_mse(scaler.scale(raw_preds), test_scaled);
      } else if (name == "boost") {
        row.algorithm = "Boosted Linear";
        const BoostedModel model =
            fit_boosted_linear(train_x, train_scaled, config.boost_mstop,
                               config.boost_shrinkage);
        row.scaled_mse = scaled_mse(model.predict(test_x), test_scaled);
      } else if (name == "qglm") {
        row.algorithm = "QGLM";
        TrainConfig train_config;
        train_config.cutoff = config.cutoff;
        train_config.encoding_scale = config.encoding_scale;
        train_config.learning_rate = config.lr;
        train_config.iterations = config.iters;
        train_config.repeats = config.repeats;
        train_config.seed = config.seed;
        row.scaled_mse =
            evaluate_repeated(dataset, train_config).mean_test_mse;
      } else {
        throw UsageError("unknown model '" + name + "'");
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    report.computed_rows.push_back(row);
  }

  const auto context = [&](const char* algorithm, double mse) {
    ReportRow row;
    row.algorithm = algorithm;
    row.scaled_mse = mse;
    report.context_rows.push_back(row);
  };
  if (config.label == "simulated") {
    context("Random Forest", 0.80);
    context("BART", 0.78);
    context("DGLARS", 0.81);
    context("Hlasso", 0.81);
  } else if (config.label == "forestfires") {
    context("Random Forest", 0.125);
    context("BART", 0.125);
    context("DGLARS", 0.114);
    context("Hlasso", 0.120);
  }
  return report;
}

std::string render_report(const BenchmarkReport& report,
                          const std::string& format) {
  std::ostringstream out;
  if (format == "markdown") {
    out << "# Benchmark report: " << report.label << "\n";
    if (!report.computed_rows.empty()) {
      out << "\n## Computed\n\n";
      out << "| Algorithm | Scaled Model MSE |\n";
      out << "| --- | --- |\n";
      for (const ReportRow& row : report.computed_rows) {
        if (row.failed) {
          out << "| " << row.algorithm << " | failed: " << row.error
              << " |\n";
        } else {
          out << "| " << row.algorithm << " | "
              << format_fixed(row.scaled_mse, 3) << " |\n";
        }
      }
    }
    if (!report.context_rows.empty()) {
      out << "\n## Paper-reported context\n\n";
      out << "| Algorithm | Scaled Model MSE | Source |\n";
      out << "| --- | --- | --- |\n";
      for (const ReportRow& row : report.context_rows) {
        out << "| " << row.algorithm << " | "
            << format_fixed(row.scaled_mse, 3) << " | paper |\n";
      }
    }
    out << "\n## Config\n\n```\n" << serialize_config(report.config)
        << "```\n";
    return out.str();
  }
  if (format == "csv") {
    out << "algorithm,scaled_mse,source,seconds\n";
    for (const ReportRow& row : report.computed_rows) {
      if (row.failed) {
        out << row.algorithm << ",NA,error," << format_fixed(row.seconds, 3)
            << "\n";
      } else {
        out << row.algorithm << "," << format_fixed(row.scaled_mse, 3)
            << ",computed," << format_fixed(row.seconds, 3) << "\n";
      }
    }
    for (const ReportRow& row : report.context_rows) {
      out << row.algorithm << "," << format_fixed(row.scaled_mse, 3)
          << ",paper,0.000\n";
    }
    return out.str();
  }
  throw UsageError("render_report: format must be markdown or csv");
}

}  // namespace qglm
