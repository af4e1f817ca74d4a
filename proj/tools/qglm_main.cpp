#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "qglm/bench.hpp"
#include "qglm/baselines.hpp"
#include "qglm/circuit.hpp"
#include "qglm/dataset.hpp"
#include "qglm/errors.hpp"
#include "qglm/preprocess.hpp"
#include "qglm/text.hpp"
#include "qglm/tweedie.hpp"

namespace {

constexpr const char* kUsage =
    R"(usage: qglm <command> [flags]

commands:
  simulate    generate a synthetic Tweedie dataset     (needs --out)
  preprocess  Forest Fires CSV -> modeling dataset      (needs --data, --out)
  train       train one QGLM on a dataset               (needs --data)
  bench       fit the requested models and report MSEs  (needs --data)

flags:
  --config <path>            config file (key = value lines, # comments)
  --data <path>              input dataset / raw CSV
  --out <path>               output path (dataset, model or report)
  --seed <u64>               base seed (default 1)
  --models <list>            bench models, comma separated: qglm,glm,boost,mean
  --repeats <n>              training repeats for qglm rows (default 10)
  --iters <n>                gradient descent iterations (default 80)
  --lr <f>                   learning rate (default 0.1)
  --cutoff <n>               Fock cutoff per mode (default 10)
  --tsne-perplexity <f>      t-SNE perplexity (default 30)
  --components <n>           t-SNE output dimensions (default 4)

exit codes: 0 ok, 1 usage error, 2 data error, 3 numerical failure
)";

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw qglm::DataError("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw qglm::DataError("failed writing '" + path + "'");
  }
}

int run_simulate(const qglm::RunConfig& config) {
  if (config.out.empty()) {
    throw qglm::UsageError("simulate: --out <dataset csv> is required");
  }
  qglm::TweedieSpec spec;
  spec.power_xi = config.xi;
  spec.dispersion_phi = config.phi;
  spec.coefficients = Eigen::Map<const Eigen::VectorXd>(
      config.coefficients.data(),
      static_cast<Eigen::Index>(config.coefficients.size()));
  spec.num_noise_features = config.noise_features;
  const qglm::Dataset dataset =
      qglm::simulate_dataset(spec, config.n, config.seed);
  qglm::write_dataset_csv(dataset, config.out);
  std::cout << "wrote " << config.out << " (" << dataset.num_observations()
            << " rows, " << dataset.num_features() << " features, family "
            << qglm::family_lookup(config.phi, config.xi) << ")\n";
  return 0;
}

int run_preprocess(const qglm::RunConfig& config) {
  if (config.data.empty() || config.out.empty()) {
    throw qglm::UsageError(
        "preprocess: --data <forest fires csv> and --out <dataset csv> are "
        "required");
  }
  qglm::TsneConfig tsne;
  tsne.out_dims = config.components;
  tsne.perplexity = config.tsne_perplexity;
  tsne.iterations = config.tsne_iterations;
  tsne.learning_rate = config.tsne_lr;
  tsne.early_exaggeration = config.tsne_exaggeration;
  tsne.seed = config.seed;
  const qglm::PreprocessResult result =
      qglm::preprocess_forest_fires(config.data, tsne, config.seed);
  qglm::write_dataset_csv(result.dataset, config.out);
  const std::string provenance_path = config.out + ".provenance.txt";
  write_text_file(provenance_path, result.provenance);
  std::cout << "wrote " << config.out << " ("
            << result.dataset.num_observations() << " rows, "
            << result.dataset.num_features()
            << " components) and " << provenance_path << "\n";
  return 0;
}

int run_train(const qglm::RunConfig& config) {
  if (config.data.empty()) {
    throw qglm::UsageError("train: --data <dataset csv> is required");
  }
  const qglm::Dataset dataset = qglm::read_dataset_csv(config.data);
  qglm::TrainConfig train_config;
  train_config.cutoff = config.cutoff;
  train_config.encoding_scale = config.encoding_scale;
  train_config.learning_rate = config.lr;
  train_config.iterations = config.iters;
  train_config.repeats = config.repeats;
  train_config.seed = config.seed;

  const qglm::TrainResult result = qglm::train(dataset, train_config);
  const Eigen::VectorXd test_preds = qglm::predict_batch(
      result.params, dataset.rows(dataset.test_indices), train_config);
  const double test_mse = qglm::scaled_mse(
      test_preds, dataset.scaled(dataset.test_indices));

  std::cout << "train MSE " << qglm::format_g17(result.loss_trace.back())
            << ", test MSE " << qglm::format_g17(test_mse) << " after "
            << config.iters << " iterations\n";
  if (!config.out.empty()) {
    qglm::SavedModel model;
    model.params = result.params;
    model.num_modes = dataset.num_features();
    model.cutoff = config.cutoff;
    model.encoding_scale = config.encoding_scale;
    qglm::save_model(model, config.out);
    std::cout << "wrote " << config.out << "\n";
  }
  return 0;
}

int run_bench(const qglm::RunConfig& config) {
  const qglm::BenchmarkReport report = qglm::run_benchmark(config);
  const std::string text = qglm::render_report(report, config.format);
  if (config.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(config.out, text);
    std::cout << "wrote " << config.out << "\n";
  }
  for (const qglm::ReportRow& row : report.computed_rows) {
    if (row.failed) {
      std::cerr << "model " << row.algorithm << " failed: " << row.error
                << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (args.empty()) {
      std::cerr << kUsage;
      return 1;
    }
    const qglm::RunConfig config = qglm::parse_config(args);
    if (config.command == "simulate") return run_simulate(config);
    if (config.command == "preprocess") return run_preprocess(config);
    if (config.command == "train") return run_train(config);
    if (config.command == "bench") return run_bench(config);
    throw qglm::UsageError("unknown command '" + config.command + "'");
  } catch (const qglm::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 1;
  } catch (const qglm::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
