#include "qglm/circuit.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "qglm/errors.hpp"
#include "qglm/rng.hpp"
#include "qglm/text.hpp"
#include "executor.hpp"
#include "param_layout.hpp"

namespace qglm {

namespace {

using internal::ParamLayout;
using internal::layout_for;

void validate_params(const CircuitParams& params, int num_modes) {
  const ParamLayout l = layout_for(num_modes);
  const auto check_interferometer = [&](const InterferometerParams& p,
                                        const char* which) {
    if (p.num_modes != num_modes || p.bs_thetas.size() != l.pairs ||
        p.bs_phis.size() != l.pairs || p.final_phases.size() != num_modes) {
      throw ParameterError(std::string("circuit: ") + which +
                           " has inconsistent sizes");
    }
  };
  check_interferometer(params.interferometer_1, "interferometer_1");
  check_interferometer(params.interferometer_2, "interferometer_2");
  if (params.squeeze_r.size() != num_modes ||
      params.kerr_kappa.size() != num_modes) {
    throw ParameterError("circuit: per-mode parameter vectors must have one "
                         "entry per mode");
  }
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

struct RefDeriv {
  int param = -1;
  Eigen::MatrixXcd du;
};

struct RefGate {
  GateMatrix gate;
  std::vector<int> modes;
  std::vector<RefDeriv> derivs;
};

// The trainable part of the circuit (everything after the encoding) as an
// explicit gate list, optionally with the parameter derivative dU of every
// gate attached.
std::vector<RefGate> build_reference_circuit(const CircuitParams& params,
                                             int cutoff, bool with_derivs) {
  const int m = params.interferometer_1.num_modes;
  validate_params(params, m);
  const ParamLayout l = layout_for(m);

  const Eigen::MatrixXcd a = annihilation_operator(cutoff);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(cutoff, cutoff);
  const Eigen::MatrixXcd cross = kron(a.adjoint(), a);
  const Eigen::MatrixXcd number_first = kron(a.adjoint() * a, id);
  const Eigen::MatrixXcd number = a.adjoint() * a;
  const Eigen::MatrixXcd squeeze_gen = 0.5 * (a * a - (a * a).adjoint());
  const std::complex<double> ci(0.0, 1.0);

  std::vector<RefGate> gates;
  const auto pairs = interferometer_pairs(m);

  const auto add_interferometer = [&](const InterferometerParams& p,
                                      int theta_base, int phi_base,
                                      int phase_base) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double theta = p.bs_thetas[static_cast<Eigen::Index>(k)];
      const double phi = p.bs_phis[static_cast<Eigen::Index>(k)];
      RefGate g;
      g.gate = beamsplitter_gate(theta, phi, cutoff);
      g.modes = {pairs[k].first, pairs[k].second};
      if (with_derivs) {
        const Eigen::MatrixXcd gen = std::polar(1.0, phi) * cross -
                                     std::polar(1.0, -phi) * cross.adjoint();
        g.derivs.push_back({theta_base + static_cast<int>(k),
                            gen * g.gate.entries});
        g.derivs.push_back({phi_base + static_cast<int>(k),
                            ci * (number_first * g.gate.entries -
                                  g.gate.entries * number_first)});
      }
      gates.push_back(std::move(g));
    }
    for (int mode = 0; mode < m; ++mode) {
      RefGate g;
      g.gate = rotation_gate(p.final_phases[mode], cutoff);
      g.modes = {mode};
      if (with_derivs) {
        g.derivs.push_back({phase_base + mode, ci * number * g.gate.entries});
      }
      gates.push_back(std::move(g));
    }
  };

  add_interferometer(params.interferometer_1, l.i1_theta, l.i1_phi, l.i1_phase);
  for (int mode = 0; mode < m; ++mode) {
    RefGate g;
    g.gate = squeezing_gate(params.squeeze_r[mode], cutoff);
    g.modes = {mode};
    if (with_derivs) {
      g.derivs.push_back({l.squeeze + mode, squeeze_gen * g.gate.entries});
    }
    gates.push_back(std::move(g));
  }
  add_interferometer(params.interferometer_2, l.i2_theta, l.i2_phi, l.i2_phase);
  for (int mode = 0; mode < m; ++mode) {
    RefGate g;
    g.gate = kerr_gate(params.kerr_kappa[mode], cutoff);
    g.modes = {mode};
    if (with_derivs) {
      Eigen::MatrixXcd du = g.gate.entries;
      for (int n = 0; n < cutoff; ++n) {
        du(n, n) *= ci * static_cast<double>(n) * static_cast<double>(n);
      }
      g.derivs.push_back({l.kerr + mode, std::move(du)});
    }
    gates.push_back(std::move(g));
  }
  return gates;
}

// Unnormalized <x> of mode 0 (the quadratic form without the 1/norm factor).
double x_quadrature_raw(const FockState& state) {
  const int c = state.cutoff;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
    const int n = static_cast<int>(i % c);
    if (n + 1 >= c) continue;
    acc += std::sqrt(static_cast<double>(n + 1)) *
           std::real(std::conj(state.amplitudes[i]) * state.amplitudes[i + 1]);
  }
  return 2.0 * acc;
}

// (a + a\dagger) acting on mode 0.
Eigen::VectorXcd apply_x0(const FockState& state) {
  const int c = state.cutoff;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(state.amplitudes.size());
  for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
    const int n = static_cast<int>(i % c);
    std::complex<double> value = 0.0;
    if (n + 1 < c) {
      value += std::sqrt(static_cast<double>(n + 1)) * state.amplitudes[i + 1];
    }
    if (n > 0) {
      value += std::sqrt(static_cast<double>(n)) * state.amplitudes[i - 1];
    }
    out[i] = value;
  }
  return out;
}

constexpr double kMinPreNormSquared = 0.25;

}  // namespace

int num_circuit_params(int num_modes) { return layout_for(num_modes).total; }

CircuitParams zero_circuit_params(int num_modes) {
  CircuitParams params;
  params.interferometer_1 = zero_interferometer(num_modes);
  params.interferometer_2 = zero_interferometer(num_modes);
  params.squeeze_r = Eigen::VectorXd::Zero(num_modes);
  params.kerr_kappa = Eigen::VectorXd::Zero(num_modes);
  return params;
}

Eigen::VectorXd flatten_params(const CircuitParams& params) {
  const int m = params.interferometer_1.num_modes;
  validate_params(params, m);
  const ParamLayout l = layout_for(m);
  Eigen::VectorXd theta(l.total);
  theta.segment(l.i1_theta, l.pairs) = params.interferometer_1.bs_thetas;
  theta.segment(l.i1_phi, l.pairs) = params.interferometer_1.bs_phis;
  theta.segment(l.i1_phase, l.modes) = params.interferometer_1.final_phases;
  theta.segment(l.squeeze, l.modes) = params.squeeze_r;
  theta.segment(l.i2_theta, l.pairs) = params.interferometer_2.bs_thetas;
  theta.segment(l.i2_phi, l.pairs) = params.interferometer_2.bs_phis;
  theta.segment(l.i2_phase, l.modes) = params.interferometer_2.final_phases;
  theta.segment(l.kerr, l.modes) = params.kerr_kappa;
  return theta;
}

CircuitParams unflatten_params(const Eigen::VectorXd& theta, int num_modes) {
  const ParamLayout l = layout_for(num_modes);
  if (theta.size() != l.total) {
    throw ParameterError("unflatten_params: expected " +
                         std::to_string(l.total) + " parameters, got " +
                         std::to_string(theta.size()));
  }
  CircuitParams params = zero_circuit_params(num_modes);
  params.interferometer_1.bs_thetas = theta.segment(l.i1_theta, l.pairs);
  params.interferometer_1.bs_phis = theta.segment(l.i1_phi, l.pairs);
  params.interferometer_1.final_phases = theta.segment(l.i1_phase, l.modes);
  params.squeeze_r = theta.segment(l.squeeze, l.modes);
  params.interferometer_2.bs_thetas = theta.segment(l.i2_theta, l.pairs);
  params.interferometer_2.bs_phis = theta.segment(l.i2_phi, l.pairs);
  params.interferometer_2.final_phases = theta.segment(l.i2_phase, l.modes);
  params.kerr_kappa = theta.segment(l.kerr, l.modes);
  return params;
}

std::vector<std::string> param_names(int num_modes) {
  const ParamLayout l = layout_for(num_modes);
  std::vector<std::string> names(static_cast<std::size_t>(l.total));
  for (int k = 0; k < l.pairs; ++k) {
    names[l.i1_theta + k] = "i1_bs_theta_" + std::to_string(k);
    names[l.i1_phi + k] = "i1_bs_phi_" + std::to_string(k);
    names[l.i2_theta + k] = "i2_bs_theta_" + std::to_string(k);
    names[l.i2_phi + k] = "i2_bs_phi_" + std::to_string(k);
  }
  for (int m = 0; m < num_modes; ++m) {
    names[l.i1_phase + m] = "i1_phase_" + std::to_string(m);
    names[l.squeeze + m] = "squeeze_r_" + std::to_string(m);
    names[l.i2_phase + m] = "i2_phase_" + std::to_string(m);
    names[l.kerr + m] = "kerr_kappa_" + std::to_string(m);
  }
  return names;
}

FockState encode_features(const Eigen::VectorXd& features, int cutoff,
                          double encoding_scale) {
  if (features.size() < 1) {
    throw ParameterError("encode_features: need at least one feature");
  }
  if (!(encoding_scale > 0.0) || !std::isfinite(encoding_scale)) {
    throw ParameterError("encode_features: encoding_scale must be positive");
  }
  for (Eigen::Index k = 0; k < features.size(); ++k) {
    if (!std::isfinite(features[k]) || std::abs(features[k]) > 3.5) {
      throw ParameterError(
          "encode_features: feature magnitude above 3.5 at position " +
          std::to_string(k));
    }
  }
  const int m = static_cast<int>(features.size());
  FockState state = vacuum_state(m, cutoff);
  for (int k = 0; k < m; ++k) {
    state = apply_gate(state,
                       displacement_gate(encoding_scale * features[k], cutoff),
                       {k});
  }
  return state;
}

ForwardResult forward(const CircuitParams& params,
                      const Eigen::VectorXd& features,
                      const TrainConfig& config) {
  const int m = params.interferometer_1.num_modes;
  if (features.size() != m) {
    throw ParameterError("forward: feature count must equal num_modes");
  }
  FockState state =
      encode_features(features, config.cutoff, config.encoding_scale);
  const auto gates = build_reference_circuit(params, config.cutoff, false);
  for (const auto& g : gates) state = apply_gate(state, g.gate, g.modes);

  ForwardResult result;
  result.pre_norm_squared = norm_squared(state);
  if (result.pre_norm_squared < kMinPreNormSquared) {
    throw NumericError("forward: truncation loss, state norm fell below 0.5; "
                       "increase the cutoff");
  }
  state = normalize(state);
  result.prediction = expectation_x(state, 0);
  return result;
}

Eigen::VectorXd gradient(const CircuitParams& params,
                         const Eigen::MatrixXd& features,
                         const Eigen::VectorXd& targets,
                         const TrainConfig& config, double* mse_out) {
  const int m = params.interferometer_1.num_modes;
  if (features.cols() != m) {
    throw ParameterError("gradient: feature count must equal num_modes");
  }
  const Eigen::Index n = features.rows();
  if (n < 1 || targets.size() != n) {
    throw ParameterError("gradient: need one target per feature row");
  }

  const ParamLayout l = layout_for(m);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(l.total);
  const auto gates = build_reference_circuit(params, config.cutoff, true);
  const std::size_t t = gates.size();
  double mse_acc = 0.0;

  for (Eigen::Index o = 0; o < n; ++o) {
    std::vector<FockState> states(t + 1);
    states[0] = encode_features(features.row(o).transpose(), config.cutoff,
                                config.encoding_scale);
    for (std::size_t k = 0; k < t; ++k) {
      states[k + 1] = apply_gate(states[k], gates[k].gate, gates[k].modes);
    }

    const double eta2 = norm_squared(states[t]);
    if (eta2 < kMinPreNormSquared) {
      throw NumericError("gradient: truncation loss, state norm fell below "
                         "0.5; increase the cutoff");
    }
    const double f = x_quadrature_raw(states[t]) / eta2;
    const double target = targets[o];
    mse_acc += (f - target) * (f - target);
    const double weight = 2.0 * (f - target) / static_cast<double>(n);

    FockState mu = states[t];
    mu.amplitudes = (apply_x0(states[t]) - f * states[t].amplitudes) *
                    (2.0 * weight / eta2);
    for (std::size_t k = t; k-- > 0;) {
      for (const auto& deriv : gates[k].derivs) {
        const GateMatrix dg{gates[k].gate.arity, config.cutoff, deriv.du};
        const FockState v = apply_gate(states[k], dg, gates[k].modes);
        grad[deriv.param] += std::real(mu.amplitudes.dot(v.amplitudes));
      }
      const GateMatrix adj{gates[k].gate.arity, config.cutoff,
                           gates[k].gate.entries.adjoint()};
      mu = apply_gate(mu, adj, gates[k].modes);
    }
  }

  if (mse_out != nullptr) *mse_out = mse_acc / static_cast<double>(n);
  return grad;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  if (dataset.train_indices.empty()) {
    throw ParameterError("train: dataset has no train rows");
  }
  if (config.iterations < 0) {
    throw ParameterError("train: iterations must be non-negative");
  }
  const Eigen::MatrixXd x = dataset.rows(dataset.train_indices);
  const Eigen::VectorXd y = dataset.scaled(dataset.train_indices);
  const int m = static_cast<int>(x.cols());
  const ParamLayout l = layout_for(m);

  internal::BatchedExecutor exec(m, config.cutoff, config.encoding_scale);
  Rng rng(config.seed);
  Eigen::VectorXd theta(l.total);
  for (int i = 0; i < l.total; ++i) theta[i] = -0.05 + 0.1 * rng.uniform();

  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(config.iterations) + 1);
  for (int it = 0; it < config.iterations; ++it) {
    double mse = 0.0;
    Eigen::VectorXd grad;
    try {
      grad = exec.gradient(theta, x, y, &mse);
    } catch (const NumericError& e) {
      throw NumericError("train: aborted at iteration " + std::to_string(it) +
                         ": " + e.what());
    }
    result.loss_trace.push_back(mse);
    theta -= config.learning_rate * grad;
  }
  result.loss_trace.push_back(exec.mse(theta, x, y));
  result.params = unflatten_params(theta, m);
  return result;
}

Eigen::VectorXd predict_batch(const CircuitParams& params,
                              const Eigen::MatrixXd& features,
                              const TrainConfig& config) {
  const int m = params.interferometer_1.num_modes;
  if (features.cols() != m) {
    throw ParameterError("predict_batch: feature count must equal num_modes");
  }
  internal::BatchedExecutor exec(m, config.cutoff, config.encoding_scale);
  return exec.predict(flatten_params(params), features);
}

RepeatedEvaluation evaluate_repeated(const Dataset& dataset,
                                     const TrainConfig& config) {
  if (config.repeats < 1) {
    throw ParameterError("evaluate_repeated: repeats must be at least 1");
  }
  if (dataset.test_indices.empty()) {
    throw ParameterError("evaluate_repeated: dataset has no test rows");
  }
  const Eigen::MatrixXd x_test = dataset.rows(dataset.test_indices);
  const Eigen::VectorXd y_test = dataset.scaled(dataset.test_indices);

  RepeatedEvaluation out;
  out.per_repeat_mse.reserve(config.repeats);
  out.per_repeat_params.reserve(config.repeats);
  double sum = 0.0;
  for (int r = 0; r < config.repeats; ++r) {
    TrainConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(r);
    TrainResult fit = train(dataset, cfg);
    const Eigen::VectorXd preds = predict_batch(fit.params, x_test, config);
    const double mse = (preds - y_test).squaredNorm() /
                       static_cast<double>(y_test.size());
    sum += mse;
    out.per_repeat_mse.push_back(mse);
    out.per_repeat_params.push_back(std::move(fit.params));
  }
  out.mean_test_mse = sum / static_cast<double>(config.repeats);
  return out;
}

void save_model(const SavedModel& model, const std::string& path) {
  validate_params(model.params, model.num_modes);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "qglm-model modes=" << model.num_modes << " cutoff=" << model.cutoff
      << " encoding_scale=" << format_g17(model.encoding_scale) << "\n";
  const Eigen::VectorXd theta = flatten_params(model.params);
  const auto names = param_names(model.num_modes);
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << " = " << format_g17(theta[static_cast<Eigen::Index>(i)])
        << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty model file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  SavedModel model;
  {
    const auto fields = split(line, ' ');
    if (fields.size() != 4 || fields[0] != "qglm-model" ||
        fields[1].rfind("modes=", 0) != 0 ||
        fields[2].rfind("cutoff=", 0) != 0 ||
        fields[3].rfind("encoding_scale=", 0) != 0) {
      throw DataError(path + ": bad model header");
    }
    model.num_modes = static_cast<int>(parse_int(fields[1].substr(6)));
    model.cutoff = static_cast<int>(parse_int(fields[2].substr(7)));
    model.encoding_scale = parse_double(fields[3].substr(15));
  }
  const auto names = param_names(model.num_modes);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!std::getline(in, line)) {
      throw DataError(path + ": missing parameter " + names[i]);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto pos = line.find(" = ");
    if (pos == std::string::npos || line.substr(0, pos) != names[i]) {
      throw DataError(path + ": expected parameter " + names[i]);
    }
    theta[static_cast<Eigen::Index>(i)] = parse_double(line.substr(pos + 3));
  }
  model.params = unflatten_params(theta, model.num_modes);
  return model;
}

}  // namespace qglm
