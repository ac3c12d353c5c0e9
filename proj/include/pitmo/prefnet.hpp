#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pitmo/core.hpp"
#include "pitmo/errors.hpp"
#include "pitmo/io.hpp"
#include "pitmo/pareto.hpp"
#include "pitmo/rng.hpp"
#include "pitmo/scalarize.hpp"

namespace pitmo {

/// Divides by the largest component so the maximum becomes exactly 1.
inline std::vector<double> max_normalize(std::span<const double> v) {
  if (v.empty()) throw ValidationError("cannot normalize an empty vector");
  const double mx = *std::max_element(v.begin(), v.end());
  if (!(mx > 0.0) || !std::isfinite(mx)) throw ValidationError("max-normalization needs a positive maximum");
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x = x == mx ? 1.0 : x / mx;
  return out;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Feedforward net k -> hidden -> k with sigmoid activations on both layers.
///
/// Weight layout is row-major with the bias as the last row:
/// weights_in is (k+1) x hidden, weights_out is (hidden+1) x k.
struct CorrectionModel {
  std::size_t input_dim = 0;
  std::size_t hidden_units = 0;
  std::vector<double> weights_in;
  std::vector<double> weights_out;

  static CorrectionModel zeros(std::size_t k, std::size_t hidden) {
    if (k == 0 || hidden == 0) throw ValidationError("model dimensions must be positive");
    return {k, hidden, std::vector<double>((k + 1) * hidden, 0.0), std::vector<double>((hidden + 1) * k, 0.0)};
  }

  /// Weights uniform in [-0.5, 0.5].
  static CorrectionModel random(std::size_t k, std::size_t hidden, std::uint64_t seed) {
    auto m = zeros(k, hidden);
    Rng rng(seed);
    for (auto& w : m.weights_in) w = rng.uniform(-0.5, 0.5);
    for (auto& w : m.weights_out) w = rng.uniform(-0.5, 0.5);
    return m;
  }

  std::size_t parameter_count() const { return weights_in.size() + weights_out.size(); }

  bool operator==(const CorrectionModel&) const = default;
};

namespace detail {

struct Activations {
  std::vector<double> hidden;
  std::vector<double> output;
};

inline Activations propagate(const CorrectionModel& m, std::span<const double> in) {
  const std::size_t k = m.input_dim;
  const std::size_t h = m.hidden_units;
  Activations a{std::vector<double>(h), std::vector<double>(k)};
  for (std::size_t j = 0; j < h; ++j) {
    double z = m.weights_in[k * h + j];
    for (std::size_t i = 0; i < k; ++i) z += in[i] * m.weights_in[i * h + j];
    a.hidden[j] = sigmoid(z);
  }
  for (std::size_t o = 0; o < k; ++o) {
    double z = m.weights_out[h * k + o];
    for (std::size_t j = 0; j < h; ++j) z += a.hidden[j] * m.weights_out[j * k + o];
    a.output[o] = sigmoid(z);
  }
  return a;
}

}  // namespace detail

/// Raw sigmoid outputs, each in (0, 1).
inline std::vector<double> forward_raw(const CorrectionModel& m, std::span<const double> desired) {
  if (desired.size() != m.input_dim) throw ValidationError("model input has wrong dimension");
  return detail::propagate(m, desired).output;
}

/// Predicted preference for a max-normalized desired score vector,
/// renormalized so its largest component is 1.
inline PreferenceVector forward(const CorrectionModel& m, std::span<const double> desired) {
  auto out = max_normalize(forward_raw(m, desired));
  for (auto& v : out) v = std::max(v, std::numeric_limits<double>::min());
  return PreferenceVector(std::move(out));
}

/// (normalized score vector, normalized preference) pairs with a disjoint
/// train/validation split.
struct BijectionDataset {
  struct Pair {
    std::vector<double> score;
    std::vector<double> preference;
  };
  std::vector<Pair> pairs;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;

  std::size_t dim() const { return pairs.empty() ? 0 : pairs.front().score.size(); }
};

/// Pairs up the efficient records of `a`, both vectors max-normalized, and
/// splits them randomly into n_train training pairs and the rest.
inline BijectionDataset make_dataset(const ParetoArchive& a, std::size_t n_train, std::uint64_t seed) {
  BijectionDataset d;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (!a.efficient_mask[i]) continue;
    const auto& r = a.records[i];
    d.pairs.push_back({max_normalize(r.scores.view()), max_normalize(r.preference.view())});
  }
  if (n_train == 0) throw ValidationError("training split must be nonempty");
  if (d.pairs.size() < n_train) {
    throw ValidationError("archive has " + std::to_string(d.pairs.size()) + " efficient records, need " +
                          std::to_string(n_train));
  }
  std::vector<std::size_t> idx(d.pairs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  d.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  d.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return d;
}

/// Sum over pairs and components of (output - target)^2.
inline double loss(const CorrectionModel& m, const BijectionDataset& d, std::span<const std::size_t> subset) {
  double acc = 0.0;
  for (std::size_t p : subset) {
    const auto out = forward_raw(m, d.pairs[p].score);
    for (std::size_t o = 0; o < out.size(); ++o) {
      const double r = out[o] - d.pairs[p].preference[o];
      acc += r * r;
    }
  }
  return acc;
}

/// Gradient of loss() by backpropagation, laid out as weights_in followed by
/// weights_out.
inline std::vector<double> gradient(const CorrectionModel& m, const BijectionDataset& d,
                                    std::span<const std::size_t> subset) {
  const std::size_t k = m.input_dim;
  const std::size_t h = m.hidden_units;
  std::vector<double> g(m.parameter_count(), 0.0);
  double* g_in = g.data();
  double* g_out = g.data() + m.weights_in.size();
  std::vector<double> delta_out(k);
  std::vector<double> delta_hidden(h);
  for (std::size_t p : subset) {
    const auto& x = d.pairs[p].score;
    const auto& t = d.pairs[p].preference;
    const auto a = detail::propagate(m, x);
    for (std::size_t o = 0; o < k; ++o) {
      const double y = a.output[o];
      delta_out[o] = 2.0 * (y - t[o]) * y * (1.0 - y);
    }
    for (std::size_t j = 0; j < h; ++j) {
      double back = 0.0;
      for (std::size_t o = 0; o < k; ++o) {
        back += m.weights_out[j * k + o] * delta_out[o];
        g_out[j * k + o] += a.hidden[j] * delta_out[o];
      }
      delta_hidden[j] = back * a.hidden[j] * (1.0 - a.hidden[j]);
    }
    for (std::size_t o = 0; o < k; ++o) g_out[h * k + o] += delta_out[o];
    for (std::size_t j = 0; j < h; ++j) {
      for (std::size_t i = 0; i < k; ++i) g_in[i * h + j] += x[i] * delta_hidden[j];
      g_in[k * h + j] += delta_hidden[j];
    }
  }
  return g;
}

struct TrainConfig {
  std::size_t hidden_units = 5;
  std::size_t max_epochs = 5000;
  double learning_rate = 1.0;  // applied to the per-pair mean gradient
  double tolerance = 1e-9;     // loss improvement over `window` epochs
  std::size_t window = 50;
  double step_growth = 1.05;   // after an accepted step
};

struct TrainResult {
  CorrectionModel model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t epochs = 0;
  bool converged = false;  // false means max_epochs was hit
  std::vector<double> loss_history;
};

/// Full-batch gradient descent on the training split. A step that would
/// raise the loss is rejected and the step size halved, so the recorded loss
/// never increases.
inline TrainResult train(const BijectionDataset& d, const TrainConfig& cfg, std::uint64_t seed) {
  if (d.train.empty()) throw ValidationError("training split is empty");
  TrainResult r;
  r.model = CorrectionModel::random(d.dim(), cfg.hidden_units, seed);
  double current = loss(r.model, d, d.train);
  if (!std::isfinite(current)) throw NumericalError("initial training loss is not finite");
  r.initial_loss = current;
  r.loss_history.push_back(current);

  const double scale = 1.0 / static_cast<double>(d.train.size());
  double step = cfg.learning_rate;
  CorrectionModel trial = r.model;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto g = gradient(r.model, d, d.train);
    double next = current;
    // bounded number of halvings per epoch; a zero gradient ends training
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (std::size_t i = 0; i < trial.weights_in.size(); ++i) {
        trial.weights_in[i] = r.model.weights_in[i] - step * scale * g[i];
      }
      const std::size_t off = trial.weights_in.size();
      for (std::size_t i = 0; i < trial.weights_out.size(); ++i) {
        trial.weights_out[i] = r.model.weights_out[i] - step * scale * g[off + i];
      }
      next = loss(trial, d, d.train);
      if (std::isfinite(next) && next <= current) break;
      step *= 0.5;
      next = current;
    }
    if (next < current) {
      std::swap(r.model, trial);
      trial = r.model;
      current = next;
      step *= cfg.step_growth;
    }
    r.loss_history.push_back(current);
    r.epochs = epoch;
    if (epoch >= cfg.window) {
      const double before = r.loss_history[r.loss_history.size() - 1 - cfg.window];
      if (before - current < cfg.tolerance) {
        r.converged = true;
        break;
      }
    }
  }
  r.final_loss = current;
  return r;
}

/// Corrects a desired (max-normalized) score trade-off into a preference,
/// sum-normalizes it and solves.
inline SolutionRecord corrected_solve(const CorrectionModel& m, std::span<const double> desired, const Problem& p,
                                      const ScoreTransform& t, const Scalarizer& s, const DirectConfig& cfg) {
  const auto pref = forward(m, desired).normalized();
  return solve_for_preference(p, pref, s, cfg, t);
}

// --- persistence -----------------------------------------------------------

inline nlohmann::json model_to_json(const CorrectionModel& m) {
  return {{"input_dim", m.input_dim},
          {"hidden_units", m.hidden_units},
          {"output_dim", m.input_dim},
          {"hidden_activation", "sigmoid"},
          {"output_activation", "sigmoid"},
          {"weights_in", m.weights_in},
          {"weights_out", m.weights_out}};
}

inline CorrectionModel model_from_json(const nlohmann::json& j) {
  if (j.at("hidden_activation") != "sigmoid" || j.at("output_activation") != "sigmoid") {
    throw ConfigError("only sigmoid activations are supported");
  }
  CorrectionModel m;
  m.input_dim = j.at("input_dim").get<std::size_t>();
  m.hidden_units = j.at("hidden_units").get<std::size_t>();
  m.weights_in = j.at("weights_in").get<std::vector<double>>();
  m.weights_out = j.at("weights_out").get<std::vector<double>>();
  if (j.at("output_dim").get<std::size_t>() != m.input_dim ||
      m.weights_in.size() != (m.input_dim + 1) * m.hidden_units ||
      m.weights_out.size() != (m.hidden_units + 1) * m.input_dim) {
    throw ConfigError("model JSON has inconsistent dimensions");
  }
  return m;
}

inline void save_model(const CorrectionModel& m, const std::filesystem::path& path) {
  io::write_file(path, model_to_json(m).dump(2) + "\n");
}

inline CorrectionModel load_model(const std::filesystem::path& path) {
  return model_from_json(nlohmann::json::parse(io::read_file(path)));
}

}  // namespace pitmo
