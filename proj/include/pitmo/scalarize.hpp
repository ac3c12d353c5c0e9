#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "pitmo/core.hpp"
#include "pitmo/direct.hpp"
#include "pitmo/ecdf.hpp"
#include "pitmo/errors.hpp"
#include "pitmo/rng.hpp"

namespace pitmo {

/// Strictly positive scalarization weights.
class PreferenceVector {
 public:
  PreferenceVector() = default;
  explicit PreferenceVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw ValidationError("preference vector is empty");
    for (double v : w_) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError("preference weights must be finite and > 0");
      }
    }
  }
  PreferenceVector(std::initializer_list<double> w) : PreferenceVector(std::vector<double>(w)) {}

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  auto begin() const noexcept { return w_.begin(); }
  auto end() const noexcept { return w_.end(); }
  std::span<const double> view() const noexcept { return w_; }
  const std::vector<double>& values() const noexcept { return w_; }

  /// Scaled to sum to one.
  PreferenceVector normalized() const {
    const double s = std::accumulate(w_.begin(), w_.end(), 0.0);
    std::vector<double> out(w_);
    for (auto& v : out) v /= s;
    return PreferenceVector(std::move(out));
  }

  bool operator==(const PreferenceVector&) const = default;

 private:
  std::vector<double> w_;
};

enum class ScalarizerKind { raw_weighted_sum, score_weighted_sum };

inline std::string_view to_string(ScalarizerKind k) {
  return k == ScalarizerKind::raw_weighted_sum ? "raw" : "score";
}

inline ScalarizerKind parse_scalarizer_kind(std::string_view s) {
  if (s == "raw") return ScalarizerKind::raw_weighted_sum;
  if (s == "score") return ScalarizerKind::score_weighted_sum;
  throw ConfigError("unknown scalarizer '" + std::string(s) + "' (expected raw or score)");
}

/// Simple weighting method over raw objectives or over scores.
class Scalarizer {
 public:
  static Scalarizer raw() { return Scalarizer(ScalarizerKind::raw_weighted_sum, nullptr); }

  static Scalarizer on_scores(std::shared_ptr<const ScoreTransform> t) {
    if (!t) throw ValidationError("score scalarizer requires a transform");
    return Scalarizer(ScalarizerKind::score_weighted_sum, std::move(t));
  }

  static Scalarizer of_kind(ScalarizerKind kind, std::shared_ptr<const ScoreTransform> t) {
    return kind == ScalarizerKind::raw_weighted_sum ? raw() : on_scores(std::move(t));
  }

  ScalarizerKind kind() const noexcept { return kind_; }
  const std::shared_ptr<const ScoreTransform>& transform() const noexcept { return transform_; }

 private:
  Scalarizer(ScalarizerKind kind, std::shared_ptr<const ScoreTransform> t)
      : kind_(kind), transform_(std::move(t)) {}

  ScalarizerKind kind_;
  std::shared_ptr<const ScoreTransform> transform_;
};

/// Scalar objective to minimize: sum w_i f_i(x) for the raw kind, and
/// -sum w_i S_i(x) for the score kind (maximizing scores).
inline std::function<double(const DecisionVector&)> scalarize(const Scalarizer& s, const Problem& p,
                                                              const PreferenceVector& w) {
  if (w.size() != p.objective_count()) throw ValidationError("preference arity does not match problem");
  if (s.kind() == ScalarizerKind::score_weighted_sum && s.transform()->objective_count() != w.size()) {
    throw ValidationError("transform arity does not match preference");
  }
  if (s.kind() == ScalarizerKind::raw_weighted_sum) {
    return [&p, w](const DecisionVector& x) {
      const auto f = p.evaluate(x);
      double acc = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i];
      return acc;
    };
  }
  return [&p, w, t = s.transform()](const DecisionVector& x) {
    const auto f = p.evaluate(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * t->ecdf(i).score(f[i]);
    return -acc;
  };
}

/// One optimized solution with everything needed downstream.
struct SolutionRecord {
  PreferenceVector preference;
  DecisionVector x;
  ObjectiveVector objectives;
  ScoreVector scores;
  double total_score = 0.0;
};

/// Unweighted sum of scores, or a weighted one when weights are given.
inline double total_score(const ScoreVector& s, std::span<const double> weights = {}) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += (weights.empty() ? 1.0 : weights[i]) * s[i];
  return acc;
}

/// Optimizes the scalarized problem with DIRECT-L and scores the optimum
/// with `scoring`.
inline SolutionRecord solve_for_preference(const Problem& p, const PreferenceVector& w, const Scalarizer& s,
                                           const DirectConfig& cfg, const ScoreTransform& scoring) {
  const auto result = minimize(scalarize(s, p, w), p.bounds(), cfg);
  SolutionRecord rec;
  rec.preference = w;
  rec.x = result.best_x;
  rec.objectives = p.evaluate(rec.x);
  rec.scores = scoring.score(rec.objectives);
  rec.total_score = total_score(rec.scores);
  return rec;
}

inline constexpr double kMinPreferenceComponent = 1e-9;

/// n preference vectors uniform on the open unit simplex (flat Dirichlet via
/// normalized exponentials). Draws with a component below 1e-9 are redrawn.
inline std::vector<PreferenceVector> sample_preferences(std::size_t k, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("preference sample count must be at least 1");
  if (k < 1) throw ValidationError("preference dimension must be at least 1");
  Rng rng(seed);
  std::vector<PreferenceVector> out;
  out.reserve(n);
  std::vector<double> w(k);
  while (out.size() < n) {
    double sum = 0.0;
    for (auto& v : w) {
      v = rng.exponential();
      sum += v;
    }
    bool ok = sum > 0.0;
    for (auto& v : w) {
      v /= sum;
      ok = ok && v >= kMinPreferenceComponent;
    }
    if (ok) out.emplace_back(w);
  }
  return out;
}

}  // namespace pitmo
