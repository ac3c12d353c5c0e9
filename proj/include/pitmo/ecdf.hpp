#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pitmo/core.hpp"
#include "pitmo/errors.hpp"
#include "pitmo/io.hpp"
#include "pitmo/parallel.hpp"

namespace pitmo {

inline constexpr double kDefaultTailEpsilon = 1e-4;
inline constexpr double kDefaultTailSpanFraction = 0.05;
inline constexpr std::size_t kThinningThreshold = 10'000;
inline constexpr std::size_t kMaxKnots = 4096;

/// Strictly monotone piecewise-linear approximation of an empirical CDF.
///
/// Between the observed extremes the curve interpolates linearly between
/// knots (x_i, p_i) with p rising from tail_epsilon to 1 - tail_epsilon.
/// Outside them, linear tails fall to 0 at min - tail_span and rise to 1 at
/// max + tail_span; beyond those the CDF is clamped.
class SmoothedEcdf {
 public:
  SmoothedEcdf(std::vector<double> knots_x, std::vector<double> knots_p, double tail_epsilon,
               double tail_span)
      : x_(std::move(knots_x)), p_(std::move(knots_p)), eps_(tail_epsilon), span_(tail_span) {
    if (x_.size() < 2 || x_.size() != p_.size()) {
      throw ValidationError("ECDF needs at least two knots of matching length");
    }
    if (!(eps_ >= 0.0 && eps_ < 0.5)) throw ValidationError("tail_epsilon must be in [0, 0.5)");
    if (!(span_ > 0.0) || !std::isfinite(span_)) throw ValidationError("tail_span must be positive");
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i]) || !std::isfinite(p_[i])) throw ValidationError("non-finite knot");
      if (i > 0 && !(x_[i] > x_[i - 1] && p_[i] > p_[i - 1])) {
        throw ValidationError("ECDF knots must be strictly increasing");
      }
    }
    if (p_.front() < eps_ || p_.back() > 1.0 - eps_) {
      throw ValidationError("ECDF knot probabilities outside [eps, 1 - eps]");
    }
  }

  const std::vector<double>& knots_x() const noexcept { return x_; }
  const std::vector<double>& knots_p() const noexcept { return p_; }
  double tail_epsilon() const noexcept { return eps_; }
  double tail_span() const noexcept { return span_; }
  double observed_min() const noexcept { return x_.front(); }
  double observed_max() const noexcept { return x_.back(); }
  double lower_end() const noexcept { return x_.front() - span_; }
  double upper_end() const noexcept { return x_.back() + span_; }

  double cdf(double x) const {
    if (x <= lower_end()) return 0.0;
    if (x >= upper_end()) return 1.0;
    if (x < x_.front()) return eps_ * (x - lower_end()) / span_;
    if (x > x_.back()) return (1.0 - eps_) + eps_ * (x - x_.back()) / span_;
    // x_[i-1] <= x < x_[i], or x == x_.back()
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.end()) return p_.back();
    const auto i = static_cast<std::size_t>(it - x_.begin());
    const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return p_[i - 1] + t * (p_[i] - p_[i - 1]);
  }

  /// Complementary CDF: low loss maps to a high score.
  double score(double loss) const { return 1.0 - cdf(loss); }

  /// Inverse of cdf() on its strictly monotone part; flat segments (only
  /// present when tail_epsilon is 0) resolve to the observed extreme.
  double quantile(double p) const {
    if (p <= 0.0) return eps_ > 0.0 ? lower_end() : x_.front();
    if (p >= 1.0) return eps_ > 0.0 ? upper_end() : x_.back();
    // 1 - (1 - p) is not always p; snap to an endpoint knot within rounding
    if (std::abs(p - p_.front()) <= 4.0 * std::numeric_limits<double>::epsilon()) return x_.front();
    if (std::abs(p - p_.back()) <= 4.0 * std::numeric_limits<double>::epsilon()) return x_.back();
    if (p < p_.front()) return lower_end() + span_ * p / eps_;
    if (p > p_.back()) return x_.back() + span_ * (p - p_.back()) / eps_;
    auto it = std::lower_bound(p_.begin(), p_.end(), p);
    const auto i = static_cast<std::size_t>(it - p_.begin());
    if (p_[i] == p) return x_[i];
    const double t = (p - p_[i - 1]) / (p_[i] - p_[i - 1]);
    return x_[i - 1] + t * (x_[i] - x_[i - 1]);
  }

  bool operator==(const SmoothedEcdf&) const = default;

 private:
  std::vector<double> x_;
  std::vector<double> p_;
  double eps_;
  double span_;
};

/// Loss whose score equals s; s is clamped into [0, 1].
inline double inverse_score(const SmoothedEcdf& e, double s) {
  return e.quantile(1.0 - std::clamp(s, 0.0, 1.0));
}

namespace detail {

// Keeps at most max_knots knots whose probabilities are closest above evenly
// spaced targets; the endpoints always survive.
inline void thin_knots(std::vector<double>& xs, std::vector<double>& ps, std::size_t max_knots) {
  if (xs.size() <= max_knots) return;
  std::vector<double> tx;
  std::vector<double> tp;
  tx.reserve(max_knots);
  tp.reserve(max_knots);
  const double lo = ps.front();
  const double hi = ps.back();
  std::size_t prev = 0;
  tx.push_back(xs.front());
  tp.push_back(ps.front());
  for (std::size_t j = 1; j + 1 < max_knots; ++j) {
    const double target = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(max_knots - 1);
    const auto it = std::lower_bound(ps.begin(), ps.end(), target);
    const auto i = static_cast<std::size_t>(it - ps.begin());
    if (i > prev && i + 1 < ps.size()) {
      tx.push_back(xs[i]);
      tp.push_back(ps[i]);
      prev = i;
    }
  }
  tx.push_back(xs.back());
  tp.push_back(ps.back());
  xs = std::move(tx);
  ps = std::move(tp);
}

}  // namespace detail

/// Builds a smoothed ECDF from raw losses.
///
/// Knots sit at the midpoint plotting positions (i - 0.5)/n of the step
/// function, taken at the last index of each run of equal losses, then
/// rescaled affinely onto [tail_epsilon, 1 - tail_epsilon]. Samples larger
/// than 10^4 are thinned to at most 4096 knots. The default tail span is 5%
/// of the observed range.
inline SmoothedEcdf build_ecdf(std::span<const double> losses, double tail_epsilon = kDefaultTailEpsilon,
                               std::optional<double> tail_span = std::nullopt) {
  if (!(tail_epsilon >= 0.0 && tail_epsilon < 0.5)) {
    throw ValidationError("tail_epsilon must be in [0, 0.5)");
  }
  std::vector<double> sorted(losses.begin(), losses.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw ValidationError("ECDF input contains a non-finite loss");
  }
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  std::vector<double> xs;
  std::vector<double> ps;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && sorted[i + 1] == sorted[i]) continue;
    xs.push_back(sorted[i]);
    ps.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  if (xs.size() < 2) throw DegenerateDistributionError("ECDF needs at least two distinct loss values");

  const double p0 = ps.front();
  const double scale = (1.0 - 2.0 * tail_epsilon) / (ps.back() - p0);
  for (auto& p : ps) p = tail_epsilon + (p - p0) * scale;
  ps.front() = tail_epsilon;
  ps.back() = 1.0 - tail_epsilon;
  // With a vanishing epsilon the affine map can collide neighbouring knots.
  for (std::size_t i = 1; i < ps.size(); ++i) {
    if (!(ps[i] > ps[i - 1])) throw DegenerateDistributionError("ECDF knots collapsed numerically");
  }

  if (n > kThinningThreshold) detail::thin_knots(xs, ps, kMaxKnots);

  const double span = tail_span.value_or(kDefaultTailSpanFraction * (xs.back() - xs.front()));
  return SmoothedEcdf(std::move(xs), std::move(ps), tail_epsilon, span);
}

/// One smoothed ECDF per objective of a problem; maps objective vectors to
/// score vectors via the complementary CDF.
class ScoreTransform {
 public:
  ScoreTransform(std::vector<SmoothedEcdf> per_objective, std::size_t sample_count, std::uint64_t seed,
                 std::string problem_name)
      : ecdfs_(std::move(per_objective)),
        sample_count_(sample_count),
        seed_(seed),
        problem_name_(std::move(problem_name)) {
    if (ecdfs_.empty()) throw ValidationError("score transform needs at least one ECDF");
  }

  std::size_t objective_count() const noexcept { return ecdfs_.size(); }
  const SmoothedEcdf& ecdf(std::size_t i) const { return ecdfs_.at(i); }
  const std::vector<SmoothedEcdf>& per_objective() const noexcept { return ecdfs_; }
  std::size_t sample_count() const noexcept { return sample_count_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& problem_name() const noexcept { return problem_name_; }
  double tail_epsilon() const noexcept { return ecdfs_.front().tail_epsilon(); }

  ScoreVector score(const ObjectiveVector& o) const {
    if (o.size() != ecdfs_.size()) throw ValidationError("objective vector does not match transform arity");
    std::vector<double> s(o.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = ecdfs_[i].score(o[i]);
    return ScoreVector(std::move(s));
  }

  /// Stable identifier derived from the knot contents (FNV-1a over the bytes).
  std::string fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double v) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
      }
    };
    for (const auto& e : ecdfs_) {
      for (double v : e.knots_x()) mix(v);
      for (double v : e.knots_p()) mix(v);
      mix(e.tail_epsilon());
      mix(e.tail_span());
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  bool operator==(const ScoreTransform&) const = default;

 private:
  std::vector<SmoothedEcdf> ecdfs_;
  std::size_t sample_count_;
  std::uint64_t seed_;
  std::string problem_name_;
};

/// Samples the decision space uniformly and builds one ECDF per objective.
/// The result does not depend on `jobs`.
inline ScoreTransform build_transform(const Problem& p, std::size_t n_samples, std::uint64_t seed,
                                      double tail_epsilon = kDefaultTailEpsilon, std::size_t jobs = 1) {
  if (n_samples < 2) throw ValidationError("a score transform needs at least two samples");
  const auto xs = sample_decision_space(p, n_samples, seed);
  const std::size_t k = p.objective_count();
  std::vector<std::vector<double>> losses(k, std::vector<double>(n_samples));
  parallel_for(n_samples, jobs, [&](std::size_t i) {
    const auto f = p.evaluate(xs[i]);
    for (std::size_t j = 0; j < k; ++j) losses[j][i] = f[j];
  });
  std::vector<std::optional<SmoothedEcdf>> built(k);
  parallel_for(k, jobs, [&](std::size_t j) { built[j] = build_ecdf(losses[j], tail_epsilon); });
  std::vector<SmoothedEcdf> ecdfs;
  for (auto& e : built) ecdfs.push_back(std::move(*e));
  return ScoreTransform(std::move(ecdfs), n_samples, seed, p.name());
}

// --- persistence -----------------------------------------------------------

inline std::string transform_knots_csv(const ScoreTransform& t) {
  std::string out = "objective_index,knot_x,knot_p\n";
  for (std::size_t j = 0; j < t.objective_count(); ++j) {
    const auto& e = t.ecdf(j);
    for (std::size_t i = 0; i < e.knots_x().size(); ++i) {
      out += std::to_string(j);
      out += ',';
      out += io::format_double(e.knots_x()[i]);
      out += ',';
      out += io::format_double(e.knots_p()[i]);
      out += '\n';
    }
  }
  return out;
}

inline nlohmann::json transform_metadata(const ScoreTransform& t) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& e : t.per_objective()) spans.push_back(e.tail_span());
  return {{"tail_epsilon", t.tail_epsilon()},
          {"tail_span", spans},
          {"sample_count", t.sample_count()},
          {"seed", t.seed()},
          {"problem_name", t.problem_name()},
          {"objective_count", t.objective_count()},
          {"fingerprint", t.fingerprint()}};
}

inline void save_transform(const ScoreTransform& t, const std::filesystem::path& csv_path,
                           const std::filesystem::path& json_path) {
  io::write_file(csv_path, transform_knots_csv(t));
  io::write_file(json_path, transform_metadata(t).dump(2) + "\n");
}

inline ScoreTransform load_transform(const std::filesystem::path& csv_path,
                                     const std::filesystem::path& json_path) {
  const auto meta = nlohmann::json::parse(io::read_file(json_path));
  const auto table = io::read_csv(csv_path);
  const auto c_obj = table.column("objective_index");
  const auto c_x = table.column("knot_x");
  const auto c_p = table.column("knot_p");
  const auto k = meta.at("objective_count").get<std::size_t>();
  const auto spans = meta.at("tail_span").get<std::vector<double>>();
  if (spans.size() != k) throw ConfigError("tail_span entries do not match objective_count");
  std::vector<std::vector<double>> xs(k), ps(k);
  for (const auto& row : table.rows) {
    const auto j = static_cast<std::size_t>(io::parse_double(row[c_obj]));
    if (j >= k) throw ConfigError("objective_index out of range in " + csv_path.string());
    xs[j].push_back(io::parse_double(row[c_x]));
    ps[j].push_back(io::parse_double(row[c_p]));
  }
  const double eps = meta.at("tail_epsilon").get<double>();
  std::vector<SmoothedEcdf> ecdfs;
  for (std::size_t j = 0; j < k; ++j) ecdfs.emplace_back(std::move(xs[j]), std::move(ps[j]), eps, spans[j]);
  return ScoreTransform(std::move(ecdfs), meta.at("sample_count").get<std::size_t>(),
                        meta.at("seed").get<std::uint64_t>(), meta.at("problem_name").get<std::string>());
}

}  // namespace pitmo
