#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pitmo/core.hpp"
#include "pitmo/direct.hpp"
#include "pitmo/ecdf.hpp"
#include "pitmo/errors.hpp"
#include "pitmo/io.hpp"
#include "pitmo/parallel.hpp"
#include "pitmo/pareto.hpp"
#include "pitmo/prefnet.hpp"
#include "pitmo/rng.hpp"
#include "pitmo/scalarize.hpp"

namespace pitmo {

/// Mean absolute componentwise difference after max-normalizing both vectors.
inline double trade_off_error(std::span<const double> desired, std::span<const double> obtained) {
  if (desired.size() != obtained.size()) throw ValidationError("trade-off vectors differ in length");
  const auto a = max_normalize(desired);
  const auto b = max_normalize(obtained);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

/// Type-7 sample quantile (linear interpolation between order statistics)
/// of already sorted data.
inline double sorted_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> sample, double level) {
  std::sort(sample.begin(), sample.end());
  return sorted_quantile(sample, level);
}

inline double median(std::vector<double> sample) { return quantile(std::move(sample), 0.5); }

/// Error quantiles per method at 0%, 10%, ..., 100%.
struct TradeoffReport {
  std::vector<double> levels;
  std::vector<std::string> method_labels;
  std::map<std::string, std::vector<double>> quantiles;
  std::map<std::string, std::vector<double>> per_solution_mae;

  double at(const std::string& method, double level) const {
    const auto& q = quantiles.at(method);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (std::abs(levels[i] - level) < 1e-12) return q[i];
    }
    throw ValidationError("quantile level not in report");
  }
  double median_of(const std::string& method) const { return at(method, 0.5); }
  double max_of(const std::string& method) const { return quantiles.at(method).back(); }
};

inline std::vector<double> decile_levels() {
  std::vector<double> l(11);
  for (std::size_t i = 0; i <= 10; ++i) l[i] = static_cast<double>(i) / 10.0;
  return l;
}

/// Builds a report from (label, errors) pairs, preserving label order.
inline TradeoffReport quantile_table(const std::vector<std::pair<std::string, std::vector<double>>>& errors) {
  TradeoffReport r;
  r.levels = decile_levels();
  for (const auto& [label, sample] : errors) {
    if (sample.empty()) throw ValidationError("no errors recorded for method '" + label + "'");
    auto sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> q;
    for (double l : r.levels) q.push_back(sorted_quantile(sorted, l));
    r.method_labels.push_back(label);
    r.quantiles[label] = std::move(q);
    r.per_solution_mae[label] = sample;
  }
  return r;
}

/// Rows 0%..100%, one column per method.
inline std::string report_csv(const TradeoffReport& r) {
  std::string out = "quantile";
  for (const auto& l : r.method_labels) out += "," + l;
  out += '\n';
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    out += std::to_string(static_cast<int>(std::lround(r.levels[i] * 100))) + "%";
    for (const auto& l : r.method_labels) out += "," + io::format_double(r.quantiles.at(l)[i]);
    out += '\n';
  }
  return out;
}

inline nlohmann::json report_json(const TradeoffReport& r) {
  nlohmann::json j;
  j["levels"] = r.levels;
  j["methods"] = r.method_labels;
  for (const auto& l : r.method_labels) {
    j["quantiles"][l] = r.quantiles.at(l);
    j["count"][l] = r.per_solution_mae.at(l).size();
  }
  return j;
}

// --- homogeneity -----------------------------------------------------------

/// Linearly spaced losses between the observed extremes of each objective,
/// their scores, and the scores a uniform objective would give.
struct HomogeneityDemo {
  struct Objective {
    std::vector<double> losses;
    std::vector<double> scores;
    std::vector<double> ideal_scores;
  };
  std::vector<Objective> objectives;
};

inline HomogeneityDemo homogeneity_demo(const ScoreTransform& t, std::size_t grid) {
  if (grid < 2) throw ValidationError("homogeneity grid needs at least two points");
  HomogeneityDemo demo;
  for (const auto& e : t.per_objective()) {
    HomogeneityDemo::Objective o;
    const double lo = e.observed_min();
    const double hi = e.observed_max();
    for (std::size_t i = 0; i < grid; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(grid - 1);
      const double loss = i + 1 == grid ? hi : lo + frac * (hi - lo);
      o.losses.push_back(loss);
      o.scores.push_back(e.score(loss));
      o.ideal_scores.push_back(1.0 - frac);
    }
    demo.objectives.push_back(std::move(o));
  }
  return demo;
}

/// Score gained by improving a loss from `from` to `to`.
inline double score_gain(const SmoothedEcdf& e, double from, double to) { return e.score(to) - e.score(from); }

inline std::string homogeneity_csv(const HomogeneityDemo& d) {
  std::string out = "objective_index,grid_index,loss,score,ideal_score\n";
  for (std::size_t j = 0; j < d.objectives.size(); ++j) {
    const auto& o = d.objectives[j];
    for (std::size_t i = 0; i < o.losses.size(); ++i) {
      out += std::to_string(j) + ',' + std::to_string(i) + ',' + io::format_double(o.losses[i]) + ',' +
             io::format_double(o.scores[i]) + ',' + io::format_double(o.ideal_scores[i]) + '\n';
    }
  }
  return out;
}

// --- trade-off density -----------------------------------------------------

struct Histogram2D {
  std::size_t bins = 0;  // per axis, over [0, 1]
  std::vector<std::size_t> counts;  // row-major, first index along s_i

  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
  std::size_t occupied() const {
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
  }
};

struct TradeoffDensity {
  struct PairDensity {
    std::size_t i = 0;
    std::size_t j = 0;
    Histogram2D joint;
    Histogram ratio;
    std::size_t excluded = 0;  // records with s_j too small for a ratio
  };
  std::vector<PairDensity> pairs;
  std::size_t efficient_count = 0;
};

inline constexpr double kRatioDenominatorFloor = 1e-12;

inline TradeoffDensity tradeoff_density(const ParetoArchive& a,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                        std::size_t bins) {
  if (a.records.empty()) throw ValidationError("trade-off density of an empty archive");
  if (bins == 0) throw ValidationError("density needs at least one bin");
  const auto eff = a.efficient_records();
  TradeoffDensity d;
  d.efficient_count = eff.size();
  const std::size_t k = a.records.front().scores.size();
  for (auto [i, j] : pairs) {
    if (i >= k || j >= k) throw ValidationError("score index out of range");
    TradeoffDensity::PairDensity pd;
    pd.i = i;
    pd.j = j;
    pd.joint.bins = bins;
    pd.joint.counts.assign(bins * bins, 0);
    std::vector<double> ratios;
    for (const auto& r : eff) {
      auto bin_of = [bins](double s) {
        return std::min(static_cast<std::size_t>(std::clamp(s, 0.0, 1.0) * static_cast<double>(bins)), bins - 1);
      };
      pd.joint.counts[bin_of(r.scores[i]) * bins + bin_of(r.scores[j])] += 1;
      if (r.scores[j] < kRatioDenominatorFloor) {
        ++pd.excluded;
      } else {
        ratios.push_back(r.scores[i] / r.scores[j]);
      }
    }
    pd.ratio = make_histogram(ratios, bins);
    d.pairs.push_back(std::move(pd));
  }
  return d;
}

inline std::string joint_density_csv(const TradeoffDensity::PairDensity& pd) {
  std::string out = "si_lo,si_hi,sj_lo,sj_hi,count\n";
  const double w = 1.0 / static_cast<double>(pd.joint.bins);
  for (std::size_t a = 0; a < pd.joint.bins; ++a) {
    for (std::size_t b = 0; b < pd.joint.bins; ++b) {
      out += io::format_double(a * w) + ',' + io::format_double((a + 1) * w) + ',' + io::format_double(b * w) +
             ',' + io::format_double((b + 1) * w) + ',' + std::to_string(pd.joint.counts[a * pd.joint.bins + b]) +
             '\n';
    }
  }
  return out;
}

// --- feasible preferences --------------------------------------------------

/// Draws n preferences believed feasible by resampling efficient score
/// vectors, jittering each component uniformly by up to half a bin of width
/// 1/bins, and normalizing to sum 1. Exact archived preferences are never
/// returned.
inline std::vector<PreferenceVector> sample_feasible_preferences(const ParetoArchive& a, std::size_t n,
                                                                 std::uint64_t seed, std::size_t bins = 20) {
  const auto eff = a.efficient_records();
  if (eff.size() < 10) throw ValidationError("feasible-preference sampling needs at least 10 efficient records");
  if (bins == 0) throw ValidationError("jitter bins must be positive");
  std::vector<std::vector<double>> archived;
  for (const auto& r : a.records) archived.push_back(r.preference.normalized().values());
  std::sort(archived.begin(), archived.end());

  const double half = 0.5 / static_cast<double>(bins);
  Rng rng(seed);
  std::vector<PreferenceVector> out;
  out.reserve(n);
  while (out.size() < n) {
    const auto& s = eff[static_cast<std::size_t>(rng.index(eff.size()))].scores;
    std::vector<double> w(s.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = std::max(s[i] + rng.uniform(-half, half), kMinPreferenceComponent);
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
    if (std::binary_search(archived.begin(), archived.end(), w)) continue;
    out.emplace_back(std::move(w));
  }
  return out;
}

struct FeasibleProbeResult {
  std::vector<PreferenceVector> preferences;
  std::vector<SolutionRecord> records;
  std::vector<std::vector<double>> deviations;  // |pref_i - obtained_i| after max-normalization
  std::vector<double> component_medians;
  double overall_median = 0.0;
};

/// Solves each preference and measures how far the obtained (normalized)
/// trade-off lands from it, per component.
inline FeasibleProbeResult feasibility_probe(const Problem& p, std::shared_ptr<const ScoreTransform> t,
                                             const std::vector<PreferenceVector>& prefs, ScalarizerKind kind,
                                             const DirectConfig& cfg, std::size_t jobs = 1) {
  if (prefs.empty()) throw ValidationError("feasibility probe needs preferences");
  const auto s = Scalarizer::of_kind(kind, t);
  FeasibleProbeResult r;
  r.preferences = prefs;
  r.records.resize(prefs.size());
  parallel_for(prefs.size(), jobs,
               [&](std::size_t i) { r.records[i] = solve_for_preference(p, prefs[i], s, cfg, *t); });
  const std::size_t k = p.objective_count();
  std::vector<std::vector<double>> per_component(k);
  std::vector<double> all;
  for (std::size_t n = 0; n < prefs.size(); ++n) {
    const auto a = max_normalize(prefs[n].view());
    const auto b = max_normalize(r.records[n].scores.view());
    std::vector<double> dev(k);
    for (std::size_t i = 0; i < k; ++i) {
      dev[i] = std::abs(a[i] - b[i]);
      per_component[i].push_back(dev[i]);
      all.push_back(dev[i]);
    }
    r.deviations.push_back(std::move(dev));
  }
  for (auto& c : per_component) r.component_medians.push_back(median(c));
  r.overall_median = median(all);
  return r;
}

inline std::string probe_csv(const FeasibleProbeResult& r) {
  if (r.records.empty()) return {};
  const std::size_t k = r.preferences.front().size();
  std::string out;
  for (std::size_t i = 1; i <= k; ++i) out += "p" + std::to_string(i) + ",";
  for (std::size_t i = 1; i <= k; ++i) out += "s" + std::to_string(i) + ",";
  for (std::size_t i = 1; i <= k; ++i) out += "dev" + std::to_string(i) + (i == k ? "\n" : ",");
  for (std::size_t n = 0; n < r.records.size(); ++n) {
    std::vector<std::string> cells;
    for (double v : r.preferences[n]) cells.push_back(io::format_double(v));
    for (double v : r.records[n].scores) cells.push_back(io::format_double(v));
    for (double v : r.deviations[n]) cells.push_back(io::format_double(v));
    io::append_row(out, cells);
  }
  return out;
}

}  // namespace pitmo
