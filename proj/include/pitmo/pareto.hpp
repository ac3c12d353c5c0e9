#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pitmo/core.hpp"
#include "pitmo/direct.hpp"
#include "pitmo/ecdf.hpp"
#include "pitmo/errors.hpp"
#include "pitmo/io.hpp"
#include "pitmo/parallel.hpp"
#include "pitmo/scalarize.hpp"

namespace pitmo {

/// Pareto dominance for minimization: a <= b everywhere and a < b somewhere.
inline bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("dominance check on vectors of different length");
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) { return dominates(a.view(), b.view()); }

/// Non-dominated mask over arbitrary vectors (minimization).
///
/// Points are visited in lexicographic order; only an earlier point can
/// dominate a later one, and by transitivity it suffices to compare against
/// the non-dominated points seen so far.
inline std::vector<bool> nondominated_mask(std::span<const std::vector<double>> points) {
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<bool> mask(n, false);
  std::vector<std::size_t> front;
  for (std::size_t idx : order) {
    const auto& p = points[idx];
    bool dominated = false;
    for (std::size_t f : front) {
      if (dominates(points[f], p)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) {
      mask[idx] = true;
      front.push_back(idx);
    }
  }
  return mask;
}

inline std::vector<bool> filter_efficient(std::span<const SolutionRecord> records) {
  std::vector<std::vector<double>> pts;
  pts.reserve(records.size());
  for (const auto& r : records) pts.push_back(r.objectives.values());
  return nondominated_mask(pts);
}

/// Optimized solutions plus their efficiency flags.
struct ParetoArchive {
  std::vector<SolutionRecord> records;
  std::vector<bool> efficient_mask;
  std::string transform_ref;
  std::string problem_name;
  ScalarizerKind kind = ScalarizerKind::raw_weighted_sum;
  std::uint64_t seed = 0;
  std::size_t max_evals = 0;

  std::size_t efficient_count() const {
    return static_cast<std::size_t>(std::count(efficient_mask.begin(), efficient_mask.end(), true));
  }

  std::vector<SolutionRecord> efficient_records() const {
    std::vector<SolutionRecord> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (efficient_mask[i]) out.push_back(records[i]);
    }
    return out;
  }
};

/// Samples n_prefs preferences, solves each scalarized problem, scores and
/// filters the results. Record order follows the preference sample.
inline ParetoArchive build_front(const Problem& p, std::shared_ptr<const ScoreTransform> t, std::size_t n_prefs,
                                 ScalarizerKind kind, const DirectConfig& cfg, std::uint64_t seed,
                                 std::size_t jobs = 1) {
  if (n_prefs == 0) throw ValidationError("front needs at least one preference");
  if (!t) throw ValidationError("front needs a score transform");
  const auto prefs = sample_preferences(p.objective_count(), n_prefs, seed);
  const auto scalarizer = Scalarizer::of_kind(kind, t);
  ParetoArchive a;
  a.records.resize(n_prefs);
  parallel_for(n_prefs, jobs,
               [&](std::size_t i) { a.records[i] = solve_for_preference(p, prefs[i], scalarizer, cfg, *t); });
  a.efficient_mask = filter_efficient(a.records);
  a.transform_ref = t->fingerprint();
  a.problem_name = p.name();
  a.kind = kind;
  a.seed = seed;
  a.max_evals = cfg.max_evals;
  return a;
}

/// Efficient records by descending total score; ties keep archive order.
inline std::vector<SolutionRecord> order_by_total_score(const ParetoArchive& a) {
  auto out = a.efficient_records();
  std::stable_sort(out.begin(), out.end(),
                   [](const SolutionRecord& x, const SolutionRecord& y) { return x.total_score > y.total_score; });
  return out;
}

/// Equal-width histogram; a zero-width range collapses to a single bin.
struct Histogram {
  std::vector<double> edges;  // size = bins + 1
  std::vector<std::size_t> counts;

  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

inline Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  Histogram h;
  if (values.empty()) {
    h.edges = {0.0, 0.0};
    h.counts = {0};
    return h;
  }
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn;
  const double hi = *mx;
  if (!(hi > lo)) {
    h.edges = {lo, hi};
    h.counts = {values.size()};
    return h;
  }
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
  }
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

inline Histogram total_score_density(const ParetoArchive& a, std::size_t bins) {
  std::vector<double> totals;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (a.efficient_mask[i]) totals.push_back(a.records[i].total_score);
  }
  return make_histogram(totals, bins);
}

inline std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out += io::format_double(h.edges[b]) + ',' + io::format_double(h.edges[b + 1]) + ',' +
           std::to_string(h.counts[b]) + '\n';
  }
  return out;
}

// --- persistence -----------------------------------------------------------

namespace detail {

inline std::vector<std::string> record_header(std::size_t k, std::size_t m) {
  std::vector<std::string> h;
  for (std::size_t i = 1; i <= k; ++i) h.push_back("w" + std::to_string(i));
  for (std::size_t i = 1; i <= m; ++i) h.push_back("x" + std::to_string(i));
  for (std::size_t i = 1; i <= k; ++i) h.push_back("f" + std::to_string(i));
  for (std::size_t i = 1; i <= k; ++i) h.push_back("s" + std::to_string(i));
  h.push_back("total_score");
  return h;
}

inline void append_record(std::vector<std::string>& cells, const SolutionRecord& r) {
  for (double v : r.preference) cells.push_back(io::format_double(v));
  for (double v : r.x) cells.push_back(io::format_double(v));
  for (double v : r.objectives) cells.push_back(io::format_double(v));
  for (double v : r.scores) cells.push_back(io::format_double(v));
  cells.push_back(io::format_double(r.total_score));
}

}  // namespace detail

/// Records as CSV: w1..wk, x1..xm, f1..fk, s1..sk, total_score[, efficient].
inline std::string records_csv(std::span<const SolutionRecord> records, std::span<const bool> efficient = {}) {
  std::string out;
  if (records.empty()) return out;
  const std::size_t k = records.front().objectives.size();
  const std::size_t m = records.front().x.size();
  auto header = detail::record_header(k, m);
  if (!efficient.empty()) header.push_back("efficient");
  io::append_row(out, header);
  std::vector<std::string> cells;
  for (std::size_t i = 0; i < records.size(); ++i) {
    cells.clear();
    detail::append_record(cells, records[i]);
    if (!efficient.empty()) cells.push_back(efficient[i] ? "1" : "0");
    io::append_row(out, cells);
  }
  return out;
}

inline nlohmann::json archive_metadata(const ParetoArchive& a) {
  return {{"problem_name", a.problem_name},
          {"transform_ref", a.transform_ref},
          {"scalarizer", std::string(to_string(a.kind))},
          {"seed", a.seed},
          {"max_evals", a.max_evals},
          {"record_count", a.records.size()},
          {"efficient_count", a.efficient_count()}};
}

inline void save_archive(const ParetoArchive& a, const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path) {
  // std::vector<bool> is not contiguous; copy into a plain array for the span.
  std::unique_ptr<bool[]> flags(new bool[a.records.size()]);
  for (std::size_t i = 0; i < a.records.size(); ++i) flags[i] = a.efficient_mask[i];
  io::write_file(csv_path, records_csv(a.records, std::span<const bool>(flags.get(), a.records.size())));
  io::write_file(json_path, archive_metadata(a).dump(2) + "\n");
}

/// Reads records written by records_csv. The efficient column is optional.
inline std::vector<SolutionRecord> read_records(const io::CsvTable& table, std::vector<bool>* efficient = nullptr) {
  std::size_t k = 0;
  std::size_t m = 0;
  for (const auto& h : table.header) {
    if (h.size() > 1 && h[0] == 'w') ++k;
    if (h.size() > 1 && h[0] == 'x') ++m;
  }
  if (k == 0 || m == 0) throw ConfigError("archive CSV lacks w*/x* columns");
  auto col = [&](char c, std::size_t i) { return table.column(std::string(1, c) + std::to_string(i + 1)); };
  std::vector<std::size_t> cw(k), cx(m), cf(k), cs(k);
  for (std::size_t i = 0; i < k; ++i) {
    cw[i] = col('w', i);
    cf[i] = col('f', i);
    cs[i] = col('s', i);
  }
  for (std::size_t i = 0; i < m; ++i) cx[i] = col('x', i);
  const auto ct = table.column("total_score");
  std::size_t ce = table.header.size();
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "efficient") ce = i;
  }

  std::vector<SolutionRecord> out;
  out.reserve(table.rows.size());
  if (efficient) efficient->clear();
  auto grab = [](const std::vector<std::string>& row, const std::vector<std::size_t>& cols) {
    std::vector<double> v;
    v.reserve(cols.size());
    for (auto c : cols) v.push_back(io::parse_double(row[c]));
    return v;
  };
  for (const auto& row : table.rows) {
    SolutionRecord r;
    r.preference = PreferenceVector(grab(row, cw));
    r.x = DecisionVector(grab(row, cx));
    r.objectives = ObjectiveVector(grab(row, cf));
    r.scores = ScoreVector(grab(row, cs));
    r.total_score = io::parse_double(row[ct]);
    out.push_back(std::move(r));
    if (efficient) efficient->push_back(ce < row.size() ? row[ce] == "1" : true);
  }
  return out;
}

inline ParetoArchive load_archive(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
  ParetoArchive a;
  a.records = read_records(io::read_csv(csv_path), &a.efficient_mask);
  const auto meta = nlohmann::json::parse(io::read_file(json_path));
  a.problem_name = meta.at("problem_name").get<std::string>();
  a.transform_ref = meta.at("transform_ref").get<std::string>();
  a.kind = parse_scalarizer_kind(meta.at("scalarizer").get<std::string>());
  a.seed = meta.at("seed").get<std::uint64_t>();
  a.max_evals = meta.at("max_evals").get<std::size_t>();
  return a;
}

}  // namespace pitmo
