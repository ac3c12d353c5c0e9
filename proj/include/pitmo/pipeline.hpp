#pragma once

// Experiment pipeline behind the `pitmo` command-line tool: configuration,
// artifact layout, run manifest and one function per subcommand.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "pitmo/analysis.hpp"
#include "pitmo/core.hpp"
#include "pitmo/direct.hpp"
#include "pitmo/ecdf.hpp"
#include "pitmo/errors.hpp"
#include "pitmo/io.hpp"
#include "pitmo/pareto.hpp"
#include "pitmo/prefnet.hpp"
#include "pitmo/scalarize.hpp"

namespace pitmo {

inline constexpr const char* kToolVersion = "0.1.0";

/// Per-stage seeds. `from_base(n)` assigns n + stage index.
struct StageSeeds {
  std::uint64_t sample = 0;
  std::uint64_t ecdf = 1;
  std::uint64_t front = 2;
  std::uint64_t split = 3;
  std::uint64_t train = 4;
  std::uint64_t evaluate = 5;
  std::uint64_t probe = 6;

  static StageSeeds from_base(std::uint64_t n) { return {n, n + 1, n + 2, n + 3, n + 4, n + 5, n + 6}; }
};

struct RunConfig {
  std::string problem = "viennet";
  std::size_t sample_count = 1000;
  std::size_t ecdf_samples = 100'000;
  double tail_epsilon = kDefaultTailEpsilon;
  std::size_t front_prefs = 2000;
  double train_fraction = 0.05;
  std::size_t direct_max_evals = 2000;
  std::size_t direct_max_iters = 100'000;
  double direct_epsilon = 1e-4;
  std::size_t eval_holdout = 200;
  std::size_t hidden_units = 5;
  std::size_t train_epochs = 5000;
  std::size_t density_bins = 20;
  std::size_t homogeneity_grid = 101;
  std::size_t probe_count = 200;
  ScalarizerKind front_scalarizer = ScalarizerKind::raw_weighted_sum;
  ScalarizerKind probe_scalarizer = ScalarizerKind::raw_weighted_sum;
  StageSeeds seeds;
  std::filesystem::path out_dir = "pitmo-run";
  std::size_t jobs = 1;
  bool force = false;

  DirectConfig direct() const {
    DirectConfig c;
    c.max_evals = direct_max_evals;
    c.max_iters = direct_max_iters;
    c.epsilon_balance = direct_epsilon;
    c.seed = seeds.front;
    return c;
  }

  TrainConfig training() const {
    TrainConfig t;
    t.hidden_units = hidden_units;
    t.max_epochs = train_epochs;
    return t;
  }

  void validate() const {
    auto need = [](bool ok, const std::string& what) {
      if (!ok) throw ConfigError("invalid configuration: " + what);
    };
    need(!problem.empty(), "problem name is empty");
    need(sample_count >= 1, "sample_count must be >= 1");
    need(ecdf_samples >= 2, "ecdf_samples must be >= 2");
    need(tail_epsilon > 0.0 && tail_epsilon < 0.5, "tail_epsilon must be in (0, 0.5)");
    need(front_prefs >= 1, "front_prefs must be >= 1");
    need(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must be in (0, 1)");
    need(direct_max_evals >= 1, "direct_max_evals must be >= 1");
    need(direct_max_iters >= 1, "direct_max_iters must be >= 1");
    need(direct_epsilon >= 0.0, "direct_epsilon must be >= 0");
    need(eval_holdout >= 1, "eval_holdout must be >= 1");
    need(hidden_units >= 1, "hidden_units must be >= 1");
    need(density_bins >= 1, "density_bins must be >= 1");
    need(homogeneity_grid >= 2, "homogeneity_grid must be >= 2");
    need(probe_count >= 1, "probe_count must be >= 1");
    need(jobs >= 1, "jobs must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"problem", problem},
            {"sample_count", sample_count},
            {"ecdf_samples", ecdf_samples},
            {"tail_epsilon", tail_epsilon},
            {"front_prefs", front_prefs},
            {"train_fraction", train_fraction},
            {"direct_max_evals", direct_max_evals},
            {"direct_max_iters", direct_max_iters},
            {"direct_epsilon", direct_epsilon},
            {"eval_holdout", eval_holdout},
            {"hidden_units", hidden_units},
            {"train_epochs", train_epochs},
            {"density_bins", density_bins},
            {"homogeneity_grid", homogeneity_grid},
            {"probe_count", probe_count},
            {"front_scalarizer", std::string(to_string(front_scalarizer))},
            {"probe_scalarizer", std::string(to_string(probe_scalarizer))},
            {"seeds",
             {{"sample", seeds.sample},
              {"ecdf", seeds.ecdf},
              {"front", seeds.front},
              {"split", seeds.split},
              {"train", seeds.train},
              {"evaluate", seeds.evaluate},
              {"probe", seeds.probe}}}};
  }

  /// Overlays the keys present in `j`; unknown keys are rejected.
  void merge_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    auto count = [](const std::string& key, const nlohmann::json& v) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw ConfigError("'" + key + "' must be a non-negative integer");
      return v.get<std::size_t>();
    };
    try {
      for (const auto& [key, v] : j.items()) {
        if (key == "problem") problem = v.get<std::string>();
        else if (key == "sample_count") sample_count = count(key, v);
        else if (key == "ecdf_samples") ecdf_samples = count(key, v);
        else if (key == "tail_epsilon") tail_epsilon = v.get<double>();
        else if (key == "front_prefs") front_prefs = count(key, v);
        else if (key == "train_fraction") train_fraction = v.get<double>();
        else if (key == "direct_max_evals") direct_max_evals = count(key, v);
        else if (key == "direct_max_iters") direct_max_iters = count(key, v);
        else if (key == "direct_epsilon") direct_epsilon = v.get<double>();
        else if (key == "eval_holdout") eval_holdout = count(key, v);
        else if (key == "hidden_units") hidden_units = count(key, v);
        else if (key == "train_epochs") train_epochs = count(key, v);
        else if (key == "density_bins") density_bins = count(key, v);
        else if (key == "homogeneity_grid") homogeneity_grid = count(key, v);
        else if (key == "probe_count") probe_count = count(key, v);
        else if (key == "front_scalarizer") front_scalarizer = parse_scalarizer_kind(v.get<std::string>());
        else if (key == "probe_scalarizer") probe_scalarizer = parse_scalarizer_kind(v.get<std::string>());
        else if (key == "out_dir") out_dir = v.get<std::string>();
        else if (key == "jobs") jobs = count(key, v);
        else if (key == "seed") seeds = StageSeeds::from_base(count(key, v));
        else if (key == "seeds") {
          for (const auto& [stage, s] : v.items()) {
            const auto n = count(key + "." + stage, s);
            if (stage == "sample") seeds.sample = n;
            else if (stage == "ecdf") seeds.ecdf = n;
            else if (stage == "front") seeds.front = n;
            else if (stage == "split") seeds.split = n;
            else if (stage == "train") seeds.train = n;
            else if (stage == "evaluate") seeds.evaluate = n;
            else if (stage == "probe") seeds.probe = n;
            else throw ConfigError("unknown seed stage '" + stage + "'");
          }
        } else {
          throw ConfigError("unknown configuration key '" + key + "'");
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("configuration type error: ") + e.what());
    }
  }

  static RunConfig from_file(const std::filesystem::path& path) {
    RunConfig c;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    c.merge_json(j);
    return c;
  }
};

/// Artifact file names, relative to the output directory.
namespace artifact {
inline constexpr const char* samples = "samples.csv";
inline constexpr const char* ecdf_csv = "ecdf.csv";
inline constexpr const char* ecdf_json = "ecdf.json";
inline constexpr const char* front_csv = "front.csv";
inline constexpr const char* front_json = "front.json";
inline constexpr const char* ranked_csv = "ranked.csv";
inline constexpr const char* density_csv = "total_score_density.csv";
inline constexpr const char* model_json = "model.json";
inline constexpr const char* split_json = "split.json";
inline constexpr const char* correction_csv = "correction_report.csv";
inline constexpr const char* correction_json = "correction_report.json";
inline constexpr const char* evaluation_csv = "evaluation_report.csv";
inline constexpr const char* evaluation_json = "evaluation_report.json";
inline constexpr const char* evaluation_errors = "evaluation_errors.csv";
inline constexpr const char* homogeneity_csv = "analysis/homogeneity.csv";
inline constexpr const char* fallacy_json = "analysis/score_gains.json";
inline constexpr const char* probe_csv = "analysis/feasibility_probe.csv";
inline constexpr const char* probe_json = "analysis/feasibility_probe.json";
inline constexpr const char* manifest = "manifest.json";
}  // namespace artifact

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

inline std::string file_sha256(const std::filesystem::path& p) { return sha256_hex(io::read_file(p)); }

/// manifest.json: config snapshot, tool version, per-artifact checksums and
/// per-stage summaries. Each command merges its own entries.
class RunManifest {
 public:
  explicit RunManifest(std::filesystem::path dir) : dir_(std::move(dir)) {
    const auto path = dir_ / artifact::manifest;
    if (std::filesystem::exists(path)) data_ = nlohmann::json::parse(io::read_file(path));
    if (!data_.is_object()) data_ = nlohmann::json::object();
  }

  void record_config(const RunConfig& c) {
    data_["tool_version"] = kToolVersion;
    data_["config"] = c.to_json();
  }

  void record_artifact(const std::string& rel) { data_["artifacts"][rel] = file_sha256(dir_ / rel); }

  /// Stage summary plus the configuration the stage ran with.
  void record_stage(const std::string& stage, nlohmann::json summary) {
    if (data_.contains("config")) summary["config"] = data_["config"];
    data_["stages"][stage] = std::move(summary);
  }

  const nlohmann::json& data() const noexcept { return data_; }

  void save() const { io::write_file(dir_ / artifact::manifest, data_.dump(2) + "\n"); }

  /// Relative paths whose file is missing or whose checksum changed.
  std::vector<std::string> verify() const {
    std::vector<std::string> bad;
    if (!data_.contains("artifacts")) return bad;
    for (const auto& [rel, sum] : data_["artifacts"].items()) {
      const auto p = dir_ / rel;
      if (!std::filesystem::exists(p) || file_sha256(p) != sum.get<std::string>()) bad.push_back(rel);
    }
    return bad;
  }

 private:
  std::filesystem::path dir_;
  nlohmann::json data_;
};

namespace detail {

inline void log(const std::string& msg) { std::cerr << "[pitmo] " << msg << '\n'; }

inline void guard_overwrite(const RunConfig& c, std::initializer_list<const char*> rels) {
  if (c.force) return;
  for (const char* rel : rels) {
    if (std::filesystem::exists(c.out_dir / rel)) {
      throw ConfigError((c.out_dir / rel).string() + " exists; pass --force to overwrite");
    }
  }
}

inline std::filesystem::path require(const RunConfig& c, const char* rel) {
  auto p = c.out_dir / rel;
  if (!std::filesystem::exists(p)) throw ConfigError("missing input artifact " + p.string());
  return p;
}

inline std::shared_ptr<const ScoreTransform> load_run_transform(const RunConfig& c) {
  return std::make_shared<const ScoreTransform>(
      load_transform(require(c, artifact::ecdf_csv), require(c, artifact::ecdf_json)));
}

inline ParetoArchive load_run_archive(const RunConfig& c) {
  return load_archive(require(c, artifact::front_csv), require(c, artifact::front_json));
}

inline std::string errors_csv(const TradeoffReport& r) {
  std::string out = "method,index,mae\n";
  for (const auto& l : r.method_labels) {
    const auto& e = r.per_solution_mae.at(l);
    for (std::size_t i = 0; i < e.size(); ++i) out += l + ',' + std::to_string(i) + ',' + io::format_double(e[i]) + '\n';
  }
  return out;
}

// Archive restricted to the given efficient-record indices (dataset order).
inline ParetoArchive sub_archive(const ParetoArchive& a, const std::vector<std::size_t>& efficient_indices) {
  const auto eff = a.efficient_records();
  ParetoArchive out = a;
  out.records.clear();
  for (auto i : efficient_indices) out.records.push_back(eff[i]);
  out.efficient_mask.assign(out.records.size(), true);
  return out;
}

struct TradeoffRun {
  std::vector<double> errors;
  std::vector<SolutionRecord> records;
};

inline TradeoffRun solve_preferences(const Problem& p, const std::vector<PreferenceVector>& prefs,
                                     const Scalarizer& s, const ScoreTransform& t, const DirectConfig& cfg,
                                     std::size_t jobs) {
  TradeoffRun run;
  run.records.resize(prefs.size());
  parallel_for(prefs.size(), jobs, [&](std::size_t i) { run.records[i] = solve_for_preference(p, prefs[i], s, cfg, t); });
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    run.errors.push_back(trade_off_error(prefs[i].view(), run.records[i].scores.view()));
  }
  return run;
}

inline TradeoffRun solve_corrected(const Problem& p, const CorrectionModel& m,
                                   const std::vector<std::vector<double>>& desired, const Scalarizer& s,
                                   const ScoreTransform& t, const DirectConfig& cfg, std::size_t jobs) {
  TradeoffRun run;
  run.records.resize(desired.size());
  parallel_for(desired.size(), jobs,
               [&](std::size_t i) { run.records[i] = corrected_solve(m, desired[i], p, t, s, cfg); });
  for (std::size_t i = 0; i < desired.size(); ++i) {
    run.errors.push_back(trade_off_error(desired[i], run.records[i].scores.view()));
  }
  return run;
}

}  // namespace detail

// --- commands --------------------------------------------------------------

inline void cmd_sample(const RunConfig& c, const ProblemRegistry& reg) {
  c.validate();
  detail::guard_overwrite(c, {artifact::samples});
  const auto& p = reg.get(c.problem);
  const auto xs = sample_decision_space(p, c.sample_count, c.seeds.sample);
  io::write_file(c.out_dir / artifact::samples, decision_samples_csv(xs, p.decision_dim()));
  RunManifest m(c.out_dir);
  m.record_config(c);
  m.record_artifact(artifact::samples);
  m.record_stage("sample", {{"count", xs.size()}, {"seed", c.seeds.sample}});
  m.save();
}

inline ScoreTransform cmd_ecdf(const RunConfig& c, const ProblemRegistry& reg) {
  c.validate();
  detail::guard_overwrite(c, {artifact::ecdf_csv, artifact::ecdf_json});
  const auto& p = reg.get(c.problem);
  detail::log("building ECDFs from " + std::to_string(c.ecdf_samples) + " samples");
  auto t = build_transform(p, c.ecdf_samples, c.seeds.ecdf, c.tail_epsilon, c.jobs);
  std::filesystem::create_directories(c.out_dir);
  save_transform(t, c.out_dir / artifact::ecdf_csv, c.out_dir / artifact::ecdf_json);
  RunManifest m(c.out_dir);
  m.record_config(c);
  m.record_artifact(artifact::ecdf_csv);
  m.record_artifact(artifact::ecdf_json);
  m.record_stage("ecdf", {{"fingerprint", t.fingerprint()}, {"samples", c.ecdf_samples}});
  m.save();
  return t;
}

inline ParetoArchive cmd_front(const RunConfig& c, const ProblemRegistry& reg) {
  c.validate();
  detail::guard_overwrite(c, {artifact::front_csv, artifact::front_json});
  const auto& p = reg.get(c.problem);
  const auto t = detail::load_run_transform(c);
  detail::log("solving " + std::to_string(c.front_prefs) + " preferences (" +
              std::string(to_string(c.front_scalarizer)) + ")");
  auto a = build_front(p, t, c.front_prefs, c.front_scalarizer, c.direct(), c.seeds.front, c.jobs);
  save_archive(a, c.out_dir / artifact::front_csv, c.out_dir / artifact::front_json);
  const double frac = static_cast<double>(a.efficient_count()) / static_cast<double>(a.records.size());
  RunManifest m(c.out_dir);
  m.record_config(c);
  m.record_artifact(artifact::front_csv);
  m.record_artifact(artifact::front_json);
  m.record_stage("front", {{"records", a.records.size()},
                           {"efficient", a.efficient_count()},
                           {"efficient_fraction", frac},
                           {"scalarizer", std::string(to_string(c.front_scalarizer))}});
  m.save();
  detail::log(std::to_string(a.efficient_count()) + " of " + std::to_string(a.records.size()) + " efficient");
  return a;
}

inline std::vector<SolutionRecord> cmd_order(const RunConfig& c) {
  c.validate();
  detail::guard_overwrite(c, {artifact::ranked_csv, artifact::density_csv});
  const auto a = detail::load_run_archive(c);
  const auto ranked = order_by_total_score(a);
  io::write_file(c.out_dir / artifact::ranked_csv, records_csv(ranked));
  io::write_file(c.out_dir / artifact::density_csv, histogram_csv(total_score_density(a, c.density_bins)));
  RunManifest m(c.out_dir);
  m.record_config(c);
  m.record_artifact(artifact::ranked_csv);
  m.record_artifact(artifact::density_csv);
  nlohmann::json summary{{"ranked", ranked.size()}};
  if (!ranked.empty()) {
    summary["best_objectives"] = ranked.front().objectives.values();
    summary["best_total_score"] = ranked.front().total_score;
    summary["worst_total_score"] = ranked.back().total_score;
  }
  m.record_stage("order", summary);
  m.save();
  return ranked;
}

/// Trains the correction model and reports org / corr / online errors on the
/// held-out split: org uses the archived (preference, scores) pairs, online
/// re-solves those preferences over scores, corr solves the corrected
/// preference for each held-out score trade-off.
inline TradeoffReport cmd_correct(const RunConfig& c, const ProblemRegistry& reg) {
  c.validate();
  detail::guard_overwrite(c, {artifact::model_json, artifact::correction_csv, artifact::correction_json,
                              artifact::split_json});
  const auto& p = reg.get(c.problem);
  const auto t = detail::load_run_transform(c);
  const auto a = detail::load_run_archive(c);
  const std::size_t n_eff = a.efficient_count();
  const auto n_train = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(c.train_fraction * static_cast<double>(n_eff))));
  const auto d = make_dataset(a, n_train, c.seeds.split);
  detail::log("training on " + std::to_string(d.train.size()) + " pairs, " + std::to_string(d.validation.size()) +
              " held out");
  const auto tr = train(d, c.training(), c.seeds.train);
  save_model(tr.model, c.out_dir / artifact::model_json);
  io::write_file(c.out_dir / artifact::split_json,
                 nlohmann::json{{"train", d.train}, {"validation", d.validation}}.dump() + "\n");

  const auto& held = d.validation.empty() ? d.train : d.validation;
  std::vector<std::size_t> chosen(held.begin(), held.begin() + static_cast<std::ptrdiff_t>(
                                                                   std::min(held.size(), c.eval_holdout)));
  const auto eff = a.efficient_records();
  std::vector<double> org;
  std::vector<PreferenceVector> prefs;
  std::vector<std::vector<double>> desired;
  for (auto i : chosen) {
    org.push_back(trade_off_error(eff[i].preference.view(), eff[i].scores.view()));
    prefs.push_back(eff[i].preference);
    desired.push_back(d.pairs[i].score);
  }
  const auto front_s = Scalarizer::of_kind(a.kind, t);
  const auto online = detail::solve_preferences(p, prefs, Scalarizer::on_scores(t), *t, c.direct(), c.jobs);
  const auto corr = detail::solve_corrected(p, tr.model, desired, front_s, *t, c.direct(), c.jobs);
  const auto report = quantile_table({{"org", org}, {"corr", corr.errors}, {"online", online.errors}});

  io::write_file(c.out_dir / artifact::correction_csv, report_csv(report));
  auto rj = report_json(report);
  rj["training"] = {{"initial_loss", tr.initial_loss},
                    {"final_loss", tr.final_loss},
                    {"epochs", tr.epochs},
                    {"converged", tr.converged}};
  io::write_file(c.out_dir / artifact::correction_json, rj.dump(2) + "\n");
  if (!tr.converged) detail::log("warning: training stopped at max epochs before converging");

  RunManifest m(c.out_dir);
  m.record_config(c);
  for (const char* rel : {artifact::model_json, artifact::split_json, artifact::correction_csv, artifact::correction_json}) {
    m.record_artifact(rel);
  }
  m.record_stage("correct", {{"train_pairs", d.train.size()},
                             {"validation_pairs", d.validation.size()},
                             {"converged", tr.converged}});
  m.save();
  return report;
}

/// Compares the three methods on fresh inputs: org and online solve freshly
/// sampled preferences (raw and score weighting respectively); corr solves
/// corrected preferences for desired trade-offs drawn by jittered
/// resampling of the held-out split. Without a model the corr column is
/// omitted.
inline TradeoffReport cmd_evaluate(const RunConfig& c, const ProblemRegistry& reg) {
  c.validate();
  detail::guard_overwrite(c, {artifact::evaluation_csv, artifact::evaluation_json, artifact::evaluation_errors});
  const auto& p = reg.get(c.problem);
  const auto t = detail::load_run_transform(c);
  const auto prefs = sample_preferences(p.objective_count(), c.eval_holdout, c.seeds.evaluate);
  const auto org = detail::solve_preferences(p, prefs, Scalarizer::raw(), *t, c.direct(), c.jobs);
  const auto online = detail::solve_preferences(p, prefs, Scalarizer::on_scores(t), *t, c.direct(), c.jobs);

  std::vector<std::pair<std::string, std::vector<double>>> columns{{"org", org.errors}};
  const auto model_path = c.out_dir / artifact::model_json;
  if (std::filesystem::exists(model_path)) {
    const auto model = load_model(model_path);
    const auto a = detail::load_run_archive(c);
    const auto split = nlohmann::json::parse(io::read_file(detail::require(c, artifact::split_json)));
    auto held = split.at("validation").get<std::vector<std::size_t>>();
    if (held.size() < 10) held = split.at("train").get<std::vector<std::size_t>>();
    const auto pool = detail::sub_archive(a, held);
    const auto targets = sample_feasible_preferences(pool, c.eval_holdout, c.seeds.evaluate);
    std::vector<std::vector<double>> desired;
    for (const auto& w : targets) desired.push_back(max_normalize(w.view()));
    const auto corr = detail::solve_corrected(p, model, desired, Scalarizer::of_kind(a.kind, t), *t, c.direct(), c.jobs);
    columns.emplace_back("corr", corr.errors);
  } else {
    detail::log("no model.json; skipping the corrected column");
  }
  columns.emplace_back("online", online.errors);
  const auto report = quantile_table(columns);
  io::write_file(c.out_dir / artifact::evaluation_csv, report_csv(report));
  io::write_file(c.out_dir / artifact::evaluation_json, report_json(report).dump(2) + "\n");
  io::write_file(c.out_dir / artifact::evaluation_errors, detail::errors_csv(report));

  RunManifest m(c.out_dir);
  m.record_config(c);
  for (const char* rel : {artifact::evaluation_csv, artifact::evaluation_json, artifact::evaluation_errors}) {
    m.record_artifact(rel);
  }
  nlohmann::json medians;
  for (const auto& l : report.method_labels) medians[l] = report.median_of(l);
  m.record_stage("evaluate", {{"held_out", c.eval_holdout}, {"medians", medians}});
  m.save();
  return report;
}

struct AnalysisArtifacts {
  TradeoffDensity density;
  HomogeneityDemo homogeneity;
  FeasibleProbeResult probe;
  nlohmann::json score_gains;
};

inline AnalysisArtifacts cmd_analyze(const RunConfig& c, const ProblemRegistry& reg) {
  c.validate();
  detail::guard_overwrite(c, {artifact::homogeneity_csv, artifact::fallacy_json, artifact::probe_csv,
                              artifact::probe_json});
  const auto& p = reg.get(c.problem);
  const auto t = detail::load_run_transform(c);
  const auto a = detail::load_run_archive(c);
  AnalysisArtifacts out;
  RunManifest m(c.out_dir);
  m.record_config(c);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i + 1 < p.objective_count(); ++i) pairs.emplace_back(i, i + 1);
  out.density = tradeoff_density(a, pairs, c.density_bins);
  for (const auto& pd : out.density.pairs) {
    const auto tag = "s" + std::to_string(pd.i + 1) + "_s" + std::to_string(pd.j + 1);
    const auto joint = "analysis/density_" + tag + ".csv";
    const auto ratio = "analysis/ratio_" + tag + ".csv";
    io::write_file(c.out_dir / joint, joint_density_csv(pd));
    io::write_file(c.out_dir / ratio, histogram_csv(pd.ratio));
    m.record_artifact(joint);
    m.record_artifact(ratio);
  }

  out.homogeneity = homogeneity_demo(*t, c.homogeneity_grid);
  io::write_file(c.out_dir / artifact::homogeneity_csv, homogeneity_csv(out.homogeneity));

  out.score_gains = nlohmann::json::object();
  std::vector<double> min_scores(p.objective_count(), 1.0);
  for (const auto& r : a.efficient_records()) {
    for (std::size_t i = 0; i < r.scores.size(); ++i) min_scores[i] = std::min(min_scores[i], r.scores[i]);
  }
  out.score_gains["min_efficient_scores"] = min_scores;
  if (p.name() == "viennet") {
    const auto& f2 = t->ecdf(1);
    out.score_gains["f2_60_to_50"] = score_gain(f2, 60.0, 50.0);
    out.score_gains["f2_30_to_20"] = score_gain(f2, 30.0, 20.0);
  }
  io::write_file(c.out_dir / artifact::fallacy_json, out.score_gains.dump(2) + "\n");

  const auto prefs = sample_feasible_preferences(a, c.probe_count, c.seeds.probe);
  out.probe = feasibility_probe(p, t, prefs, c.probe_scalarizer, c.direct(), c.jobs);
  io::write_file(c.out_dir / artifact::probe_csv, probe_csv(out.probe));
  io::write_file(c.out_dir / artifact::probe_json,
                 nlohmann::json{{"component_medians", out.probe.component_medians},
                                {"overall_median", out.probe.overall_median},
                                {"scalarizer", std::string(to_string(c.probe_scalarizer))},
                                {"count", out.probe.records.size()}}
                         .dump(2) +
                     "\n");
  for (const char* rel : {artifact::homogeneity_csv, artifact::fallacy_json, artifact::probe_csv, artifact::probe_json}) {
    m.record_artifact(rel);
  }
  m.record_stage("analyze", {{"probe_overall_median", out.probe.overall_median}});
  m.save();
  return out;
}

/// Runs `body` and maps failures to the tool's exit codes: 2 for
/// configuration or input errors, 3 for numerical failures, 1 otherwise.
template <class Body>
int run_guarded(Body&& body, std::ostream& err = std::cerr) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateDistributionError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

/// Checksums of every recorded artifact; returns the mismatching ones.
inline std::vector<std::string> cmd_verify(const RunConfig& c) {
  if (!std::filesystem::exists(c.out_dir / artifact::manifest)) {
    throw ConfigError("no manifest in " + c.out_dir.string());
  }
  return RunManifest(c.out_dir).verify();
}

}  // namespace pitmo
