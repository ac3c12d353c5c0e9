// pitmo: command-line driver for the score-transform experiment pipeline.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pitmo/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  std::optional<std::string> scalarizer;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> prefs;
  std::optional<std::size_t> max_evals;
  std::optional<std::size_t> holdout;
  bool force = false;
};

// Config file first, flags on top.
pitmo::RunConfig resolve(const Flags& f) {
  auto c = f.config.empty() ? pitmo::RunConfig{} : pitmo::RunConfig::from_file(f.config);
  if (f.seed) c.seeds = pitmo::StageSeeds::from_base(*f.seed);
  if (f.jobs) c.jobs = *f.jobs;
  if (f.out) c.out_dir = *f.out;
  if (f.scalarizer) {
    c.front_scalarizer = pitmo::parse_scalarizer_kind(*f.scalarizer);
    c.probe_scalarizer = c.front_scalarizer;
  }
  if (f.samples) {
    c.sample_count = *f.samples;
    c.ecdf_samples = *f.samples;
  }
  if (f.prefs) c.front_prefs = *f.prefs;
  if (f.max_evals) c.direct_max_evals = *f.max_evals;
  if (f.holdout) c.eval_holdout = *f.holdout;
  c.force = f.force;
  return c;
}

void print_report(const pitmo::TradeoffReport& r) { std::cout << pitmo::report_csv(r); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score-based trade-off analysis for multi-objective problems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pitmo::kToolVersion));

  Flags f;
  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "base seed; stage seeds are base + offset");
  app.add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", f.out, "output directory");
  app.add_option("--scalarizer", f.scalarizer, "raw or score")->check(CLI::IsMember({"raw", "score"}));
  app.add_option("--samples", f.samples, "decision-space sample count (sample, ecdf)");
  app.add_option("--prefs", f.prefs, "preference count for the front");
  app.add_option("--max-evals", f.max_evals, "DIRECT-L evaluation budget per solve");
  app.add_option("--holdout", f.holdout, "held-out evaluation size");
  app.add_flag("--force", f.force, "overwrite existing artifacts");

  auto* sample = app.add_subcommand("sample", "write uniform decision-space samples");
  auto* ecdf = app.add_subcommand("ecdf", "build the per-objective score transform");
  auto* front = app.add_subcommand("front", "solve sampled preferences and filter the efficient set");
  auto* order = app.add_subcommand("order", "rank efficient solutions by total score");
  auto* correct = app.add_subcommand("correct", "train the preference correction model");
  auto* evaluate = app.add_subcommand("evaluate", "compare org / corr / online on fresh inputs");
  auto* analyze = app.add_subcommand("analyze", "density, homogeneity and feasibility analyses");
  auto* verify = app.add_subcommand("verify", "recheck artifact checksums against the manifest");
  for (auto* sub : {sample, ecdf, front, order, correct, evaluate, analyze, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  return pitmo::run_guarded([&]() -> int {
    const auto cfg = resolve(f);
    const auto reg = pitmo::ProblemRegistry::with_builtins();
    if (sample->parsed()) {
      pitmo::cmd_sample(cfg, reg);
    } else if (ecdf->parsed()) {
      const auto t = pitmo::cmd_ecdf(cfg, reg);
      std::cout << "fingerprint " << t.fingerprint() << '\n';
    } else if (front->parsed()) {
      const auto a = pitmo::cmd_front(cfg, reg);
      std::cout << a.efficient_count() << " efficient of " << a.records.size() << '\n';
    } else if (order->parsed()) {
      const auto ranked = pitmo::cmd_order(cfg);
      if (!ranked.empty()) {
        std::cout << "best total score " << pitmo::io::format_double(ranked.front().total_score) << '\n';
      }
    } else if (correct->parsed()) {
      print_report(pitmo::cmd_correct(cfg, reg));
    } else if (evaluate->parsed()) {
      print_report(pitmo::cmd_evaluate(cfg, reg));
    } else if (analyze->parsed()) {
      const auto r = pitmo::cmd_analyze(cfg, reg);
      std::cout << "probe median deviation " << pitmo::io::format_double(r.probe.overall_median) << '\n';
    } else if (verify->parsed()) {
      const auto bad = pitmo::cmd_verify(cfg);
      for (const auto& rel : bad) std::cout << "MISMATCH " << rel << '\n';
      if (!bad.empty()) return 1;
      std::cout << "all checksums match\n";
    }
    return 0;
  });
}
