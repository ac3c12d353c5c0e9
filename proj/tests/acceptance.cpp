// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "pitmo/pipeline.hpp"
#include "support.hpp"

using namespace pitmo;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail << std::endl;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

struct DeskRun {
  ScoreTransform transform;
  ParetoArchive archive;
  std::vector<SolutionRecord> ranked;
  TradeoffReport correction;
  nlohmann::json artifacts;
};

DeskRun run_pipeline(const std::filesystem::path& out) {
  RunConfig c;
  c.out_dir = out;
  c.jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto reg = ProblemRegistry::with_builtins();
  auto t = cmd_ecdf(c, reg);
  auto a = cmd_front(c, reg);
  auto ranked = cmd_order(c);
  auto corr = cmd_correct(c, reg);
  cmd_evaluate(c, reg);
  cmd_analyze(c, reg);
  const auto manifest = nlohmann::json::parse(io::read_file(out / artifact::manifest));
  return {std::move(t), std::move(a), std::move(ranked), std::move(corr), manifest["artifacts"]};
}

}  // namespace

int main() {
  test::TempDir first("acceptance-a");
  test::TempDir second("acceptance-b");
  std::cerr << "desk-scale pipeline, run 1\n";
  const auto run = run_pipeline(first.path());
  const auto& a = run.archive;
  const auto eff = a.efficient_records();

  {
    double lo = 1e9, hi = -1e9;
    for (const auto& r : eff) {
      lo = std::min(lo, r.total_score);
      hi = std::max(hi, r.total_score);
    }
    report(1, "total-score interval", within(lo, 1.79, 2.92) && within(hi, 1.79, 2.92) && within(hi, 2.80, 2.92),
           "[" + fmt(lo) + ", " + fmt(hi) + "] over " + std::to_string(eff.size()) + " efficient");
  }

  {
    const auto& f = run.ranked.front().objectives;
    const bool ok = std::abs(f[0] - 0.9231) <= 0.05 && std::abs(f[1] - 15.1532) <= 0.05 && std::abs(f[2] - 0.0307) <= 0.02;
    report(2, "best-ordered solution", ok, "f = (" + fmt(f[0]) + ", " + fmt(f[1]) + ", " + fmt(f[2]) + ")");
  }

  {
    double s2 = 1.0;
    for (const auto& r : eff) s2 = std::min(s2, r.scores[1]);
    report(3, "objective-2 score floor", within(s2, 0.65, 0.72), "min s2 = " + fmt(s2));
  }

  {
    const auto& f2 = run.transform.ecdf(1);
    const double d1 = f2.score(50.0) - f2.score(60.0);
    const double d2 = f2.score(20.0) - f2.score(30.0);
    report(4, "f2 score deltas", std::abs(d1 - 0.037) <= 0.01 && std::abs(d2 - 0.269) <= 0.03,
           "60->50 " + fmt(d1) + ", 30->20 " + fmt(d2));
  }

  {
    const auto& r = run.correction;
    const double org = r.median_of("org"), corr = r.median_of("corr"), online = r.median_of("online");
    const bool ok = within(org, 0.45, 0.65) && within(online, 0.20, 0.40) && within(corr, 0.05, 0.25) &&
                    r.max_of("org") >= 0.90 && r.max_of("corr") <= 0.75 && corr < online && online < org;
    report(5, "trade-off error table", ok,
           "median org/corr/online " + fmt(org) + "/" + fmt(corr) + "/" + fmt(online) + ", max org " +
               fmt(r.max_of("org")) + ", max corr " + fmt(r.max_of("corr")));
  }

  {
    const auto p = make_viennet();
    const auto xs = sample_decision_space(p, 10000, 9001);
    std::vector<std::vector<double>> per(3);
    for (const auto& x : xs) {
      const auto s = run.transform.score(p.evaluate(x));
      for (std::size_t j = 0; j < 3; ++j) per[j].push_back(s[j]);
    }
    double worst = 0.0;
    for (auto& v : per) worst = std::max(worst, test::ks_uniform(v));
    report(6, "held-out scores uniform", worst < 0.03, "max KS " + fmt(worst));
  }

  {
    const auto small = build_transform(make_viennet(), 2500, 2);
    double worst = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const auto& s = small.ecdf(j);
      const auto& b = run.transform.ecdf(j);
      for (double x : b.knots_x()) worst = std::max(worst, std::abs(s.cdf(x) - b.cdf(x)));
      for (double x : s.knots_x()) worst = std::max(worst, std::abs(s.cdf(x) - b.cdf(x)));
    }
    report(7, "2500-sample ECDF", worst < 0.05, "max sup distance " + fmt(worst));
  }

  {
    Rng sizes(8);
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto n = static_cast<std::size_t>(1 + sizes.next() % 500);
      const auto pts = test::random_points(n, 2 + seed % 3, seed);
      mismatches += nondominated_mask(pts) == test::brute_force_mask(pts) ? 0 : 1;
    }
    report(8, "dominance oracle", mismatches == 0, std::to_string(mismatches) + " of 50 archives differ");
  }

  {
    DirectConfig c;
    c.max_evals = 500;
    c.record_trace = true;
    const auto sphere = [](const DecisionVector& x) {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s;
    };
    const auto r = minimize(sphere, BoxBounds::cube(2, -4, 4), c);
    bool monotone = r.evals_used <= 500;
    auto check_trace = [&monotone](const DirectResult& res) {
      for (std::size_t i = 1; i < res.trace.size(); ++i) monotone = monotone && res.trace[i].second <= res.trace[i - 1].second;
    };
    check_trace(r);
    const auto p = make_viennet();
    for (const auto& w : sample_preferences(3, 20, 4)) {
      const auto f = scalarize(Scalarizer::raw(), p, w);
      DirectConfig vc;
      vc.record_trace = true;
      check_trace(minimize(f, p.bounds(), vc));
    }
    report(9, "DIRECT-L sanity", r.best_f < 1e-4 && monotone,
           "sphere best_f " + sci(r.best_f) + " in " + std::to_string(r.evals_used) + " evals, traces " +
               (monotone ? "monotone" : "not monotone"));
  }

  {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto d = test::random_dataset(12, 3, seed);
      worst = std::max(worst, test::gradient_check(CorrectionModel::random(3, 5, seed + 100), d));
    }
    report(10, "gradient check", worst < 1e-4, "max relative error " + sci(worst));
  }

  {
    std::cerr << "desk-scale pipeline, run 2\n";
    const auto again = run_pipeline(second.path());
    std::size_t differ = 0;
    for (const auto& [rel, sum] : run.artifacts.items()) {
      differ += again.artifacts.contains(rel) && again.artifacts[rel] == sum ? 0 : 1;
    }
    const bool same_keys = run.artifacts.size() == again.artifacts.size();
    report(11, "determinism", differ == 0 && same_keys,
           std::to_string(run.artifacts.size()) + " artifacts, " + std::to_string(differ) + " checksum mismatches");
  }

  {
    std::vector<std::vector<double>> neg_scores;
    for (const auto& r : a.records) {
      std::vector<double> v;
      for (double s : r.scores) v.push_back(-s);
      neg_scores.push_back(std::move(v));
    }
    const bool same = nondominated_mask(neg_scores) == a.efficient_mask;
    report(12, "score/objective dominance", same, same ? "identical efficient sets" : "efficient sets differ");
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
