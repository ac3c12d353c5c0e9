#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "pitmo/pareto.hpp"
#include "support.hpp"

using namespace pitmo;

namespace {

std::shared_ptr<const ScoreTransform> transform() {
  static const auto t = std::make_shared<const ScoreTransform>(build_transform(make_viennet(), 20000, 1));
  return t;
}

DirectConfig budget(std::size_t n) {
  DirectConfig c;
  c.max_evals = n;
  return c;
}

const ParetoArchive& small_front() {
  static const ParetoArchive a =
      build_front(make_viennet(), transform(), 150, ScalarizerKind::raw_weighted_sum, budget(600), 11);
  return a;
}

SolutionRecord record_with(std::vector<double> f, double total) {
  SolutionRecord r;
  r.preference = PreferenceVector(std::vector<double>(f.size(), 1.0 / static_cast<double>(f.size())));
  r.x = DecisionVector({0.0});
  r.objectives = ObjectiveVector(std::move(f));
  r.scores = ScoreVector(std::vector<double>(r.objectives.size(), 0.5));
  r.total_score = total;
  return r;
}

}  // namespace

TEST(Dominates, Examples) {
  EXPECT_TRUE(dominates(ObjectiveVector({1, 2}), ObjectiveVector({2, 3})));
  EXPECT_FALSE(dominates(ObjectiveVector({1, 2}), ObjectiveVector({1, 2})));
  EXPECT_FALSE(dominates(ObjectiveVector({1, 3}), ObjectiveVector({2, 2})));
  EXPECT_FALSE(dominates(ObjectiveVector({2, 2}), ObjectiveVector({1, 3})));
  EXPECT_TRUE(dominates(ObjectiveVector({1, 2}), ObjectiveVector({1, 3})));
  EXPECT_THROW(dominates(ObjectiveVector({1, 2}), ObjectiveVector({1, 2, 3})), ValidationError);
}

TEST(FilterEfficient, SingleAndShiftedDuplicate) {
  std::vector<SolutionRecord> one{record_with({1, 2, 3}, 0)};
  EXPECT_EQ(filter_efficient(one), std::vector<bool>{true});
  std::vector<SolutionRecord> two{record_with({1, 2, 3}, 0), record_with({2, 3, 4}, 0)};
  EXPECT_EQ(filter_efficient(two), (std::vector<bool>{true, false}));
}

TEST(FilterEfficient, ExactDuplicatesBothKept) {
  std::vector<std::vector<double>> pts{{1, 2}, {1, 2}, {0, 3}};
  EXPECT_EQ(nondominated_mask(pts), (std::vector<bool>{true, true, true}));
}

TEST(FilterEfficient, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed + 1000);
    const auto n = 1 + static_cast<std::size_t>(rng.index(500));
    const auto k = 2 + static_cast<std::size_t>(rng.index(3));
    const auto pts = test::random_points(n, k, seed);
    EXPECT_EQ(nondominated_mask(pts), test::brute_force_mask(pts)) << "seed " << seed;
  }
  const auto pts = test::random_points(200, 3, 7);
  EXPECT_EQ(nondominated_mask(pts), test::brute_force_mask(pts));
}

TEST(BuildFront, SinglePreference) {
  const auto a = build_front(make_viennet(), transform(), 1, ScalarizerKind::raw_weighted_sum, budget(200), 3);
  ASSERT_EQ(a.records.size(), 1u);
  EXPECT_EQ(a.efficient_count(), 1u);
  EXPECT_EQ(order_by_total_score(a).size(), 1u);
}

TEST(BuildFront, RecordsAreScoredConsistently) {
  const auto& a = small_front();
  EXPECT_EQ(a.records.size(), 150u);
  EXPECT_EQ(a.efficient_mask, filter_efficient(a.records));
  for (const auto& r : a.records) {
    EXPECT_EQ(r.scores, transform()->score(r.objectives));
    EXPECT_NEAR(r.total_score, std::accumulate(r.scores.begin(), r.scores.end(), 0.0), 1e-12);
  }
  EXPECT_EQ(a.transform_ref, transform()->fingerprint());
}

TEST(BuildFront, JobsDoNotChangeArchive) {
  const auto a = build_front(make_viennet(), transform(), 40, ScalarizerKind::score_weighted_sum, budget(300), 5, 1);
  const auto b = build_front(make_viennet(), transform(), 40, ScalarizerKind::score_weighted_sum, budget(300), 5, 4);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].x, b.records[i].x);
}

TEST(BuildFront, NotDominatedByRandomPoints) {
  const auto p = make_viennet();
  const auto eff = small_front().efficient_records();
  std::size_t violations = 0;
  for (const auto& x : sample_decision_space(p, 10000, 77)) {
    const auto f = p.evaluate(x);
    for (const auto& r : eff) violations += dominates(f, r.objectives) ? 1 : 0;
  }
  EXPECT_EQ(violations, 0u);
}

TEST(BuildFront, ScoreSpaceAgreesWithObjectiveSpace) {
  const auto& a = small_front();
  std::vector<std::vector<double>> neg_scores;
  for (const auto& r : a.records) {
    std::vector<double> v;
    for (double s : r.scores) v.push_back(-s);
    neg_scores.push_back(v);
  }
  EXPECT_EQ(nondominated_mask(neg_scores), a.efficient_mask);
}

TEST(Order, DescendingStableAndInvariantToMonotoneMaps) {
  ParetoArchive a;
  a.records = {record_with({1, 5}, 1.0), record_with({2, 4}, 2.0), record_with({3, 3}, 1.0), record_with({4, 2}, 3.0)};
  a.efficient_mask.assign(4, true);
  const auto ranked = order_by_total_score(a);
  std::vector<double> first;
  for (const auto& r : ranked) first.push_back(r.objectives[0]);
  EXPECT_EQ(first, (std::vector<double>{4, 2, 1, 3}));

  auto b = a;
  for (auto& r : b.records) r.total_score = std::exp(3.0 * r.total_score) - 7.0;
  const auto again = order_by_total_score(b);
  for (std::size_t i = 0; i < ranked.size(); ++i) EXPECT_EQ(again[i].objectives, ranked[i].objectives);
}

TEST(Order, ReversedInputSameRankingOnDistinctTotals) {
  const auto& a = small_front();
  auto rev = a;
  std::reverse(rev.records.begin(), rev.records.end());
  std::reverse(rev.efficient_mask.begin(), rev.efficient_mask.end());
  const auto x = order_by_total_score(a);
  const auto y = order_by_total_score(rev);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].total_score, y[i].total_score);
}

TEST(Histogram, CountsAndDegenerateCases) {
  ParetoArchive one;
  one.records = {record_with({1, 2}, 1.5)};
  one.efficient_mask = {true};
  const auto h1 = total_score_density(one, 10);
  EXPECT_EQ(h1.counts, std::vector<std::size_t>{1});
  EXPECT_THROW(make_histogram(std::vector<double>{1.0}, 0), ValidationError);

  const auto& a = small_front();
  const auto h = total_score_density(a, 17);
  EXPECT_EQ(h.counts.size(), 17u);
  EXPECT_EQ(h.total(), a.efficient_count());
  EXPECT_EQ(histogram_csv(h).substr(0, 18), "bin_lo,bin_hi,coun");
}

TEST(Persistence, ArchiveRoundTrip) {
  test::TempDir dir("pareto");
  auto a = small_front();
  a.efficient_mask[0] = false;  // exercise the flag column
  save_archive(a, dir.path() / "front.csv", dir.path() / "front.json");
  const auto b = load_archive(dir.path() / "front.csv", dir.path() / "front.json");
  ASSERT_EQ(a.records.size(), b.records.size());
  EXPECT_EQ(a.efficient_mask, b.efficient_mask);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].preference, b.records[i].preference);
    EXPECT_EQ(a.records[i].x, b.records[i].x);
    EXPECT_EQ(a.records[i].objectives, b.records[i].objectives);
    EXPECT_EQ(a.records[i].scores, b.records[i].scores);
    EXPECT_EQ(a.records[i].total_score, b.records[i].total_score);
  }
  EXPECT_EQ(b.kind, a.kind);
  EXPECT_EQ(b.seed, a.seed);
  const auto header = io::read_file(dir.path() / "front.csv").substr(0, 40);
  EXPECT_EQ(header.substr(0, 15), "w1,w2,w3,x1,x2,");
}
