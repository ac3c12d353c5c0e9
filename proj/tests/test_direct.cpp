#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "pitmo/direct.hpp"
#include "support.hpp"

using namespace pitmo;

namespace {

double sphere(const DecisionVector& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double camel(const DecisionVector& x) {
  const double a = x[0];
  const double b = x[1];
  return (4.0 - 2.1 * a * a + a * a * a * a / 3.0) * a * a + a * b + (-4.0 + 4.0 * b * b) * b * b;
}

DirectConfig budget(std::size_t evals, bool trace = false) {
  DirectConfig c;
  c.max_evals = evals;
  c.record_trace = trace;
  return c;
}

HyperRect unit_square() {
  HyperRect r;
  r.center = {0.5, 0.5};
  r.levels = {0, 0};
  r.diameter = HyperRect::diameter_of(r.levels);
  return r;
}

}  // namespace

TEST(Trisect, UnitSquareGeometry) {
  int calls = 0;
  const auto kids = trisect(unit_square(), [&](const std::vector<double>& u) {
    ++calls;
    return u[0];
  });
  EXPECT_EQ(calls, 2);
  for (const auto& k : kids) {
    EXPECT_NEAR(k.side_lengths()[0], 1.0 / 3.0, 1e-15);
    EXPECT_EQ(k.side_lengths()[1], 1.0);
  }
  EXPECT_NEAR(kids[0].center[0], 0.5 - 1.0 / 3.0, 1e-15);
  EXPECT_EQ(kids[1].center[0], 0.5);
  EXPECT_NEAR(kids[2].center[0], 0.5 + 1.0 / 3.0, 1e-15);
  EXPECT_EQ(kids[1].f_center, unit_square().f_center);
}

TEST(Trisect, LongestSideLowestIndex) {
  HyperRect r = unit_square();
  r.levels = {1, 0};
  const auto kids = trisect(r, [](const std::vector<double>&) { return 0.0; });
  EXPECT_EQ(kids[0].levels, (std::vector<int>{1, 1}));
  const auto again = trisect(kids[0], [](const std::vector<double>&) { return 0.0; });
  EXPECT_EQ(again[0].levels, (std::vector<int>{2, 1}));
}

TEST(Trisect, RepeatedSplitsAndShrinkingDiameter) {
  HyperRect r = unit_square();
  for (int n = 1; n <= 8; ++n) {
    const auto kids = trisect(r, [](const std::vector<double>&) { return 0.0; });
    EXPECT_LT(kids[1].diameter, r.diameter);
    r = kids[1];
    const auto sides = r.side_lengths();
    EXPECT_NEAR(*std::min_element(sides.begin(), sides.end()), std::pow(3.0, -((n + 1) / 2)), 1e-15);
  }
  HyperRect line;
  line.center = {0.5};
  line.levels = {0};
  for (int n = 1; n <= 10; ++n) line = trisect(line, [](const std::vector<double>&) { return 0.0; })[2];
  EXPECT_NEAR(line.side_lengths()[0], std::pow(3.0, -10), 1e-18);
}

TEST(Direct, SphereWithin500Evals) {
  const auto r = minimize(sphere, BoxBounds::cube(2, -4, 4), budget(500));
  EXPECT_LT(r.best_f, 1e-4);
  EXPECT_LE(r.evals_used, 500u);
}

TEST(Direct, OneDimensionalShiftedParabola) {
  const auto r = minimize([](const DecisionVector& x) { return (x[0] - 1.0) * (x[0] - 1.0); }, BoxBounds::cube(1, -4, 4),
                          budget(200));
  EXPECT_NEAR(r.best_x[0], 1.0, 0.01);
}

TEST(Direct, BestValueMatchesBestPoint) {
  const auto r = minimize(camel, BoxBounds::cube(2, -3, 3), budget(700));
  EXPECT_EQ(r.best_f, camel(r.best_x));
}

TEST(Direct, SixHumpCamelAgainstRandomSearch) {
  Rng rng(2024);
  double oracle = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000000; ++i) oracle = std::min(oracle, camel(DecisionVector({rng.uniform(-3, 3), rng.uniform(-2, 2)})));
  const auto r = minimize(camel, BoxBounds({-3, -2}, {3, 2}), budget(2000));
  EXPECT_LT(r.best_f, oracle + 1e-3);
}

TEST(Direct, PartitionTilesTheBox) {
  DirectSearch s(camel, BoxBounds::cube(2, -3, 3), budget(3000));
  int iter = 0;
  do {
    double vol = 0.0;
    for (const auto& r : s.rects()) vol += r.volume();
    ASSERT_NEAR(vol, 1.0, 1e-9) << "iteration " << iter;
    ++iter;
  } while (s.step());
}

TEST(Direct, TraceIsMonotoneAndDeterministic) {
  const auto a = minimize(camel, BoxBounds::cube(2, -3, 3), budget(1500, true));
  const auto b = minimize(camel, BoxBounds::cube(2, -3, 3), budget(1500, true));
  ASSERT_FALSE(a.trace.empty());
  for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i].second, a.trace[i - 1].second);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.best_x, b.best_x);
  EXPECT_EQ(a.trace.back().second, a.best_f);
}

TEST(Direct, LargerBudgetNeverWorse) {
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : {10u, 50u, 100u, 300u, 1000u, 2000u}) {
    const auto r = minimize(camel, BoxBounds::cube(2, -3, 3), budget(n));
    EXPECT_LE(r.best_f, prev);
    prev = r.best_f;
  }
}

TEST(Direct, SpaceFilling) {
  DirectSearch s([](const DecisionVector& x) { return std::sin(3.0 * x[0]) + x[1] * x[1]; }, BoxBounds::cube(2, -2, 2),
                 budget(10000));
  const double initial = s.rects().front().diameter;
  s.run();
  double widest = 0.0;
  for (const auto& r : s.rects()) widest = std::max(widest, r.diameter);
  EXPECT_LT(widest, 0.5 * initial);
}

TEST(Direct, NonFiniteAbortsWithPoint) {
  try {
    minimize([](const DecisionVector& x) { return x[0] > 0.6 ? std::nan("") : x[0]; }, BoxBounds::cube(1, 0, 1),
             budget(100));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("x = ("), std::string::npos);
  }
}

TEST(Direct, InvalidConfig) {
  EXPECT_THROW(minimize(sphere, BoxBounds::cube(1, 0, 1), budget(0)), ValidationError);
  DirectConfig c;
  c.epsilon_balance = -1.0;
  EXPECT_THROW(minimize(sphere, BoxBounds::cube(1, 0, 1), c), ValidationError);
}

TEST(Direct, TinyBudgetEvaluatesOnlyCenter) {
  const auto r = minimize(sphere, BoxBounds::cube(2, -1, 3), budget(1));
  EXPECT_EQ(r.evals_used, 1u);
  EXPECT_EQ(r.best_x, DecisionVector({1.0, 1.0}));
}

TEST(Direct, TraceCsv) {
  const auto r = minimize(sphere, BoxBounds::cube(2, -4, 4), budget(20, true));
  const auto csv = trace_csv(r);
  EXPECT_EQ(csv.substr(0, 16), "eval_index,best_");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.trace.size() + 1);
}
