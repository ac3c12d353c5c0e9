#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pitmo/core.hpp"
#include "pitmo/errors.hpp"

namespace pitmo {

/// A hyperrectangle of the normalized unit cube. Side j has length
/// 3^-levels[j]; the center's objective value is cached.
struct HyperRect {
  std::vector<double> center;
  std::vector<int> levels;
  double f_center = 0.0;
  double diameter = 0.0;
  std::uint64_t id = 0;  // insertion order, used for tie-breaking

  std::vector<double> side_lengths() const {
    std::vector<double> s(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) s[j] = std::pow(3.0, -levels[j]);
    return s;
  }

  double volume() const {
    double v = 1.0;
    for (int t : levels) v *= std::pow(3.0, -t);
    return v;
  }

  /// Euclidean norm of the half side lengths.
  static double diameter_of(const std::vector<int>& levels) {
    double sum = 0.0;
    for (int t : levels) {
      const double h = 0.5 * std::pow(3.0, -t);
      sum += h * h;
    }
    return std::sqrt(sum);
  }
};

struct DirectConfig {
  std::size_t max_evals = 2000;
  std::size_t max_iters = 100'000;
  double epsilon_balance = 1e-4;
  std::uint64_t seed = 0;  // ties are resolved by insertion order; kept for config symmetry
  bool record_trace = false;
};

struct DirectResult {
  DecisionVector best_x;
  double best_f = std::numeric_limits<double>::infinity();
  std::size_t evals_used = 0;
  std::size_t iterations = 0;
  std::vector<std::pair<std::size_t, double>> trace;  // (eval_index, best_f so far)
};

/// Splits `r` into thirds along its longest side (lowest index on ties).
/// The middle child keeps the parent's center and value; `f` is called on
/// the two new centers, left first. `f` receives normalized coordinates.
template <class F>
std::array<HyperRect, 3> trisect(const HyperRect& r, F&& f) {
  std::size_t dim = 0;
  for (std::size_t j = 1; j < r.levels.size(); ++j) {
    if (r.levels[j] < r.levels[dim]) dim = j;
  }
  const double offset = std::pow(3.0, -(r.levels[dim] + 1));

  std::array<HyperRect, 3> kids{r, r, r};
  for (auto& k : kids) k.levels[dim] += 1;
  const double diam = HyperRect::diameter_of(kids[0].levels);
  for (auto& k : kids) k.diameter = diam;

  kids[0].center[dim] -= offset;
  kids[2].center[dim] += offset;
  kids[0].f_center = f(kids[0].center);
  kids[2].f_center = f(kids[2].center);
  return kids;
}

/// Locally-biased DIRECT (DIRECT-L) over a box, one iteration at a time.
///
/// Each iteration groups rectangles by their side-length multiset (which
/// fixes the diameter), keeps the best rectangle of every group, and divides
/// those on the lower-right convex hull of (diameter, f) that pass the
/// epsilon-balance test against the incumbent.
class DirectSearch {
 public:
  using Objective = std::function<double(const DecisionVector&)>;

  DirectSearch(Objective f, BoxBounds bounds, DirectConfig cfg)
      : f_(std::move(f)), bounds_(std::move(bounds)), cfg_(cfg) {
    if (cfg_.max_evals < 1) throw ValidationError("max_evals must be at least 1");
    if (!(cfg_.epsilon_balance >= 0.0)) throw ValidationError("epsilon_balance must be nonnegative");
    HyperRect root;
    root.center.assign(bounds_.dim(), 0.5);
    root.levels.assign(bounds_.dim(), 0);
    root.diameter = HyperRect::diameter_of(root.levels);
    root.f_center = evaluate(root.center);
    root.id = next_id_++;
    rects_.push_back(std::move(root));
  }

  /// Performs one iteration. Returns false once the budget is exhausted.
  bool step() {
    if (done_) return false;
    if (iterations_ >= cfg_.max_iters || evals_ + 2 > cfg_.max_evals) {
      done_ = true;
      return false;
    }
    const auto selected = potentially_optimal();
    ++iterations_;
    auto g = [this](const std::vector<double>& u) { return evaluate(u); };
    for (std::size_t idx : selected) {
      if (evals_ + 2 > cfg_.max_evals) {
        done_ = true;
        break;
      }
      auto kids = trisect(rects_[idx], g);
      kids[0].id = next_id_++;
      kids[2].id = next_id_++;
      rects_[idx] = std::move(kids[1]);
      rects_.push_back(std::move(kids[0]));
      rects_.push_back(std::move(kids[2]));
    }
    return !done_;
  }

  DirectResult run() {
    while (step()) {
    }
    return result();
  }

  DirectResult result() const {
    DirectResult r;
    r.best_x = bounds_.from_unit(best_u_);
    r.best_f = best_f_;
    r.evals_used = evals_;
    r.iterations = iterations_;
    r.trace = trace_;
    return r;
  }

  const std::vector<HyperRect>& rects() const noexcept { return rects_; }
  std::size_t evals() const noexcept { return evals_; }

  /// Indices of rectangles to divide this iteration, ordered by diameter.
  std::vector<std::size_t> potentially_optimal() const {
    std::map<std::vector<int>, std::size_t> best_of_group;
    std::vector<int> key;
    for (std::size_t i = 0; i < rects_.size(); ++i) {
      key = rects_[i].levels;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = best_of_group.try_emplace(key, i);
      if (!inserted) {
        const auto& cur = rects_[it->second];
        const auto& cand = rects_[i];
        if (cand.f_center < cur.f_center || (cand.f_center == cur.f_center && cand.id < cur.id)) {
          it->second = i;
        }
      }
    }

    std::vector<std::size_t> cand;
    cand.reserve(best_of_group.size());
    for (const auto& [k, i] : best_of_group) cand.push_back(i);
    std::sort(cand.begin(), cand.end(), [this](std::size_t a, std::size_t b) {
      return rects_[a].diameter < rects_[b].diameter;
    });

    // Hull starts at the lowest value; among equal values the widest rectangle.
    std::size_t start = 0;
    for (std::size_t i = 1; i < cand.size(); ++i) {
      if (rects_[cand[i]].f_center <= rects_[cand[start]].f_center) start = i;
    }

    std::vector<std::size_t> hull;
    for (std::size_t i = start; i < cand.size(); ++i) {
      const auto& p = rects_[cand[i]];
      while (hull.size() >= 2) {
        const auto& a = rects_[hull[hull.size() - 2]];
        const auto& b = rects_[hull.back()];
        // drop b unless it lies strictly below the chord a -> p
        const double cross = (b.diameter - a.diameter) * (p.f_center - a.f_center) -
                             (b.f_center - a.f_center) * (p.diameter - a.diameter);
        if (cross <= 0.0) {
          hull.pop_back();
        } else {
          break;
        }
      }
      hull.push_back(cand[i]);
    }

    const double threshold = best_f_ - cfg_.epsilon_balance * std::abs(best_f_);
    std::vector<std::size_t> selected;
    for (std::size_t h = 0; h < hull.size(); ++h) {
      if (h + 1 == hull.size()) {
        selected.push_back(hull[h]);
        break;
      }
      const auto& a = rects_[hull[h]];
      const auto& b = rects_[hull[h + 1]];
      if (!(b.diameter > a.diameter)) continue;
      const double k_max = (b.f_center - a.f_center) / (b.diameter - a.diameter);
      if (a.f_center - k_max * a.diameter <= threshold) selected.push_back(hull[h]);
    }
    return selected;
  }

 private:
  double evaluate(const std::vector<double>& u) {
    const DecisionVector x = bounds_.from_unit(u);
    const double v = f_(x);
    ++evals_;
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "objective returned " << v << " at x = (";
      for (std::size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
      msg << ")";
      throw NumericalError(msg.str());
    }
    if (v < best_f_) {
      best_f_ = v;
      best_u_ = u;
    }
    if (cfg_.record_trace) trace_.emplace_back(evals_, best_f_);
    return v;
  }

  Objective f_;
  BoxBounds bounds_;
  DirectConfig cfg_;
  std::vector<HyperRect> rects_;
  std::vector<double> best_u_;
  double best_f_ = std::numeric_limits<double>::infinity();
  std::size_t evals_ = 0;
  std::size_t iterations_ = 0;
  std::uint64_t next_id_ = 0;
  bool done_ = false;
  std::vector<std::pair<std::size_t, double>> trace_;
};

/// Minimizes `f` over `bounds` with DIRECT-L. Deterministic in `cfg`.
template <class F>
DirectResult minimize(F&& f, const BoxBounds& bounds, const DirectConfig& cfg) {
  DirectSearch search(std::forward<F>(f), bounds, cfg);
  return search.run();
}

inline std::string trace_csv(const DirectResult& r) {
  std::string out = "eval_index,best_f\n";
  for (const auto& [i, f] : r.trace) {
    out += std::to_string(i);
    out += ',';
    out += io::format_double(f);
    out += '\n';
  }
  return out;
}

}  // namespace pitmo
