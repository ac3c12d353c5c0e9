#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pitmo/errors.hpp"
#include "pitmo/io.hpp"
#include "pitmo/rng.hpp"

namespace pitmo {

/// Fixed-length real vector tagged with the space it lives in, so decision,
/// objective, score and preference vectors cannot be mixed up silently.
template <class Tag>
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> values) : values_(std::move(values)) {}
  Point(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }

  std::span<const double> view() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const Point&) const = default;

 private:
  std::vector<double> values_;
};

struct DecisionTag {};
struct ObjectiveTag {};
struct ScoreTag {};

using DecisionVector = Point<DecisionTag>;
using ObjectiveVector = Point<ObjectiveTag>;
using ScoreVector = Point<ScoreTag>;

/// Axis-aligned box [lower, upper] in decision space.
class BoxBounds {
 public:
  BoxBounds(std::vector<double> lower, std::vector<double> upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.empty()) {
      throw ValidationError("box bounds need equal, nonzero lengths");
    }
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
        throw ValidationError("box bounds need finite lower < upper in every dimension");
      }
    }
  }

  static BoxBounds cube(std::size_t dim, double lo, double hi) {
    return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
  }

  std::size_t dim() const noexcept { return lower_.size(); }
  double lower(std::size_t i) const { return lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }
  double width(std::size_t i) const { return upper_[i] - lower_[i]; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  bool contains(const DecisionVector& x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
      if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
    }
    return true;
  }

  /// Maps a point of the unit cube onto the box.
  DecisionVector from_unit(std::span<const double> u) const {
    std::vector<double> x(dim());
    for (std::size_t i = 0; i < dim(); ++i) x[i] = lower_[i] + u[i] * width(i);
    return DecisionVector(std::move(x));
  }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// A box-constrained multi-objective minimization problem with k >= 2
/// objectives. The evaluator must be pure and thread-safe.
class Problem {
 public:
  using Evaluator = std::function<ObjectiveVector(const DecisionVector&)>;

  Problem(std::string name, std::size_t objective_count, BoxBounds bounds, Evaluator evaluator)
      : name_(std::move(name)),
        objective_count_(objective_count),
        bounds_(std::move(bounds)),
        evaluator_(std::move(evaluator)) {
    if (objective_count_ < 2) throw ValidationError("a multi-objective problem needs k >= 2");
    if (!evaluator_) throw ValidationError("problem needs an evaluator");
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t decision_dim() const noexcept { return bounds_.dim(); }
  std::size_t objective_count() const noexcept { return objective_count_; }
  const BoxBounds& bounds() const noexcept { return bounds_; }

  /// Evaluates and checks that exactly k finite losses come back.
  ObjectiveVector evaluate(const DecisionVector& x) const {
    if (x.size() != decision_dim()) throw ValidationError("decision vector has wrong dimension");
    ObjectiveVector f = evaluator_(x);
    if (f.size() != objective_count_) throw ValidationError(name_ + ": evaluator returned wrong arity");
    for (double v : f) {
      if (!std::isfinite(v)) throw NumericalError(name_ + ": non-finite objective value");
    }
    return f;
  }

 private:
  std::string name_;
  std::size_t objective_count_;
  BoxBounds bounds_;
  Evaluator evaluator_;
};

inline constexpr double kViennetBound = 4.0;

/// Viennet's three-objective test function on [-4, 4]^2.
inline ObjectiveVector viennet(const DecisionVector& x) {
  if (x.size() != 2) throw DomainError("viennet takes exactly two decision variables");
  for (double v : x) {
    if (!(v >= -kViennetBound && v <= kViennetBound)) {
      throw DomainError("viennet input outside [-4, 4]^2");
    }
  }
  const double x1 = x[0];
  const double x2 = x[1];
  const double r2 = x1 * x1 + x2 * x2;
  const double a = 3.0 * x1 - 2.0 * x2 + 4.0;
  const double b = x1 - x2 + 1.0;
  return {0.5 * r2 + std::sin(r2),                //
          a * a / 8.0 + b * b / 27.0 + 15.0,      //
          1.0 / (r2 + 1.0) - 1.1 * std::exp(-r2)};
}

inline Problem make_viennet() {
  return Problem("viennet", 3, BoxBounds::cube(2, -kViennetBound, kViennetBound),
                 [](const DecisionVector& x) { return viennet(x); });
}

/// Name -> problem lookup used by the command-line pipeline.
class ProblemRegistry {
 public:
  static ProblemRegistry with_builtins() {
    ProblemRegistry r;
    r.add(make_viennet());
    return r;
  }

  void add(Problem p) {
    auto name = p.name();
    problems_.insert_or_assign(std::move(name), std::move(p));
  }

  const Problem& get(const std::string& name) const {
    auto it = problems_.find(name);
    if (it == problems_.end()) throw ConfigError("unknown problem '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return problems_.count(name) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : problems_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, Problem> problems_;
};

/// n i.i.d. uniform points in the problem's box, reproducible from `seed`.
inline std::vector<DecisionVector> sample_decision_space(const Problem& p, std::size_t n,
                                                         std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample count must be at least 1");
  Rng rng(seed);
  const auto& box = p.bounds();
  std::vector<DecisionVector> out;
  out.reserve(n);
  std::vector<double> u(box.dim());
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : u) v = rng.uniform();
    out.push_back(box.from_unit(u));
  }
  return out;
}

/// CSV with header x1..xm, one decision vector per row.
inline std::string decision_samples_csv(std::span<const DecisionVector> xs, std::size_t dim) {
  std::string out;
  std::vector<std::string> cells;
  for (std::size_t j = 0; j < dim; ++j) cells.push_back("x" + std::to_string(j + 1));
  io::append_row(out, cells);
  for (const auto& x : xs) {
    cells.clear();
    for (double v : x) cells.push_back(io::format_double(v));
    io::append_row(out, cells);
  }
  return out;
}

inline std::vector<DecisionVector> read_decision_samples(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  std::vector<DecisionVector> out;
  for (const auto& row : table.rows) {
    std::vector<double> v;
    for (const auto& c : row) v.push_back(io::parse_double(c));
    out.emplace_back(std::move(v));
  }
  return out;
}

}  // namespace pitmo
