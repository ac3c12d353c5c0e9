#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pitmo/pareto.hpp"
#include "pitmo/rng.hpp"

namespace pitmo::test {

/// One-sample Kolmogorov-Smirnov distance of `xs` against the CDF `F`.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& F) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = F(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double ks_uniform(std::vector<double> xs, double lo = 0.0, double hi = 1.0) {
  return ks_distance(std::move(xs), [lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); });
}

/// O(n^2) reference for nondominated_mask.
inline std::vector<bool> brute_force_mask(const std::vector<std::vector<double>>& pts) {
  std::vector<bool> mask(pts.size(), true);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i != j && dominates(pts[j], pts[i])) {
        mask[i] = false;
        break;
      }
    }
  }
  return mask;
}

/// Random point cloud with duplicates and ties on a coarse grid.
inline std::vector<std::vector<double>> random_points(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> pts(n, std::vector<double>(k));
  const bool coarse = seed % 2 == 0;
  for (auto& p : pts) {
    for (auto& v : p) v = coarse ? std::floor(rng.uniform() * 6.0) : rng.uniform();
  }
  return pts;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(
                                                 std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / ("pitmo-" + tag + "-" + std::to_string(rng.next() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace pitmo::test

#include "pitmo/prefnet.hpp"

namespace pitmo::test {

/// Dataset of n random (score, preference) pairs, both max-normalized.
inline BijectionDataset random_dataset(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  BijectionDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(k), w(k);
    for (auto& v : s) v = rng.uniform(0.05, 1.0);
    for (auto& v : w) v = rng.uniform(0.05, 1.0);
    d.pairs.push_back({max_normalize(s), max_normalize(w)});
    d.train.push_back(i);
  }
  return d;
}

/// Largest relative deviation between backprop and central differences
/// (step h) over all parameters; the denominator has an absolute floor.
inline double gradient_check(const CorrectionModel& m, const BijectionDataset& d, double h = 1e-5,
                             double floor = 1e-6) {
  const auto g = gradient(m, d, d.train);
  double worst = 0.0;
  auto probe = m;
  const std::size_t n_in = m.weights_in.size();
  for (std::size_t i = 0; i < g.size(); ++i) {
    double& w = i < n_in ? probe.weights_in[i] : probe.weights_out[i - n_in];
    const double orig = w;
    w = orig + h;
    const double up = loss(probe, d, d.train);
    w = orig - h;
    const double down = loss(probe, d, d.train);
    w = orig;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), floor}));
  }
  return worst;
}

}  // namespace pitmo::test
