#pragma once

// Independent brute-force oracles for the functional tests. Everything here
// is written from the definitions with plain loops and its own distance
// implementation; nothing calls into the library under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Point = std::vector<double>;

inline double minkowski(const Point& a, const Point& b, int r) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) acc += std::pow(std::abs(a[d] - b[d]), double(r));
  return std::pow(acc, 1.0 / double(r));
}

inline double euclidean(const Point& a, const Point& b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) acc += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(acc);
}

// Index of the member minimizing the sum of distances; ties to the smallest
// index (callers arrange points so index order equals user_id order).
inline std::size_t medoid_index(const std::vector<Point>& pts, int r) {
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) sum += minkowski(pts[i], pts[j], r);
    if (sum < best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  return best;
}

inline double unity(const std::vector<Point>& pts, int r) {
  if (pts.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      sum += minkowski(pts[i], pts[j], r);
      ++pairs;
    }
  return sum / double(pairs);
}

inline double max_intra(const std::vector<Point>& pts, int r) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, minkowski(pts[i], pts[j], r));
  return best;
}

inline double disjunction(const std::vector<Point>& a, const std::vector<Point>& b, int r) {
  return minkowski(a[medoid_index(a, r)], b[medoid_index(b, r)], r);
}

inline double recuperation(const std::vector<std::vector<Point>>& splits, int r) {
  std::vector<double> ratios;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < splits.size(); ++j)
      if (j != i) denom += disjunction(splits[i], splits[j], r);
    ratios.push_back(double(splits.size() - 1) * unity(splits[i], r) / denom);
  }
  double mean = 0.0;
  for (double v : ratios) mean += v;
  mean /= double(ratios.size());
  double var = 0.0;
  for (double v : ratios) var += (v - mean) * (v - mean);
  var /= double(ratios.size());
  return mean + var;
}

inline double entropy(const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  double ones = 0.0;
  for (int l : labels) ones += (l == 1);
  const double p = ones / double(labels.size());
  double acc = 0.0;
  if (p > 0.0) acc -= p * std::log2(p);
  if (p < 1.0) acc -= (1.0 - p) * std::log2(1.0 - p);
  return acc;
}

inline double weighted_impurity(const std::vector<std::vector<int>>& label_sets) {
  double total = 0.0;
  for (const auto& s : label_sets) total += double(s.size());
  double acc = 0.0;
  for (const auto& s : label_sets) acc += double(s.size()) / total * entropy(s);
  return acc;
}

inline double heterogeneity(const std::vector<Point>& pts, std::size_t dim, int r) {
  double d_max = 0.0, c_max = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      d_max = std::max(d_max, minkowski(pts[i], pts[j], r));
      c_max = std::max(c_max, std::abs(pts[i][dim] - pts[j][dim]));
    }
  if (d_max == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dt = minkowski(pts[i], pts[j], r) / d_max;
      const double dc = c_max == 0.0 ? 0.0 : std::abs(pts[i][dim] - pts[j][dim]) / c_max;
      acc += dt * (1.0 - dc) + dc * (1.0 - dt);
    }
  return -acc;
}

// Mean silhouette over all points; clusters given as point groups.
inline double silhouette(const std::vector<std::vector<Point>>& clusters, int r) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t ci = 0; ci < clusters.size(); ++ci)
    for (const Point& p : clusters[ci]) {
      ++count;
      if (clusters[ci].size() < 2) continue;
      double a = 0.0;
      for (const Point& q : clusters[ci]) a += minkowski(p, q, r);
      a /= double(clusters[ci].size() - 1);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t cj = 0; cj < clusters.size(); ++cj) {
        if (cj == ci) continue;
        double mean = 0.0;
        for (const Point& q : clusters[cj]) mean += minkowski(p, q, r);
        b = std::min(b, mean / double(clusters[cj].size()));
      }
      if (std::max(a, b) > 0.0) acc += (b - a) / std::max(a, b);
    }
  return acc / double(count);
}

inline double davies_bouldin(const std::vector<std::vector<Point>>& clusters, int r) {
  std::vector<Point> centers;
  std::vector<double> scatters;
  for (const auto& c : clusters) {
    const Point& m = c[medoid_index(c, r)];
    centers.push_back(m);
    double s = 0.0;
    for (const Point& p : c) s += minkowski(p, m, r);
    scatters.push_back(s / double(c.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (j == i) continue;
      const double d = minkowski(centers[i], centers[j], r);
      if (d == 0.0) continue;
      worst = std::max(worst, (scatters[i] + scatters[j]) / d);
    }
    acc += worst;
  }
  return acc / double(clusters.size());
}

inline std::vector<double> softmax(const std::vector<double>& z) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : z) m = std::max(m, v);
  std::vector<double> out;
  double norm = 0.0;
  for (double v : z) {
    out.push_back(std::exp(v - m));
    norm += out.back();
  }
  for (double& v : out) v /= norm;
  return out;
}

// Minimum k-medoids objective over every partition of the points into exactly
// d non-empty blocks (restricted-growth-string enumeration; n <= 10).
inline double exhaustive_partition_optimum(const std::vector<Point>& pts, std::size_t d, int r) {
  const std::size_t n = pts.size();
  double best = std::numeric_limits<double>::infinity();

  auto block_cost = [&](const std::vector<std::size_t>& members) {
    double cost_best = std::numeric_limits<double>::infinity();
    for (std::size_t center : members) {
      double cost = 0.0;
      for (std::size_t m : members) cost += minkowski(pts[m], pts[center], r);
      cost_best = std::min(cost_best, cost);
    }
    return cost_best;
  };

  std::vector<std::size_t> assign(n, 0);
  auto recurse = [&](auto&& self, std::size_t i, std::size_t max_used) -> void {
    if (i == n) {
      if (max_used + 1 != d) return;
      std::vector<std::vector<std::size_t>> groups(d);
      for (std::size_t j = 0; j < n; ++j) groups[assign[j]].push_back(j);
      double total = 0.0;
      for (const auto& g : groups) total += block_cost(g);
      best = std::min(best, total);
      return;
    }
    const std::size_t hi = std::min(max_used + 1, d - 1);
    for (std::size_t v = 0; v <= hi; ++v) {
      assign[i] = v;
      self(self, i + 1, std::max(max_used, v));
    }
  };
  if (n == 0 || d == 0 || d > n) return best;
  recurse(recurse, 1, 0);  // assign[0] pinned to block 0
  return best;
}

// Random coordinates in [0,1]^dims.
inline std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dims) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Point> out(n, Point(dims, 0.0));
  for (auto& p : out)
    for (double& v : p) v = uni(rng);
  return out;
}

}  // namespace oracle
