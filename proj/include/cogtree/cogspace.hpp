#pragma once

// Pseudo-metric cognitive space: surrogate points under a Minkowski distance,
// medoids and pairwise extrema over point sets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "cogtree/common.hpp"

namespace cogtree {

struct CueSet {
  std::vector<std::string> names;

  std::size_t count() const { return names.size(); }

  void validate() const {
    if (names.empty()) raise(Errc::InvalidArgument, "cue set must contain at least one cue");
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j)
        if (names[i] == names[j])
          raise(Errc::InvalidArgument, "duplicate cue name '" + names[i] + "'");
  }

  // Index of a cue name, or error.
  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    raise(Errc::InvalidArgument, "unknown cue '" + name + "'");
  }
};

struct SpaceConfig {
  int minkowski_order = 2;  // r >= 1

  void validate() const {
    if (minkowski_order < 1)
      raise(Errc::InvalidArgument,
            "minkowski order must be >= 1, got " + std::to_string(minkowski_order));
  }
};

struct SurrogatePoint {
  std::string user_id;
  std::vector<double> coords;  // one value per cue, each in [0,1]
};

inline bool same_coords(const SurrogatePoint& a, const SurrogatePoint& b) {
  return a.coords == b.coords;
}

// Minkowski distance (sum_d |a_d - b_d|^r)^(1/r). Pseudo-metric: distinct
// users with identical coordinates are at distance zero.
inline double distance(const SurrogatePoint& a, const SurrogatePoint& b, const SpaceConfig& cfg) {
  if (a.coords.size() != b.coords.size())
    raise(Errc::DimensionMismatch, "point '" + a.user_id + "' has " +
                                       std::to_string(a.coords.size()) + " coords, point '" +
                                       b.user_id + "' has " + std::to_string(b.coords.size()));
  const int r = cfg.minkowski_order;
  double acc = 0.0;
  if (r == 1) {
    for (std::size_t d = 0; d < a.coords.size(); ++d) acc += std::abs(a.coords[d] - b.coords[d]);
    return acc;
  }
  if (r == 2) {
    for (std::size_t d = 0; d < a.coords.size(); ++d) {
      const double diff = a.coords[d] - b.coords[d];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  }
  for (std::size_t d = 0; d < a.coords.size(); ++d)
    acc += std::pow(std::abs(a.coords[d] - b.coords[d]), double(r));
  return std::pow(acc, 1.0 / double(r));
}

// Member point minimizing the sum of distances to all other members.
// Ties break toward the lexicographically smallest user_id.
inline const SurrogatePoint& medoid(const std::vector<SurrogatePoint>& points,
                                    const SpaceConfig& cfg) {
  if (points.empty()) raise(Errc::EmptyInput, "medoid of an empty point set");
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j)
      if (j != i) sum += distance(points[i], points[j], cfg);
    if (sum < best_sum ||
        (sum == best_sum && points[i].user_id < points[best].user_id)) {
      best = i;
      best_sum = sum;
    }
  }
  return points[best];
}

// Maximum pairwise distance; zero for a singleton.
inline double max_intra_distance(const std::vector<SurrogatePoint>& points,
                                 const SpaceConfig& cfg) {
  if (points.empty()) raise(Errc::EmptyInput, "max_intra_distance of an empty point set");
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      best = std::max(best, distance(points[i], points[j], cfg));
  return best;
}

}  // namespace cogtree
