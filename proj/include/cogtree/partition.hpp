#pragma once

// Split-quality functionals and the two fragmentation strategies: unity,
// disjunction, recuperation, impurity, amplitude, heterogeneity, theoretical
// cut-point selection, k-means with medoid centers, silhouette and
// Davies-Bouldin, cluster-count selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cogtree/cogspace.hpp"
#include "cogtree/common.hpp"

namespace cogtree {

// A fragment of a subspace: its surrogate points plus the multiset of
// utterance sentiment labels owned by its users.
struct Split {
  std::vector<SurrogatePoint> points;
  std::vector<int> utterance_labels;
};

// Utterance labels per user, keyed by user_id (ordered map for determinism).
using LabelsByUser = std::map<std::string, std::vector<int>>;

enum class MvMode { MeanPlusVariance };

struct PartitionConfig {
  double lambda_cut = 0.5;        // trade-off in cut-point selection
  int cutpoint_candidates = 10;   // quantile candidates per dimension
  int cluster_min = 2;            // candidate cluster-count range
  int cluster_max = 5;
  MvMode mv_mode = MvMode::MeanPlusVariance;

  void validate() const {
    if (!(lambda_cut >= 0.0 && lambda_cut <= 1.0))
      raise(Errc::InvalidArgument, "lambda_cut must lie in [0,1]");
    if (cutpoint_candidates < 1)
      raise(Errc::InvalidArgument, "cutpoint_candidates must be positive");
    if (cluster_min < 2) raise(Errc::InvalidArgument, "cluster candidate lower bound must be >= 2");
    if (cluster_max < cluster_min)
      raise(Errc::InvalidArgument, "cluster candidate range is empty");
  }
};

struct TheoreticalParams {
  std::size_t cut_dimension = 0;  // c*
  double cut_value = 0.0;         // c*_cut; coords >= cut_value go right
};

struct ClusterParams {
  std::vector<SurrogatePoint> medoids;  // one per split, in split order
};

struct FragmentResult {
  std::vector<Split> splits;
  std::variant<TheoreticalParams, ClusterParams> params;
};

// Per-candidate objective diagnostics, dumped by the CLI on request.
struct CandidateDiag {
  std::string kind;   // "cutpoint" | "cluster_count"
  double candidate;   // cut value or cluster count
  double objective;
  bool feasible;
};

namespace detail {

inline double unity_or_zero(const std::vector<SurrogatePoint>& points, const SpaceConfig& cfg) {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;  // singleton convention
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sum += distance(points[i], points[j], cfg);
  return sum / (double(n) * double(n - 1) / 2.0);
}

}  // namespace detail

// Mean pairwise distance within a split (cohesion).
inline double unity(const Split& split, const SpaceConfig& cfg) {
  if (split.points.size() < 2)
    raise(Errc::EmptyInput,
          "unity requires at least 2 points, got " + std::to_string(split.points.size()));
  return detail::unity_or_zero(split.points, cfg);
}

// Distance between the medoids of two splits (separation).
inline double disjunction(const Split& a, const Split& b, const SpaceConfig& cfg) {
  if (a.points.empty() || b.points.empty())
    raise(Errc::EmptyInput, "disjunction of an empty split");
  return distance(medoid(a.points, cfg), medoid(b.points, cfg), cfg);
}

// Mean-variance aggregate of per-split unity/disjunction ratios. Lower values
// favor branching. Undefined when some split's total disjunction vanishes.
inline double recuperation(const std::vector<Split>& splits, const SpaceConfig& cfg,
                           const PartitionConfig& pcfg) {
  if (splits.size() < 2)
    raise(Errc::EmptyInput, "recuperation requires at least 2 splits");
  for (const Split& s : splits)
    if (s.points.empty()) raise(Errc::EmptyInput, "recuperation over an empty split");

  std::vector<const SurrogatePoint*> medoids;
  medoids.reserve(splits.size());
  for (const Split& s : splits) medoids.push_back(&medoid(s.points, cfg));

  std::vector<double> ratios;
  ratios.reserve(splits.size());
  for (std::size_t i = 0; i < splits.size(); ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < splits.size(); ++j)
      if (j != i) denom += distance(*medoids[i], *medoids[j], cfg);
    if (denom == 0.0)
      raise(Errc::RecuperationUndefined,
            "recuperation undefined: all medoids coincide with split " + std::to_string(i));
    ratios.push_back(double(splits.size() - 1) * detail::unity_or_zero(splits[i].points, cfg) /
                     denom);
  }

  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= double(ratios.size());
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= double(ratios.size());  // population variance
  (void)pcfg;                    // single MV mode for now
  return mean + var;
}

// Fraction of a split's utterances carrying sentiment s.
inline double sentiment_proportion(const Split& split, int s) {
  if (split.utterance_labels.empty())
    raise(Errc::EmptyInput, "sentiment_proportion over an empty utterance set");
  std::size_t count = 0;
  for (int label : split.utterance_labels)
    if (label == s) ++count;
  return double(count) / double(split.utterance_labels.size());
}

// Shannon entropy (base 2) of the split's binary sentiment labels.
inline double impurity(const Split& split) {
  if (split.utterance_labels.empty())
    raise(Errc::EmptyInput, "impurity over an empty utterance set");
  const double p1 = sentiment_proportion(split, 1);
  double acc = 0.0;
  for (double p : {p1, 1.0 - p1})
    if (p > 0.0) acc -= p * std::log2(p);
  return acc;
}

// Utterance-count weighted average of per-split impurities.
inline double weighted_impurity(const std::vector<Split>& splits) {
  if (splits.empty()) raise(Errc::EmptyInput, "weighted_impurity of an empty split list");
  double total = 0.0;
  for (const Split& s : splits) total += double(s.utterance_labels.size());
  double acc = 0.0;
  for (const Split& s : splits)
    acc += double(s.utterance_labels.size()) / total * impurity(s);
  return acc;
}

// Smallest utterance count across splits.
inline std::size_t min_amplitude(const std::vector<Split>& splits) {
  if (splits.empty()) raise(Errc::EmptyInput, "min_amplitude of an empty split list");
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (const Split& s : splits) best = std::min(best, s.utterance_labels.size());
  return best;
}

namespace detail {

// Heterogeneity pair sum; returns 0 for degenerate inputs (no pairs or zero
// local maximum distance) instead of throwing. Cut-point evaluation needs the
// tolerant form for one-point or coincident-point sides.
inline double heterogeneity_or_zero(const std::vector<SurrogatePoint>& points, std::size_t cue,
                                    const SpaceConfig& cfg) {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  double d_max = 0.0, c_max = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      d_max = std::max(d_max, distance(points[i], points[j], cfg));
      c_max = std::max(c_max, std::abs(points[i].coords[cue] - points[j].coords[cue]));
    }
  if (d_max == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dt = distance(points[i], points[j], cfg) / d_max;
      const double dc =
          c_max == 0.0 ? 0.0 : std::abs(points[i].coords[cue] - points[j].coords[cue]) / c_max;
      acc += dt * (1.0 - dc) + dc * (1.0 - dt);
    }
  return -acc;
}

}  // namespace detail

// Heterogeneity of a point set along one cue: minus the pair sum of
// complementarity between the full-space and single-dimension normalized
// distances. Values in [-#pairs, 0]; larger means the cue carries the
// distance signal.
inline double heterogeneity(const std::vector<SurrogatePoint>& points, std::size_t cue,
                            const SpaceConfig& cfg) {
  if (points.size() < 2)
    raise(Errc::EmptyInput, "heterogeneity requires at least 2 points");
  if (cue >= points.front().coords.size())
    raise(Errc::DimensionMismatch, "cue index " + std::to_string(cue) + " out of range for " +
                                       std::to_string(points.front().coords.size()) + " cues");
  if (max_intra_distance(points, cfg) == 0.0)
    raise(Errc::DegenerateGeometry, "heterogeneity undefined: all points coincide");
  return detail::heterogeneity_or_zero(points, cue, cfg);
}

// argmax over cues of heterogeneity; ties break to the lowest cue index.
inline std::size_t select_dimension(const std::vector<SurrogatePoint>& points,
                                    const SpaceConfig& cfg, const PartitionConfig& pcfg) {
  (void)pcfg;
  if (points.size() < 2)
    raise(Errc::DegenerateGeometry, "dimension selection requires at least 2 points");
  if (max_intra_distance(points, cfg) == 0.0)
    raise(Errc::DegenerateGeometry, "dimension selection over coincident points");
  const std::size_t cues = points.front().coords.size();
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cues; ++c) {
    const double val = detail::heterogeneity_or_zero(points, c, cfg);
    if (val > best_val) {
      best = c;
      best_val = val;
    }
  }
  return best;
}

namespace detail {

// Merge the utterance labels of a point group, in point order. Users absent
// from the map contribute no utterances.
inline std::vector<int> merge_labels(const std::vector<SurrogatePoint>& points,
                                     const LabelsByUser& labels) {
  std::vector<int> out;
  for (const SurrogatePoint& p : points) {
    auto it = labels.find(p.user_id);
    if (it != labels.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

inline double impurity_of_labels(const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  std::size_t ones = 0;
  for (int l : labels) ones += (l == 1);
  const double p1 = double(ones) / double(labels.size());
  double acc = 0.0;
  for (double p : {p1, 1.0 - p1})
    if (p > 0.0) acc -= p * std::log2(p);
  return acc;
}

}  // namespace detail

// Best cut value on cue `cut_dimension`: maximizes
//   lambda * (point-weighted heterogeneity of both sides)
// + (1-lambda) * (utterance-weighted impurity of both sides)
// over quantile-placed candidate cut values. Candidates are order statistics
// of the coordinate, so the selection is rank-based. Ties break to the
// smaller cut value.
inline double select_cutpoint(const std::vector<SurrogatePoint>& points,
                              const LabelsByUser& labels, std::size_t cut_dimension,
                              const SpaceConfig& cfg, const PartitionConfig& pcfg,
                              std::vector<CandidateDiag>* diag = nullptr) {
  if (points.size() < 2)
    raise(Errc::NoFeasibleCandidate, "cut-point selection requires at least 2 points");

  std::vector<double> values;
  values.reserve(points.size());
  for (const SurrogatePoint& p : points) values.push_back(p.coords[cut_dimension]);
  std::sort(values.begin(), values.end());

  std::vector<double> candidates;
  const std::size_t n = values.size();
  for (int i = 1; i <= pcfg.cutpoint_candidates; ++i) {
    const double q = double(i) / double(pcfg.cutpoint_candidates + 1);
    const auto idx = std::size_t(std::llround(q * double(n - 1)));
    candidates.push_back(values[idx]);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  bool found = false;
  double best_cut = 0.0;
  double best_obj = -std::numeric_limits<double>::infinity();
  for (double cut : candidates) {
    std::vector<SurrogatePoint> left, right;
    for (const SurrogatePoint& p : points)
      (p.coords[cut_dimension] < cut ? left : right).push_back(p);
    const bool feasible = !left.empty() && !right.empty();
    if (!feasible) {
      if (diag) diag->push_back({"cutpoint", cut, std::nan(""), false});
      continue;
    }
    const double het_left = detail::heterogeneity_or_zero(left, cut_dimension, cfg);
    const double het_right = detail::heterogeneity_or_zero(right, cut_dimension, cfg);
    const double het =
        (double(left.size()) * het_left + double(right.size()) * het_right) / double(n);

    const std::vector<int> labels_left = detail::merge_labels(left, labels);
    const std::vector<int> labels_right = detail::merge_labels(right, labels);
    const double total_utt = double(labels_left.size() + labels_right.size());
    const double imp =
        total_utt == 0.0
            ? 0.0
            : (double(labels_left.size()) * detail::impurity_of_labels(labels_left) +
               double(labels_right.size()) * detail::impurity_of_labels(labels_right)) /
                  total_utt;

    const double obj = pcfg.lambda_cut * het + (1.0 - pcfg.lambda_cut) * imp;
    if (diag) diag->push_back({"cutpoint", cut, obj, true});
    if (obj > best_obj) {
      best_obj = obj;
      best_cut = cut;
      found = true;
    }
  }
  if (!found)
    raise(Errc::NoFeasibleCandidate, "no cut candidate yields two non-empty splits on dimension " +
                                         std::to_string(cut_dimension));
  return best_cut;
}

// Two-way fragmentation on the selected dimension: coords < cut go left,
// >= cut go right.
inline FragmentResult theoretical_fragment(const std::vector<SurrogatePoint>& points,
                                           const LabelsByUser& labels, const SpaceConfig& cfg,
                                           const PartitionConfig& pcfg,
                                           std::vector<CandidateDiag>* diag = nullptr) {
  const std::size_t cut_dimension = select_dimension(points, cfg, pcfg);
  const double cut_value = select_cutpoint(points, labels, cut_dimension, cfg, pcfg, diag);
  Split left, right;
  for (const SurrogatePoint& p : points)
    (p.coords[cut_dimension] < cut_value ? left : right).points.push_back(p);
  left.utterance_labels = detail::merge_labels(left.points, labels);
  right.utterance_labels = detail::merge_labels(right.points, labels);
  FragmentResult result;
  result.splits.push_back(std::move(left));
  result.splits.push_back(std::move(right));
  result.params = TheoreticalParams{cut_dimension, cut_value};
  return result;
}

// Lloyd-style k-means with medoid centers under the cognitive distance.
// Farthest-first initialization from a seeded start point; empty clusters are
// repaired by reassigning the point farthest from its center. Deterministic
// given the seed. The final assignment maps every point to its nearest medoid
// (ties to the lowest cluster index), matching the online routing rule.
inline FragmentResult kmeans_fragment(const std::vector<SurrogatePoint>& points,
                                      const LabelsByUser& labels, std::size_t cluster_count,
                                      const SpaceConfig& cfg, std::uint64_t seed,
                                      std::vector<double>* objective_trace = nullptr) {
  const std::size_t n = points.size();
  if (cluster_count < 1) raise(Errc::InvalidArgument, "cluster count must be >= 1");
  if (cluster_count > n)
    raise(Errc::InvalidArgument, "cluster count " + std::to_string(cluster_count) +
                                     " exceeds point count " + std::to_string(n));

  // Pairwise distances up front; everything below reuses them.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] = distance(points[i], points[j], cfg);

  // Farthest-first centers.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> centers;
  centers.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  while (centers.size() < cluster_count) {
    std::size_t best = 0;
    double best_min = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double min_d = std::numeric_limits<double>::infinity();
      for (std::size_t c : centers) min_d = std::min(min_d, dist[i][c]);
      if (min_d > best_min) {
        best_min = min_d;
        best = i;
      }
    }
    centers.push_back(best);
  }

  auto assign_nearest = [&](std::vector<std::size_t>& assign) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        if (dist[i][centers[c]] < best_d) {
          best_d = dist[i][centers[c]];
          best = c;
        }
      }
      assign[i] = best;
    }
    // Repair empty clusters with the globally farthest-from-center point
    // among clusters that can spare one.
    for (;;) {
      std::vector<std::size_t> sizes(centers.size(), 0);
      for (std::size_t a : assign) ++sizes[a];
      std::size_t empty = centers.size();
      for (std::size_t c = 0; c < centers.size(); ++c)
        if (sizes[c] == 0) {
          empty = c;
          break;
        }
      if (empty == centers.size()) break;
      std::size_t worst = n;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (sizes[assign[i]] > 1 && dist[i][centers[assign[i]]] > worst_d) {
          worst_d = dist[i][centers[assign[i]]];
          worst = i;
        }
      assign[worst] = empty;
      centers[empty] = worst;  // lone member is its own medoid
    }
  };

  auto medoid_of = [&](const std::vector<std::size_t>& members) {
    std::size_t best = members.front();
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
      double sum = 0.0;
      for (std::size_t j : members) sum += dist[i][j];
      if (sum < best_sum ||
          (sum == best_sum && points[i].user_id < points[best].user_id)) {
        best_sum = sum;
        best = i;
      }
    }
    return best;
  };

  std::vector<std::size_t> assign(n, 0);
  assign_nearest(assign);
  double prev_obj = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100; ++iter) {
    // Center update.
    std::vector<std::vector<std::size_t>> members(centers.size());
    for (std::size_t i = 0; i < n; ++i) members[assign[i]].push_back(i);
    for (std::size_t c = 0; c < centers.size(); ++c) centers[c] = medoid_of(members[c]);

    std::vector<std::size_t> next(n, 0);
    assign_nearest(next);
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += dist[i][centers[next[i]]];
    if (objective_trace) objective_trace->push_back(obj);
    const bool stable = (next == assign);
    assign = std::move(next);
    if (stable || prev_obj - obj < 1e-9) break;
    prev_obj = obj;
  }

  FragmentResult result;
  result.splits.resize(centers.size());
  for (std::size_t i = 0; i < n; ++i) result.splits[assign[i]].points.push_back(points[i]);
  for (Split& s : result.splits) s.utterance_labels = detail::merge_labels(s.points, labels);
  ClusterParams params;
  for (std::size_t c : centers) params.medoids.push_back(points[c]);
  result.params = std::move(params);
  return result;
}

// Mean silhouette over all points of a clustering. Singleton-split points and
// all-zero distances contribute 0.
inline double silhouette(const std::vector<Split>& splits, const SpaceConfig& cfg) {
  if (splits.size() < 2)
    raise(Errc::EmptyInput, "silhouette requires at least 2 splits");
  for (const Split& s : splits)
    if (s.points.empty()) raise(Errc::EmptyInput, "silhouette over an empty split");

  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t si = 0; si < splits.size(); ++si) {
    for (const SurrogatePoint& p : splits[si].points) {
      ++count;
      if (splits[si].points.size() < 2) continue;  // contributes 0
      double a = 0.0;
      for (const SurrogatePoint& q : splits[si].points) a += distance(p, q, cfg);
      a /= double(splits[si].points.size() - 1);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t sj = 0; sj < splits.size(); ++sj) {
        if (sj == si) continue;
        double mean = 0.0;
        for (const SurrogatePoint& q : splits[sj].points) mean += distance(p, q, cfg);
        mean /= double(splits[sj].points.size());
        b = std::min(b, mean);
      }
      const double denom = std::max(a, b);
      if (denom > 0.0) acc += (b - a) / denom;
    }
  }
  return acc / double(count);
}

// Davies-Bouldin index with medoids as cluster centers. Lower is better.
// Cluster pairs with coincident medoids contribute 0 when both scatters
// vanish and +infinity otherwise.
inline double davies_bouldin(const std::vector<Split>& splits, const SpaceConfig& cfg) {
  if (splits.size() < 2)
    raise(Errc::EmptyInput, "davies_bouldin requires at least 2 splits");
  std::vector<const SurrogatePoint*> centers;
  std::vector<double> scatter;
  for (const Split& s : splits) {
    if (s.points.empty()) raise(Errc::EmptyInput, "davies_bouldin over an empty split");
    const SurrogatePoint& m = medoid(s.points, cfg);
    centers.push_back(&m);
    double mean = 0.0;
    for (const SurrogatePoint& p : s.points) mean += distance(p, m, cfg);
    scatter.push_back(mean / double(s.points.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < splits.size(); ++j) {
      if (j == i) continue;
      const double d = distance(*centers[i], *centers[j], cfg);
      const double s = scatter[i] + scatter[j];
      double ratio;
      if (d == 0.0)
        ratio = s == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      else
        ratio = s / d;
      worst = std::max(worst, ratio);
    }
    acc += worst;
  }
  return acc / double(splits.size());
}

// Ideal cluster count: argmax over candidates of
//   point-weighted silhouette + utterance-weighted impurity - recuperation.
// Candidates that cannot be fragmented or whose recuperation is undefined are
// skipped. Ties break to the smaller count.
inline std::size_t select_cluster_count(const std::vector<SurrogatePoint>& points,
                                        const LabelsByUser& labels, const SpaceConfig& cfg,
                                        const PartitionConfig& pcfg, std::uint64_t seed,
                                        std::vector<CandidateDiag>* diag = nullptr) {
  bool found = false;
  std::size_t best_d = 0;
  double best_obj = -std::numeric_limits<double>::infinity();
  const std::size_t hi = std::min<std::size_t>(std::size_t(pcfg.cluster_max), points.size());
  for (std::size_t d = std::size_t(pcfg.cluster_min); d <= hi; ++d) {
    double obj;
    try {
      const FragmentResult frag = kmeans_fragment(points, labels, d, cfg, seed);
      obj = silhouette(frag.splits, cfg) + weighted_impurity(frag.splits) -
            recuperation(frag.splits, cfg, pcfg);
    } catch (const Error&) {
      if (diag) diag->push_back({"cluster_count", double(d), std::nan(""), false});
      continue;
    }
    if (diag) diag->push_back({"cluster_count", double(d), obj, true});
    if (obj > best_obj) {
      best_obj = obj;
      best_d = d;
      found = true;
    }
  }
  if (!found)
    raise(Errc::NoFeasibleCandidate,
          "no feasible cluster count in [" + std::to_string(pcfg.cluster_min) + "," +
              std::to_string(pcfg.cluster_max) + "] for " + std::to_string(points.size()) +
              " points");
  return best_d;
}

}  // namespace cogtree
