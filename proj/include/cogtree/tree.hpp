#pragma once

// Adaptive tree: breadth-first construction with trilateral termination,
// kind-neighbor borrowing with dynamic dropout ratios, and top-down routing.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cogtree/cogspace.hpp"
#include "cogtree/common.hpp"
#include "cogtree/neural.hpp"
#include "cogtree/partition.hpp"

namespace cogtree {

enum class Strategy { Theoretical, Cluster };

inline const char* strategy_name(Strategy s) {
  return s == Strategy::Theoretical ? "theoretical" : "cluster";
}

struct TreeConfig {
  double theta_p = 0.74;      // recuperation ceiling; branching stops above it
  double theta_e = 0.6;       // impurity floor; branching stops below it
  std::size_t theta_a = 40;   // amplitude floor, in utterances
  std::size_t theta_b = 8;    // borrowing floor, in users
  double lambda_dropout = 1.0;
  double max_dropout = 0.9;
  Strategy strategy = Strategy::Cluster;

  void validate() const {
    if (!std::isfinite(theta_p) || !(theta_p > 0.0))
      raise(Errc::InvalidArgument, "theta_p must be finite and positive");
    if (!(theta_e >= 0.0 && theta_e <= 1.0))
      raise(Errc::InvalidArgument, "theta_e must lie in [0,1]");
    if (theta_a < 1) raise(Errc::InvalidArgument, "theta_a must be positive");
    if (theta_b < 1) raise(Errc::InvalidArgument, "theta_b must be positive");
    if (!(lambda_dropout > 0.0)) raise(Errc::InvalidArgument, "lambda_dropout must be positive");
    if (!(max_dropout >= 0.0 && max_dropout < 1.0))
      raise(Errc::InvalidArgument, "max_dropout must lie in [0,1)");
  }
};

enum class TermCriterion : std::uint8_t {
  Recuperation = 0,           // recuperation above theta_p
  Impurity = 1,               // weighted impurity below theta_e
  Amplitude = 2,              // smallest split below theta_a utterances
  DegenerateRecuperation = 3, // all medoids coincide; counts as criterion 1
  FragmentationFailed = 4,    // no feasible fragmentation at this node
};

inline const char* criterion_name(TermCriterion c) {
  switch (c) {
    case TermCriterion::Recuperation: return "recuperation";
    case TermCriterion::Impurity: return "impurity";
    case TermCriterion::Amplitude: return "amplitude";
    case TermCriterion::DegenerateRecuperation: return "degenerate_recuperation";
    case TermCriterion::FragmentationFailed: return "fragmentation_failed";
  }
  return "unknown";
}

struct TerminationDecision {
  bool stop = false;
  std::vector<TermCriterion> reasons;
};

// Trilateral termination check on a candidate fragmentation.
inline TerminationDecision terminate(const FragmentResult& frag, const TreeConfig& cfg,
                                     const SpaceConfig& space, const PartitionConfig& pcfg) {
  TerminationDecision decision;
  try {
    if (recuperation(frag.splits, space, pcfg) > cfg.theta_p)
      decision.reasons.push_back(TermCriterion::Recuperation);
  } catch (const Error& e) {
    if (e.code() != Errc::RecuperationUndefined) throw;
    decision.reasons.push_back(TermCriterion::DegenerateRecuperation);
  }
  if (weighted_impurity(frag.splits) < cfg.theta_e)
    decision.reasons.push_back(TermCriterion::Impurity);
  if (min_amplitude(frag.splits) < cfg.theta_a)
    decision.reasons.push_back(TermCriterion::Amplitude);
  decision.stop = !decision.reasons.empty();
  return decision;
}

// A borrowed user: its surrogate point, the same-depth node it came from, and
// the dynamic dropout ratio applied to its samples while training here.
struct AdoptedUser {
  SurrogatePoint point;
  int source_node = -1;
  double dropout = 0.0;
};

struct TreeNode {
  int id = 0;
  int parent = -1;  // -1 at the root
  std::vector<int> children;
  int depth = 0;
  std::vector<SurrogatePoint> subspace;
  std::vector<AdoptedUser> adopted;
  std::optional<std::variant<TheoreticalParams, ClusterParams>> frag_params;
  std::vector<TermCriterion> termination;  // populated on leaves
  std::optional<SubmodelParams> submodel;

  bool is_leaf() const { return children.empty(); }
};

struct AdaptiveTree {
  SpaceConfig space;
  PartitionConfig partition;
  TreeConfig config;
  std::vector<TreeNode> nodes;  // index == id, breadth-first order
  int root = 0;
  std::vector<int> leaves;
};

struct NodeCandidateDiag {
  int node_id = 0;
  CandidateDiag diag;
};

namespace detail {

inline std::string subspace_key(const std::vector<SurrogatePoint>& points) {
  std::vector<std::string> ids;
  ids.reserve(points.size());
  for (const SurrogatePoint& p : points) ids.push_back(p.user_id);
  std::sort(ids.begin(), ids.end());
  std::string key;
  for (const std::string& id : ids) {
    key += id;
    key += '\x1f';
  }
  return key;
}

}  // namespace detail

// Breadth-first tree construction. Every dequeued subspace becomes a node;
// fragmentation parameters are adapted, the trilateral criteria decide
// between leaf and branch. Fragmentation failure (degenerate geometry, no
// feasible candidate) demotes the node to a leaf instead of aborting.
// Per-node randomness is keyed on the subspace content so that identical
// subspaces fragment identically across configurations.
inline AdaptiveTree build(const std::vector<SurrogatePoint>& users, const LabelsByUser& labels,
                          const SpaceConfig& space, const PartitionConfig& pcfg,
                          const TreeConfig& cfg, std::uint64_t seed,
                          std::vector<NodeCandidateDiag>* diag = nullptr) {
  space.validate();
  pcfg.validate();
  cfg.validate();
  if (users.empty()) raise(Errc::EmptyInput, "tree build requires at least one user");
  for (const SurrogatePoint& p : users) {
    auto it = labels.find(p.user_id);
    if (it == labels.end() || it->second.empty())
      raise(Errc::InvalidArgument, "user '" + p.user_id + "' owns no utterances");
  }

  AdaptiveTree tree;
  tree.space = space;
  tree.partition = pcfg;
  tree.config = cfg;

  std::vector<SurrogatePoint> root_points = users;
  std::sort(root_points.begin(), root_points.end(),
            [](const SurrogatePoint& a, const SurrogatePoint& b) { return a.user_id < b.user_id; });

  struct Pending {
    std::vector<SurrogatePoint> points;
    int parent;
  };
  std::deque<Pending> queue;
  queue.push_back({std::move(root_points), -1});

  while (!queue.empty()) {
    Pending item = std::move(queue.front());
    queue.pop_front();

    TreeNode node;
    node.id = int(tree.nodes.size());
    node.parent = item.parent;
    node.depth = item.parent < 0 ? 0 : tree.nodes[std::size_t(item.parent)].depth + 1;
    node.subspace = std::move(item.points);
    if (item.parent >= 0) tree.nodes[std::size_t(item.parent)].children.push_back(node.id);

    const std::uint64_t node_seed = derive_seed_str(seed, detail::subspace_key(node.subspace));
    std::optional<FragmentResult> frag;
    std::vector<CandidateDiag> node_diag;
    try {
      if (cfg.strategy == Strategy::Theoretical) {
        frag = theoretical_fragment(node.subspace, labels, space, pcfg,
                                    diag ? &node_diag : nullptr);
      } else {
        const std::size_t d = select_cluster_count(node.subspace, labels, space, pcfg, node_seed,
                                                   diag ? &node_diag : nullptr);
        frag = kmeans_fragment(node.subspace, labels, d, space, node_seed);
      }
    } catch (const Error&) {
      node.termination.push_back(TermCriterion::FragmentationFailed);
    }
    if (diag)
      for (const CandidateDiag& d : node_diag) diag->push_back({node.id, d});

    if (frag) {
      const TerminationDecision decision = terminate(*frag, cfg, space, pcfg);
      if (decision.stop) {
        node.termination = decision.reasons;
      } else {
        node.frag_params = frag->params;
        for (Split& split : frag->splits) queue.push_back({std::move(split.points), node.id});
      }
    }
    tree.nodes.push_back(std::move(node));
  }

  for (const TreeNode& n : tree.nodes)
    if (n.is_leaf()) tree.leaves.push_back(n.id);
  return tree;
}

// Borrow users into a sparse node from same-depth neighbors, nearest first
// (by medoid disjunction, node id on ties). Users arrive one at a time in
// user_id order and borrowing stops as soon as the theta_b floor is met.
// Each adopted user carries p^d = min(max_dropout, lambda * max_intra /
// disjunction); coincident medoids give p^d = 0.
inline std::vector<AdoptedUser> kind_neighbors(AdaptiveTree& tree, int node_id) {
  if (node_id < 0 || node_id >= int(tree.nodes.size()))
    raise(Errc::InvalidArgument, "no node with id " + std::to_string(node_id));
  TreeNode& node = tree.nodes[std::size_t(node_id)];
  node.adopted.clear();
  if (node.subspace.size() >= tree.config.theta_b) return {};

  struct Neighbor {
    int id;
    double disjunction;
  };
  std::vector<Neighbor> neighbors;
  const SurrogatePoint& own_medoid = medoid(node.subspace, tree.space);
  for (const TreeNode& other : tree.nodes) {
    if (other.id == node_id || other.depth != node.depth) continue;
    neighbors.push_back(
        {other.id, distance(own_medoid, medoid(other.subspace, tree.space), tree.space)});
  }
  std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.disjunction != b.disjunction ? a.disjunction < b.disjunction : a.id < b.id;
  });

  const double max_intra = max_intra_distance(node.subspace, tree.space);
  for (const Neighbor& nb : neighbors) {
    if (node.subspace.size() + node.adopted.size() >= tree.config.theta_b) break;
    double ratio = 0.0;
    if (nb.disjunction > 0.0)
      ratio = std::min(tree.config.max_dropout,
                       tree.config.lambda_dropout * max_intra / nb.disjunction);
    std::vector<SurrogatePoint> donors = tree.nodes[std::size_t(nb.id)].subspace;
    std::sort(donors.begin(), donors.end(), [](const SurrogatePoint& a, const SurrogatePoint& b) {
      return a.user_id < b.user_id;
    });
    for (const SurrogatePoint& donor : donors) {
      if (node.subspace.size() + node.adopted.size() >= tree.config.theta_b) break;
      node.adopted.push_back({donor, nb.id, ratio});
    }
  }
  return node.adopted;
}

// Apply kind-neighbor borrowing to every node, in id order.
inline void apply_kind_neighbors(AdaptiveTree& tree) {
  for (const TreeNode& n : tree.nodes) kind_neighbors(tree, n.id);
}

// Deterministic root-to-leaf path for a surrogate point. Theoretical nodes
// compare the stored dimension against the cut (>= goes right); cluster nodes
// pick the child with the nearest stored medoid (ties to the lower child id).
inline std::vector<int> route(const AdaptiveTree& tree, const SurrogatePoint& point) {
  std::vector<int> path;
  int current = tree.root;
  for (;;) {
    const TreeNode& node = tree.nodes[std::size_t(current)];
    path.push_back(current);
    if (node.is_leaf()) break;
    const auto& params = *node.frag_params;
    if (std::holds_alternative<TheoreticalParams>(params)) {
      const TheoreticalParams& tp = std::get<TheoreticalParams>(params);
      if (tp.cut_dimension >= point.coords.size())
        raise(Errc::DimensionMismatch,
              "routing point has " + std::to_string(point.coords.size()) +
                  " coords, node cut dimension is " + std::to_string(tp.cut_dimension));
      current = point.coords[tp.cut_dimension] >= tp.cut_value ? node.children[1]
                                                               : node.children[0];
    } else {
      const ClusterParams& cp = std::get<ClusterParams>(params);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < cp.medoids.size(); ++i) {
        const double d = distance(cp.medoids[i], point, tree.space);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      current = node.children[best];
    }
  }
  return path;
}

}  // namespace cogtree
