#pragma once

// End-to-end offline training (bottom-up over the tree), online prediction
// (stack-wise routing + submodel execution), benchmark metrics, per-level
// intrinsic cluster quality, and the k-fold harness with internal baselines.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cogtree/common.hpp"
#include "cogtree/dataset.hpp"
#include "cogtree/neural_train.hpp"
#include "cogtree/partition.hpp"
#include "cogtree/serialize.hpp"
#include "cogtree/tree.hpp"

namespace cogtree {

struct LevelMetric {
  int depth = 0;
  std::size_t node_count = 0;
  double silhouette = 0.0;
  double davies_bouldin = 0.0;
};

struct LevelF1 {
  int depth = 0;
  std::size_t node_count = 0;
  double mean_f1 = 0.0;
};

// Utterance-level confusion counts plus derived metrics. The counts are the
// source of truth; every ratio is recomputed from them.
struct MetricsReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t video_correct = 0, video_total = 0;
  std::vector<LevelMetric> levels;

  double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
  double recall_pos() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double recall_neg() const { return tn + fp == 0 ? 0.0 : double(tn) / double(tn + fp); }
  double f1() const {
    const double p = precision(), r = recall_pos();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  double utterance_accuracy() const {
    const std::size_t total = tp + fp + tn + fn;
    return total == 0 ? 0.0 : double(tp + tn) / double(total);
  }
  double video_accuracy() const {
    return video_total == 0 ? 0.0 : double(video_correct) / double(video_total);
  }

  void add_utterance(int truth, int predicted) {
    if (truth == 1)
      predicted == 1 ? ++tp : ++fn;
    else
      predicted == 1 ? ++fp : ++tn;
  }
};

struct NodeLossCurve {
  int node_id = 0;
  std::vector<double> losses;
};

struct TrainStats {
  std::vector<NodeLossCurve> loss_curves;
  std::map<int, double> max_abs_knowledge;  // per node, over original samples
};

// Offline phase: build the tree, borrow kind neighbors, then train submodels
// children-first. Each original sample's knowledge core is the output of the
// unique child owning that sample's user; leaves and adopted samples get the
// zero core. The root's auxiliary head doubles as the prediction module.
inline AdaptiveTree train_tree(const Dataset& ds, const SpaceConfig& space,
                               const PartitionConfig& pcfg, const TreeConfig& tcfg,
                               const NeuralConfig& ncfg, std::uint64_t seed,
                               TrainStats* stats = nullptr,
                               std::vector<NodeCandidateDiag>* diag = nullptr) {
  const LabelsByUser labels = labels_by_user(ds);
  AdaptiveTree tree = build(ds.users, labels, space, pcfg, tcfg, seed, diag);
  apply_kind_neighbors(tree);

  std::map<std::string, std::vector<const FeatureSequence*>> videos_of;
  for (const FeatureSequence& v : ds.videos) videos_of[v.user_id].push_back(&v);

  const int g = ds.padded_length;
  // Per-node H^K outputs of original samples, consumed by the parent.
  std::map<int, std::map<std::string, Eigen::MatrixXd>> outputs;

  for (int id = int(tree.nodes.size()) - 1; id >= 0; --id) {
    TreeNode& node = tree.nodes[std::size_t(id)];

    std::map<std::string, int> child_of_user;
    for (int child : node.children)
      for (const SurrogatePoint& p : tree.nodes[std::size_t(child)].subspace)
        child_of_user[p.user_id] = child;

    std::vector<TrainingSample> samples;
    double max_abs_k = 0.0;
    for (const SurrogatePoint& p : node.subspace) {
      for (const FeatureSequence* v : videos_of.at(p.user_id)) {
        TrainingSample s;
        s.sequence = v;
        if (node.is_leaf()) {
          s.knowledge = Eigen::MatrixXd::Zero(ncfg.embed_dim, g);
        } else {
          s.knowledge = outputs.at(child_of_user.at(p.user_id)).at(v->video_id);
          max_abs_k = std::max(max_abs_k, s.knowledge.cwiseAbs().maxCoeff());
        }
        samples.push_back(std::move(s));
      }
    }
    for (const AdoptedUser& a : node.adopted) {
      auto it = videos_of.find(a.point.user_id);
      if (it == videos_of.end()) continue;
      for (const FeatureSequence* v : it->second) {
        TrainingSample s;
        s.sequence = v;
        s.knowledge = Eigen::MatrixXd::Zero(ncfg.embed_dim, g);
        s.dropout = a.dropout;
        samples.push_back(std::move(s));
      }
    }

    NeuralConfig node_cfg = ncfg;
    node_cfg.seed = derive_seed(seed, 0x5eed0000ULL + std::uint64_t(id));
    TrainResult result = train_submodel(samples, node_cfg);
    node.submodel = std::move(result.params);
    if (stats) {
      stats->loss_curves.push_back({id, std::move(result.loss_curve)});
      stats->max_abs_knowledge[id] = max_abs_k;
    }

    auto& own_outputs = outputs[id];
    std::size_t sample_index = 0;
    for (const SurrogatePoint& p : node.subspace)
      for (const FeatureSequence* v : videos_of.at(p.user_id)) {
        own_outputs[v->video_id] =
            submodel_forward(*v, samples[sample_index].knowledge, *node.submodel);
        ++sample_index;
      }
    for (int child : node.children) outputs.erase(child);
  }
  return tree;
}

struct PredictTrace {
  std::vector<int> executed;             // node ids in execution (leaf-to-root) order
  std::vector<Eigen::MatrixXd> node_hk;  // H^K per executed node
};

struct Prediction {
  int sentiment = 0;
  std::vector<int> utterance_labels;
  Eigen::MatrixXd probabilities;  // 2 x g
};

// Online phase: push the route onto a stack top-down, pop bottom-up feeding
// each submodel the previous output as its knowledge core, then apply the
// prediction head at the root and majority-vote the utterance labels.
inline Prediction predict(const AdaptiveTree& tree, const FeatureSequence& video,
                          const SurrogatePoint& user_point, PredictTrace* trace = nullptr) {
  const std::vector<int> path = route(tree, user_point);
  const int g = video.length();

  Eigen::MatrixXd h;
  bool first = true;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    const TreeNode& node = tree.nodes[std::size_t(*it)];
    if (!node.submodel)
      raise(Errc::NotTrained, "node " + std::to_string(node.id) + " has no trained submodel");
    const Eigen::MatrixXd k =
        first ? Eigen::MatrixXd::Zero(node.submodel->embed_dim, g) : h;
    h = submodel_forward(video, k, *node.submodel);
    first = false;
    if (trace) {
      trace->executed.push_back(node.id);
      trace->node_hk.push_back(h);
    }
  }

  const TreeNode& root = tree.nodes[std::size_t(tree.root)];
  const HeadOutput out = predict_head(h, root.submodel->head, video.mask);
  Prediction p;
  p.utterance_labels = out.labels;
  p.probabilities = out.probabilities;
  p.sentiment = majority_vote(out.labels, video.mask);
  return p;
}

// Utterance-level confusion per the benchmark definitions, plus secondary
// video-level majority accuracy.
inline MetricsReport evaluate(const AdaptiveTree& tree, const Dataset& test) {
  if (test.videos.empty()) raise(Errc::EmptyInput, "evaluation over an empty test split");
  MetricsReport report;
  for (const FeatureSequence& video : test.videos) {
    const Prediction p = predict(tree, video, test.user(video.user_id));
    for (int t = 0; t < video.length(); ++t)
      if (video.mask[std::size_t(t)])
        report.add_utterance(video.labels[std::size_t(t)], p.utterance_labels[std::size_t(t)]);
    ++report.video_total;
    report.video_correct += (p.sentiment == majority_vote(video.labels, video.mask));
  }
  return report;
}

// Treat each populated depth's node subspaces as a clustering of the space
// and score it with silhouette and Davies-Bouldin. Depths with fewer than two
// nodes are skipped.
inline std::vector<LevelMetric> evaluate_partition_quality(const AdaptiveTree& tree) {
  std::map<int, std::vector<const TreeNode*>> by_depth;
  for (const TreeNode& n : tree.nodes) by_depth[n.depth].push_back(&n);
  std::vector<LevelMetric> out;
  for (const auto& [depth, nodes] : by_depth) {
    if (nodes.size() < 2) continue;
    std::vector<Split> splits;
    for (const TreeNode* n : nodes) splits.push_back({n->subspace, {}});
    LevelMetric m;
    m.depth = depth;
    m.node_count = nodes.size();
    m.silhouette = silhouette(splits, tree.space);
    m.davies_bouldin = davies_bouldin(splits, tree.space);
    out.push_back(m);
  }
  return out;
}

// Mean per-node F1 at each depth: every routed test sample is scored by each
// node on its route using that node's auxiliary head on the node's H^K.
inline std::vector<LevelF1> evaluate_levels(const AdaptiveTree& tree, const Dataset& test) {
  if (test.videos.empty()) raise(Errc::EmptyInput, "evaluation over an empty test split");
  std::map<int, MetricsReport> per_node;
  for (const FeatureSequence& video : test.videos) {
    PredictTrace trace;
    predict(tree, video, test.user(video.user_id), &trace);
    for (std::size_t i = 0; i < trace.executed.size(); ++i) {
      const TreeNode& node = tree.nodes[std::size_t(trace.executed[i])];
      const HeadOutput out = predict_head(trace.node_hk[i], node.submodel->head, video.mask);
      MetricsReport& r = per_node[node.id];
      for (int t = 0; t < video.length(); ++t)
        if (video.mask[std::size_t(t)])
          r.add_utterance(video.labels[std::size_t(t)], out.labels[std::size_t(t)]);
    }
  }
  std::map<int, std::pair<double, std::size_t>> acc;  // depth -> (f1 sum, node count)
  for (const auto& [node_id, report] : per_node) {
    const int depth = tree.nodes[std::size_t(node_id)].depth;
    acc[depth].first += report.f1();
    acc[depth].second += 1;
  }
  std::vector<LevelF1> out;
  for (const auto& [depth, sums] : acc)
    out.push_back({depth, sums.second, sums.first / double(sums.second)});
  return out;
}

// Users kept, videos filtered; the corpus-wide padded length is preserved.
inline Dataset subset(const Dataset& ds, const std::vector<std::string>& user_ids) {
  std::set<std::string> keep(user_ids.begin(), user_ids.end());
  Dataset out;
  out.cues = ds.cues;
  out.dims = ds.dims;
  out.padded_length = ds.padded_length;
  for (const SurrogatePoint& p : ds.users)
    if (keep.count(p.user_id)) out.users.push_back(p);
  for (const FeatureSequence& v : ds.videos)
    if (keep.count(v.user_id)) out.videos.push_back(v);
  return out;
}

namespace detail {

// A tree-less submodel (knowledge core pinned to zero): the root-only
// baseline and the SEP-style base models.
struct PlainModel {
  SubmodelParams params;
};

inline PlainModel train_plain(const std::vector<const FeatureSequence*>& videos,
                              const NeuralConfig& cfg) {
  std::vector<TrainingSample> samples;
  samples.reserve(videos.size());
  const int g = videos.empty() ? 0 : videos.front()->length();
  for (const FeatureSequence* v : videos) {
    TrainingSample s;
    s.sequence = v;
    s.knowledge = Eigen::MatrixXd::Zero(cfg.embed_dim, g);
    samples.push_back(std::move(s));
  }
  return PlainModel{train_submodel(samples, cfg).params};
}

inline std::vector<int> predict_plain(const PlainModel& model, const FeatureSequence& video) {
  const Eigen::MatrixXd k = Eigen::MatrixXd::Zero(model.params.embed_dim, video.length());
  const Eigen::MatrixXd hk = submodel_forward(video, k, model.params);
  return predict_head(hk, model.params.head, video.mask).labels;
}

}  // namespace detail

struct FoldResult {
  int fold = 0;
  std::string model;  // "tree", "root_only", "sep"
  MetricsReport metrics;
};

struct BenchmarkReport {
  int folds = 0;
  std::vector<FoldResult> rows;
  std::vector<std::vector<LevelF1>> tree_level_f1;          // per fold
  std::vector<std::vector<LevelMetric>> tree_level_quality; // per fold

  std::vector<std::string> models() const {
    std::vector<std::string> out;
    for (const FoldResult& r : rows)
      if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
    return out;
  }

  double mean_metric(const std::string& model, double (MetricsReport::*fn)() const) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const FoldResult& r : rows)
      if (r.model == model) {
        sum += (r.metrics.*fn)();
        ++n;
      }
    return n == 0 ? 0.0 : sum / double(n);
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "fold,model,tp,fp,tn,fn,precision,recall_pos,recall_neg,f1,utterance_accuracy,"
           "video_accuracy\n";
    auto line = [&](const std::string& fold, const std::string& model, const MetricsReport& m) {
      out << fold << ',' << model << ',' << m.tp << ',' << m.fp << ',' << m.tn << ',' << m.fn
          << ',' << m.precision() << ',' << m.recall_pos() << ',' << m.recall_neg() << ','
          << m.f1() << ',' << m.utterance_accuracy() << ',' << m.video_accuracy() << '\n';
    };
    for (const FoldResult& r : rows) line(std::to_string(r.fold), r.model, r.metrics);
    for (const std::string& model : models()) {
      out << "mean," << model << ",,,,," << mean_metric(model, &MetricsReport::precision) << ','
          << mean_metric(model, &MetricsReport::recall_pos) << ','
          << mean_metric(model, &MetricsReport::recall_neg) << ','
          << mean_metric(model, &MetricsReport::f1) << ','
          << mean_metric(model, &MetricsReport::utterance_accuracy) << ','
          << mean_metric(model, &MetricsReport::video_accuracy) << '\n';
    }
    return out.str();
  }
};

// User-level k-fold benchmark: folds partition the user set, each fold trains
// the tree model plus (optionally) the root-only and SEP-style baselines on
// identical splits.
inline BenchmarkReport kfold_benchmark(const Dataset& ds, int k, const SpaceConfig& space,
                                       const PartitionConfig& pcfg, const TreeConfig& tcfg,
                                       const NeuralConfig& ncfg, std::uint64_t seed,
                                       bool run_baselines = true) {
  if (k < 2)
    raise(Errc::InvalidArgument,
          "k-fold requires k >= 2 (k=1 has no train/test separation), got " + std::to_string(k));
  if (std::size_t(k) > ds.users.size())
    raise(Errc::InvalidArgument, "k=" + std::to_string(k) + " exceeds the user count " +
                                     std::to_string(ds.users.size()));

  std::vector<std::string> ids;
  for (const SurrogatePoint& p : ds.users) ids.push_back(p.user_id);
  std::mt19937_64 rng(derive_seed(seed, 0xf01d));
  std::shuffle(ids.begin(), ids.end(), rng);

  BenchmarkReport report;
  report.folds = k;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<std::string> train_ids, test_ids;
    for (std::size_t i = 0; i < ids.size(); ++i)
      (int(i) % k == fold ? test_ids : train_ids).push_back(ids[i]);
    const Dataset train = subset(ds, train_ids);
    const Dataset test = subset(ds, test_ids);

    const AdaptiveTree tree =
        train_tree(train, space, pcfg, tcfg, ncfg, derive_seed(seed, 0xbe000 + std::uint64_t(fold)));
    MetricsReport tree_metrics = evaluate(tree, test);
    tree_metrics.levels = evaluate_partition_quality(tree);
    report.tree_level_quality.push_back(tree_metrics.levels);
    report.tree_level_f1.push_back(evaluate_levels(tree, test));
    report.rows.push_back({fold, "tree", std::move(tree_metrics)});

    if (!run_baselines) continue;

    std::vector<const FeatureSequence*> train_videos;
    for (const FeatureSequence& v : train.videos) train_videos.push_back(&v);
    NeuralConfig base_cfg = ncfg;
    base_cfg.seed = derive_seed(seed, 0x0a5e000 + std::uint64_t(fold));
    const detail::PlainModel root_only = detail::train_plain(train_videos, base_cfg);
    MetricsReport root_metrics;
    for (const FeatureSequence& video : test.videos) {
      const std::vector<int> labels = detail::predict_plain(root_only, video);
      for (int t = 0; t < video.length(); ++t)
        if (video.mask[std::size_t(t)])
          root_metrics.add_utterance(video.labels[std::size_t(t)], labels[std::size_t(t)]);
      ++root_metrics.video_total;
      root_metrics.video_correct +=
          (majority_vote(labels, video.mask) == majority_vote(video.labels, video.mask));
    }
    report.rows.push_back({fold, "root_only", std::move(root_metrics)});

    // SEP-style: per cue, split train users at the median; one base model per
    // side; per-utterance majority vote across cues.
    struct CueModels {
      double median = 0.0;
      detail::PlainModel low, high;
    };
    std::vector<std::optional<CueModels>> cue_models(ds.cues.count());
    for (std::size_t c = 0; c < ds.cues.count(); ++c) {
      std::vector<double> values;
      for (const SurrogatePoint& p : train.users) values.push_back(p.coords[c]);
      std::sort(values.begin(), values.end());
      const double median = values[(values.size() - 1) / 2];
      std::vector<const FeatureSequence*> low, high;
      for (const FeatureSequence& v : train.videos)
        (train.user(v.user_id).coords[c] >= median ? high : low).push_back(&v);
      if (low.empty() || high.empty()) continue;  // degenerate cue
      CueModels cm;
      cm.median = median;
      NeuralConfig cue_cfg = ncfg;
      cue_cfg.seed = derive_seed(seed, 0x5e9000 + std::uint64_t(fold) * 64 + c * 2);
      cm.low = detail::train_plain(low, cue_cfg);
      cue_cfg.seed = derive_seed(seed, 0x5e9000 + std::uint64_t(fold) * 64 + c * 2 + 1);
      cm.high = detail::train_plain(high, cue_cfg);
      cue_models[c] = std::move(cm);
    }
    MetricsReport sep_metrics;
    for (const FeatureSequence& video : test.videos) {
      const SurrogatePoint& user = test.user(video.user_id);
      std::vector<int> votes_pos(std::size_t(video.length()), 0);
      std::vector<int> votes_total(std::size_t(video.length()), 0);
      for (std::size_t c = 0; c < ds.cues.count(); ++c) {
        if (!cue_models[c]) continue;
        const CueModels& cm = *cue_models[c];
        const detail::PlainModel& side = user.coords[c] >= cm.median ? cm.high : cm.low;
        const std::vector<int> labels = detail::predict_plain(side, video);
        for (int t = 0; t < video.length(); ++t)
          if (video.mask[std::size_t(t)]) {
            ++votes_total[std::size_t(t)];
            votes_pos[std::size_t(t)] += (labels[std::size_t(t)] == 1);
          }
      }
      std::vector<int> final_labels(std::size_t(video.length()), -1);
      for (int t = 0; t < video.length(); ++t)
        if (video.mask[std::size_t(t)])
          final_labels[std::size_t(t)] =
              votes_total[std::size_t(t)] == 0
                  ? 1
                  : (2 * votes_pos[std::size_t(t)] >= votes_total[std::size_t(t)] ? 1 : 0);
      for (int t = 0; t < video.length(); ++t)
        if (video.mask[std::size_t(t)])
          sep_metrics.add_utterance(video.labels[std::size_t(t)], final_labels[std::size_t(t)]);
      ++sep_metrics.video_total;
      sep_metrics.video_correct +=
          (majority_vote(final_labels, video.mask) == majority_vote(video.labels, video.mask));
    }
    report.rows.push_back({fold, "sep", std::move(sep_metrics)});
  }
  return report;
}

}  // namespace cogtree
