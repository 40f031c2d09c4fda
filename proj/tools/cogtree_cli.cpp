// Command-line front end: synthetic data generation, tree building and
// training, prediction, evaluation, the k-fold benchmark, and inspection of
// built trees.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cogtree/config.hpp"
#include "cogtree/pipeline.hpp"
#include "cogtree/serialize.hpp"
#include "cogtree/synth.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file (JSON)");
  cmd->add_option("--seed", opts.seed, "seed override");
  cmd->add_option("--strategy", opts.strategy, "fragmentation strategy (theoretical|cluster)")
      ->check(CLI::IsMember({"theoretical", "cluster"}));
}

cogtree::ConfigBundle resolve_config(const CommonOpts& opts) {
  cogtree::ConfigBundle cfg;
  if (!opts.config_path.empty()) cfg = cogtree::load_config(opts.config_path);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.neural.seed = *opts.seed;
  }
  if (opts.strategy) cfg.tree.strategy = cogtree::parse_strategy(*opts.strategy);
  cfg.validate();
  return cfg;
}

void write_candidates(const std::string& path,
                      const std::vector<cogtree::NodeCandidateDiag>& diags) {
  std::ofstream out(path);
  out << "node_id,kind,candidate,objective,feasible\n";
  for (const auto& d : diags)
    out << d.node_id << ',' << d.diag.kind << ',' << d.diag.candidate << ',' << d.diag.objective
        << ',' << (d.diag.feasible ? 1 : 0) << '\n';
}

void print_metrics(const cogtree::MetricsReport& m) {
  std::cout << "tp=" << m.tp << " fp=" << m.fp << " tn=" << m.tn << " fn=" << m.fn << "\n"
            << "precision=" << m.precision() << "\n"
            << "recall_pos=" << m.recall_pos() << "\n"
            << "recall_neg=" << m.recall_neg() << "\n"
            << "f1=" << m.f1() << "\n"
            << "utterance_accuracy=" << m.utterance_accuracy() << "\n"
            << "video_accuracy=" << m.video_accuracy() << "\n";
}

std::string frag_summary(const cogtree::TreeNode& n) {
  if (!n.frag_params) return "-";
  if (std::holds_alternative<cogtree::TheoreticalParams>(*n.frag_params)) {
    const auto& tp = std::get<cogtree::TheoreticalParams>(*n.frag_params);
    return "cut dim=" + std::to_string(tp.cut_dimension) +
           " value=" + std::to_string(tp.cut_value);
  }
  const auto& cp = std::get<cogtree::ClusterParams>(*n.frag_params);
  return "kmeans d=" + std::to_string(cp.medoids.size());
}

std::string termination_summary(const cogtree::TreeNode& n) {
  if (n.termination.empty()) return n.is_leaf() ? "-" : "branch";
  std::string out;
  for (cogtree::TermCriterion c : n.termination) {
    if (!out.empty()) out += "+";
    out += cogtree::criterion_name(c);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cognitive-space adaptive tree for utterance-level sentiment analysis"};
  app.require_subcommand(1);

  // --- synth-data ---
  auto* synth_cmd = app.add_subcommand("synth-data", "generate a synthetic dataset");
  CommonOpts synth_opts;
  std::string synth_out, synth_spec_path;
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--spec", synth_spec_path, "generator spec (JSON)");
  add_common(synth_cmd, synth_opts);

  // --- build-tree ---
  auto* build_cmd = app.add_subcommand("build-tree", "build the adaptive tree (no training)");
  CommonOpts build_opts;
  std::string build_data, build_out, build_candidates;
  build_cmd->add_option("--data", build_data, "dataset manifest")->required();
  build_cmd->add_option("--out", build_out, "output tree file")->required();
  build_cmd->add_option("--candidates-out", build_candidates,
                        "dump per-candidate objective values (CSV)");
  add_common(build_cmd, build_opts);

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "build the tree and train every submodel");
  CommonOpts train_opts;
  std::string train_data, train_out, train_loss, train_candidates;
  train_cmd->add_option("--data", train_data, "dataset manifest")->required();
  train_cmd->add_option("--out", train_out, "output model file")->required();
  train_cmd->add_option("--loss-out", train_loss, "per-node training-loss curves (CSV)");
  train_cmd->add_option("--candidates-out", train_candidates,
                        "dump per-candidate objective values (CSV)");
  add_common(train_cmd, train_opts);

  // --- predict ---
  auto* predict_cmd = app.add_subcommand("predict", "predict sentiments for dataset videos");
  CommonOpts predict_opts;
  std::string predict_model, predict_data, predict_video;
  predict_cmd->add_option("--model", predict_model, "trained model file")->required();
  predict_cmd->add_option("--data", predict_data, "dataset manifest")->required();
  predict_cmd->add_option("--video", predict_video, "predict a single video id");
  add_common(predict_cmd, predict_opts);

  // --- evaluate ---
  auto* eval_cmd = app.add_subcommand("evaluate", "benchmark metrics on a dataset");
  CommonOpts eval_opts;
  std::string eval_model, eval_data;
  eval_cmd->add_option("--model", eval_model, "trained model file")->required();
  eval_cmd->add_option("--data", eval_data, "dataset manifest (test users)")->required();
  add_common(eval_cmd, eval_opts);

  // --- benchmark ---
  auto* bench_cmd = app.add_subcommand("benchmark", "user-level k-fold benchmark");
  CommonOpts bench_opts;
  std::string bench_data, bench_out;
  int bench_k = 5;
  bool bench_no_baselines = false;
  bench_cmd->add_option("--data", bench_data, "dataset manifest")->required();
  bench_cmd->add_option("--k", bench_k, "fold count (default 5)");
  bench_cmd->add_option("--out", bench_out, "write the per-fold table (CSV)");
  bench_cmd->add_flag("--no-baselines", bench_no_baselines, "skip root-only and SEP baselines");
  add_common(bench_cmd, bench_opts);

  // --- inspect-tree ---
  auto* inspect_cmd = app.add_subcommand("inspect-tree", "print the tree, one node per line");
  CommonOpts inspect_opts;
  std::string inspect_model;
  bool inspect_tsv = false;
  inspect_cmd->add_option("--model", inspect_model, "tree/model file")->required();
  inspect_cmd->add_flag("--tsv", inspect_tsv, "structured tab-separated output for plotting");
  add_common(inspect_cmd, inspect_opts);

  // --- partition-metrics ---
  auto* pm_cmd = app.add_subcommand("partition-metrics",
                                    "per-level silhouette and Davies-Bouldin of a built tree");
  CommonOpts pm_opts;
  std::string pm_model;
  pm_cmd->add_option("--model", pm_model, "tree/model file")->required();
  add_common(pm_cmd, pm_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      cogtree::SynthSpec spec;
      if (!synth_spec_path.empty()) spec = cogtree::load_synth_spec(synth_spec_path);
      if (synth_opts.seed) spec.seed = *synth_opts.seed;
      const cogtree::Dataset ds = cogtree::synth_to_dir(spec, synth_out);
      std::cout << "wrote " << ds.users.size() << " users, " << ds.videos.size()
                << " videos (padded length " << ds.padded_length << ") to " << synth_out << "\n";
    } else if (build_cmd->parsed()) {
      const cogtree::ConfigBundle cfg = resolve_config(build_opts);
      const cogtree::Dataset ds = cogtree::ingest(build_data);
      std::vector<cogtree::NodeCandidateDiag> diags;
      const cogtree::AdaptiveTree tree =
          cogtree::build(ds.users, cogtree::labels_by_user(ds), cfg.space, cfg.partition,
                         cfg.tree, cfg.seed, build_candidates.empty() ? nullptr : &diags);
      if (!build_candidates.empty()) write_candidates(build_candidates, diags);
      cogtree::save_tree(tree, build_out);
      std::cout << "built tree: " << tree.nodes.size() << " nodes, " << tree.leaves.size()
                << " leaves -> " << build_out << "\n";
    } else if (train_cmd->parsed()) {
      const cogtree::ConfigBundle cfg = resolve_config(train_opts);
      const cogtree::Dataset ds = cogtree::ingest(train_data);
      cogtree::TrainStats stats;
      std::vector<cogtree::NodeCandidateDiag> diags;
      const cogtree::AdaptiveTree tree =
          cogtree::train_tree(ds, cfg.space, cfg.partition, cfg.tree, cfg.neural, cfg.seed,
                              &stats, train_candidates.empty() ? nullptr : &diags);
      if (!train_candidates.empty()) write_candidates(train_candidates, diags);
      if (!train_loss.empty()) {
        std::ofstream out(train_loss);
        out << "node_id,epoch,loss\n";
        for (const auto& curve : stats.loss_curves)
          for (std::size_t e = 0; e < curve.losses.size(); ++e)
            out << curve.node_id << ',' << e << ',' << curve.losses[e] << '\n';
      }
      cogtree::save_tree(tree, train_out);
      std::cout << "trained " << tree.nodes.size() << " submodels -> " << train_out << "\n";
    } else if (predict_cmd->parsed()) {
      const cogtree::AdaptiveTree tree = cogtree::load_tree(predict_model);
      const cogtree::Dataset ds = cogtree::ingest(predict_data);
      std::cout << "video_id,sentiment,utterance_labels\n";
      for (const cogtree::FeatureSequence& video : ds.videos) {
        if (!predict_video.empty() && video.video_id != predict_video) continue;
        const cogtree::Prediction p =
            cogtree::predict(tree, video, ds.user(video.user_id));
        std::cout << video.video_id << ',' << p.sentiment << ',';
        bool first = true;
        for (int t = 0; t < video.length(); ++t)
          if (video.mask[std::size_t(t)]) {
            if (!first) std::cout << ' ';
            std::cout << p.utterance_labels[std::size_t(t)];
            first = false;
          }
        std::cout << '\n';
      }
    } else if (eval_cmd->parsed()) {
      const cogtree::AdaptiveTree tree = cogtree::load_tree(eval_model);
      const cogtree::Dataset ds = cogtree::ingest(eval_data);
      cogtree::MetricsReport m = cogtree::evaluate(tree, ds);
      m.levels = cogtree::evaluate_partition_quality(tree);
      print_metrics(m);
      for (const cogtree::LevelMetric& l : m.levels)
        std::cout << "level " << l.depth << ": nodes=" << l.node_count
                  << " silhouette=" << l.silhouette << " davies_bouldin=" << l.davies_bouldin
                  << "\n";
    } else if (bench_cmd->parsed()) {
      const cogtree::ConfigBundle cfg = resolve_config(bench_opts);
      const cogtree::Dataset ds = cogtree::ingest(bench_data);
      const cogtree::BenchmarkReport report =
          cogtree::kfold_benchmark(ds, bench_k, cfg.space, cfg.partition, cfg.tree, cfg.neural,
                                   cfg.seed, !bench_no_baselines);
      const std::string csv = report.to_csv();
      if (!bench_out.empty()) {
        std::ofstream out(bench_out);
        out << csv;
      }
      std::cout << csv;
      for (std::size_t fold = 0; fold < report.tree_level_f1.size(); ++fold) {
        std::cout << "fold " << fold << " level F1:";
        for (const cogtree::LevelF1& l : report.tree_level_f1[fold])
          std::cout << " depth" << l.depth << "=" << l.mean_f1;
        std::cout << "\n";
      }
    } else if (inspect_cmd->parsed()) {
      const cogtree::AdaptiveTree tree = cogtree::load_tree(inspect_model);
      if (inspect_tsv) {
        std::cout << "id\tparent\tdepth\tsubspace\tadopted\tparams\ttermination\ttrained\n";
        for (const cogtree::TreeNode& n : tree.nodes)
          std::cout << n.id << '\t' << n.parent << '\t' << n.depth << '\t' << n.subspace.size()
                    << '\t' << n.adopted.size() << '\t' << frag_summary(n) << '\t'
                    << termination_summary(n) << '\t' << (n.submodel ? 1 : 0) << '\n';
      } else {
        for (const cogtree::TreeNode& n : tree.nodes) {
          std::cout << "node " << n.id << " parent=" << n.parent << " depth=" << n.depth
                    << " |subspace|=" << n.subspace.size() << " |adopted|=" << n.adopted.size()
                    << " params=[" << frag_summary(n) << "]"
                    << " termination=" << termination_summary(n)
                    << (n.submodel ? " trained" : "") << "\n";
        }
      }
    } else if (pm_cmd->parsed()) {
      const cogtree::AdaptiveTree tree = cogtree::load_tree(pm_model);
      const std::vector<cogtree::LevelMetric> levels =
          cogtree::evaluate_partition_quality(tree);
      if (levels.empty()) {
        std::cout << "no level with two or more nodes; nothing to score\n";
      } else {
        std::cout << "depth,node_count,silhouette,davies_bouldin\n";
        for (const cogtree::LevelMetric& l : levels)
          std::cout << l.depth << ',' << l.node_count << ',' << l.silhouette << ','
                    << l.davies_bouldin << '\n';
      }
    }
  } catch (const cogtree::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
