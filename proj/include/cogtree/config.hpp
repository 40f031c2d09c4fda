#pragma once

// One structured configuration file supplies every knob plus the seed.
// Missing keys fall back to defaults; unknown strategy names are rejected.

#include <cstdint>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cogtree/cogspace.hpp"
#include "cogtree/common.hpp"
#include "cogtree/neural.hpp"
#include "cogtree/partition.hpp"
#include "cogtree/tree.hpp"

namespace cogtree {

struct ConfigBundle {
  SpaceConfig space;
  PartitionConfig partition;
  TreeConfig tree;
  NeuralConfig neural;
  std::uint64_t seed = 0;

  void validate() const {
    space.validate();
    partition.validate();
    tree.validate();
    neural.validate();
  }
};

inline Strategy parse_strategy(const std::string& name) {
  if (name == "theoretical") return Strategy::Theoretical;
  if (name == "cluster") return Strategy::Cluster;
  raise(Errc::InvalidArgument, "unknown strategy '" + name + "' (theoretical|cluster)");
}

inline ConfigBundle load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ParseError, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    raise(Errc::ParseError, "config '" + path + "': " + e.what());
  }
  ConfigBundle cfg;
  try {
    if (j.contains("space")) cfg.space.minkowski_order = j["space"].value("r", 2);
    if (j.contains("partition")) {
      const auto& p = j["partition"];
      cfg.partition.lambda_cut = p.value("lambda_cut", cfg.partition.lambda_cut);
      cfg.partition.cutpoint_candidates =
          p.value("cutpoint_candidates", cfg.partition.cutpoint_candidates);
      cfg.partition.cluster_min = p.value("cluster_min", cfg.partition.cluster_min);
      cfg.partition.cluster_max = p.value("cluster_max", cfg.partition.cluster_max);
    }
    if (j.contains("tree")) {
      const auto& t = j["tree"];
      cfg.tree.theta_p = t.value("theta_p", cfg.tree.theta_p);
      cfg.tree.theta_e = t.value("theta_e", cfg.tree.theta_e);
      cfg.tree.theta_a = t.value("theta_a", cfg.tree.theta_a);
      cfg.tree.theta_b = t.value("theta_b", cfg.tree.theta_b);
      cfg.tree.lambda_dropout = t.value("lambda_dropout", cfg.tree.lambda_dropout);
      cfg.tree.max_dropout = t.value("max_dropout", cfg.tree.max_dropout);
      if (t.contains("strategy")) cfg.tree.strategy = parse_strategy(t["strategy"]);
    }
    if (j.contains("neural")) {
      const auto& n = j["neural"];
      cfg.neural.embed_dim = n.value("embed_dim", cfg.neural.embed_dim);
      cfg.neural.epochs = n.value("epochs", cfg.neural.epochs);
      cfg.neural.learning_rate = n.value("learning_rate", cfg.neural.learning_rate);
      cfg.neural.init_scale = n.value("init_scale", cfg.neural.init_scale);
    }
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ParseError, "config '" + path + "': " + e.what());
  }
  cfg.neural.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

}  // namespace cogtree
