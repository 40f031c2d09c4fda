#pragma once

// Synthetic dataset generator: users drawn from a seeded Gaussian mixture
// over the cue space (clipped to [0,1]); each mixture component carries its
// own linear labeling rule over the modality features, so sentiment depends
// on the cognitive cluster. Rules of even/odd component pairs are sign
// conflicting, which caps what a single cluster-blind model can learn.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogtree/common.hpp"
#include "cogtree/dataset.hpp"

namespace cogtree {

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;  // one entry per cue
  double stddev = 0.06;
};

struct SynthSpec {
  int n_users = 93;
  int avg_utterances = 24;  // per video
  int videos_per_user = 1;
  std::vector<std::string> cues = {"OPN", "CON", "EXT", "AGR", "NEU"};
  std::vector<MixtureComponent> components;  // empty -> three separated defaults
  double label_noise = 0.05;
  std::array<int, 3> dims{4, 4, 4};
  std::uint64_t seed = 0;

  void validate() const {
    if (n_users < 1) raise(Errc::InvalidArgument, "n_users must be positive");
    if (avg_utterances < 1) raise(Errc::InvalidArgument, "avg_utterances must be positive");
    if (videos_per_user < 1) raise(Errc::InvalidArgument, "videos_per_user must be positive");
    if (!(label_noise >= 0.0 && label_noise < 0.5))
      raise(Errc::InvalidArgument, "label_noise must lie in [0,0.5)");
    for (int d : dims)
      if (d < 1) raise(Errc::InvalidArgument, "feature dims must be positive");
    if (cues.empty()) raise(Errc::InvalidArgument, "cue list must not be empty");
    for (const MixtureComponent& c : components) {
      if (c.mean.size() != cues.size())
        raise(Errc::InvalidArgument, "component mean length does not match cue count");
      if (!(c.weight > 0.0)) raise(Errc::InvalidArgument, "component weight must be positive");
      if (!(c.stddev > 0.0)) raise(Errc::InvalidArgument, "component stddev must be positive");
    }
  }

  std::vector<MixtureComponent> effective_components() const {
    if (!components.empty()) return components;
    std::vector<MixtureComponent> out(3);
    const std::size_t n = cues.size();
    out[0].mean.assign(n, 0.2);
    out[1].mean.assign(n, 0.8);
    out[2].mean.assign(n, 0.5);
    for (std::size_t c = 0; c < n; ++c) {
      if (c % 2 == 1) out[0].mean[c] = 0.35;
      if (c % 2 == 0) out[1].mean[c] = 0.65;
      out[2].mean[c] = c % 2 == 0 ? 0.15 : 0.85;
    }
    return out;
  }
};

struct SynthGroundTruth {
  std::vector<int> user_component;                 // aligned with sorted user ids
  std::vector<std::string> user_ids;
  std::vector<std::vector<double>> rule_weights;   // per component, over concat(A,V,T)
};

namespace detail {

// Component labeling rules: unit vectors where consecutive pairs conflict
// (w_{2j+1} = -w_{2j}), so no shared linear rule fits two paired clusters.
inline std::vector<std::vector<double>> make_rules(std::size_t components, std::size_t dim,
                                                   std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> rules;
  for (std::size_t k = 0; k < components; ++k) {
    if (k % 2 == 1) {
      std::vector<double> w = rules[k - 1];
      for (double& v : w) v = -v;
      rules.push_back(std::move(w));
      continue;
    }
    std::vector<double> w(dim);
    double norm = 0.0;
    for (double& v : w) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : w) v /= norm > 0.0 ? norm : 1.0;
    rules.push_back(std::move(w));
  }
  return rules;
}

}  // namespace detail

// Generate a dataset in memory. Deterministic for a given spec.
inline Dataset synth(const SynthSpec& spec, SynthGroundTruth* truth = nullptr) {
  spec.validate();
  const std::vector<MixtureComponent> components = spec.effective_components();
  std::mt19937_64 rng(derive_seed(spec.seed, 0xda7a));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni01(0.0, 1.0);

  const std::size_t total_dim =
      std::size_t(spec.dims[0]) + std::size_t(spec.dims[1]) + std::size_t(spec.dims[2]);
  const std::vector<std::vector<double>> rules =
      detail::make_rules(components.size(), total_dim, rng);

  std::vector<double> weights;
  for (const MixtureComponent& c : components) weights.push_back(c.weight);
  std::discrete_distribution<int> pick_component(weights.begin(), weights.end());

  Dataset ds;
  ds.cues.names = spec.cues;
  ds.dims = spec.dims;

  const int id_width = int(std::to_string(spec.n_users - 1).size());
  std::vector<int> user_component;
  for (int u = 0; u < spec.n_users; ++u) {
    std::string id = std::to_string(u);
    id.insert(0, std::size_t(id_width) - id.size(), '0');
    SurrogatePoint p;
    p.user_id = "u" + id;
    const int k = pick_component(rng);
    user_component.push_back(k);
    for (std::size_t c = 0; c < spec.cues.size(); ++c) {
      double v = components[std::size_t(k)].mean[c] +
                 components[std::size_t(k)].stddev * normal(rng);
      p.coords.push_back(std::clamp(v, 0.0, 1.0));
    }
    ds.users.push_back(std::move(p));
  }

  int g = 0;
  std::vector<int> lengths;
  std::uniform_int_distribution<int> pick_len(std::max(1, spec.avg_utterances - 4),
                                              spec.avg_utterances + 4);
  for (int u = 0; u < spec.n_users; ++u)
    for (int v = 0; v < spec.videos_per_user; ++v) {
      lengths.push_back(pick_len(rng));
      g = std::max(g, lengths.back());
    }
  ds.padded_length = g;

  std::size_t video_index = 0;
  for (int u = 0; u < spec.n_users; ++u) {
    const std::vector<double>& rule = rules[std::size_t(user_component[std::size_t(u)])];
    for (int v = 0; v < spec.videos_per_user; ++v, ++video_index) {
      FeatureSequence seq;
      seq.user_id = ds.users[std::size_t(u)].user_id;
      seq.video_id = seq.user_id + "_v" + std::to_string(v);
      const int len = lengths[video_index];
      for (int m = 0; m < 3; ++m)
        seq.modalities[std::size_t(m)] = Eigen::MatrixXd::Zero(spec.dims[std::size_t(m)], g);
      seq.mask.assign(std::size_t(g), 0);
      seq.labels.assign(std::size_t(g), -1);
      for (int t = 0; t < len; ++t) {
        double margin = 0.0;
        std::size_t at = 0;
        for (int m = 0; m < 3; ++m)
          for (int d = 0; d < spec.dims[std::size_t(m)]; ++d, ++at) {
            const double x = normal(rng);
            seq.modalities[std::size_t(m)](d, t) = x;
            margin += rule[at] * x;
          }
        int label = margin > 0.0 ? 1 : 0;
        if (spec.label_noise > 0.0 && uni01(rng) < spec.label_noise) label = 1 - label;
        seq.mask[std::size_t(t)] = 1;
        seq.labels[std::size_t(t)] = label;
      }
      ds.videos.push_back(std::move(seq));
    }
  }
  std::sort(ds.videos.begin(), ds.videos.end(),
            [](const FeatureSequence& a, const FeatureSequence& b) {
              return a.video_id < b.video_id;
            });

  if (truth) {
    truth->user_component = user_component;
    truth->user_ids.clear();
    for (const SurrogatePoint& p : ds.users) truth->user_ids.push_back(p.user_id);
    truth->rule_weights = rules;
  }
  return ds;
}

// Generate and write a dataset plus its ground-truth sidecar.
inline Dataset synth_to_dir(const SynthSpec& spec, const std::string& dir) {
  SynthGroundTruth truth;
  Dataset ds = synth(spec, &truth);
  emit(ds, dir);
  nlohmann::json j;
  j["user_component"] = nlohmann::json::object();
  for (std::size_t i = 0; i < truth.user_ids.size(); ++i)
    j["user_component"][truth.user_ids[i]] = truth.user_component[i];
  j["rule_weights"] = truth.rule_weights;
  j["label_noise"] = spec.label_noise;
  std::ofstream out(std::filesystem::path(dir) / "ground_truth.json");
  out << j.dump(2) << "\n";
  return ds;
}

inline SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ParseError, "cannot open synth spec '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    raise(Errc::ParseError, "synth spec '" + path + "': " + e.what());
  }
  SynthSpec spec;
  spec.n_users = j.value("n_users", spec.n_users);
  spec.avg_utterances = j.value("avg_utterances", spec.avg_utterances);
  spec.videos_per_user = j.value("videos_per_user", spec.videos_per_user);
  spec.label_noise = j.value("label_noise", spec.label_noise);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("cues")) spec.cues = j.at("cues").get<std::vector<std::string>>();
  if (j.contains("dims")) {
    spec.dims[0] = j.at("dims").at("A").get<int>();
    spec.dims[1] = j.at("dims").at("V").get<int>();
    spec.dims[2] = j.at("dims").at("T").get<int>();
  }
  if (j.contains("components")) {
    spec.components.clear();
    for (const auto& c : j.at("components")) {
      MixtureComponent mc;
      mc.weight = c.value("weight", 1.0);
      mc.mean = c.at("mean").get<std::vector<double>>();
      mc.stddev = c.value("stddev", 0.06);
      spec.components.push_back(std::move(mc));
    }
  }
  spec.validate();
  return spec;
}

}  // namespace cogtree
