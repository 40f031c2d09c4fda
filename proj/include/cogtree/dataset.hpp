#pragma once

// Dataset ingestion and emission. Features arrive precomputed as delimited
// text, one row per utterance per modality; the manifest ties the files
// together and declares the cue set and feature dimensions.
//
// Layout (paths relative to the manifest):
//   users file     user_id,<cue_1>,...,<cue_n>
//   labels file    user_id,video_id,utterance,label        (utterance 1-based)
//   feature files  user_id,video_id,utterance,f1,...,f_dm  (one per modality)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogtree/cogspace.hpp"
#include "cogtree/common.hpp"
#include "cogtree/neural.hpp"
#include "cogtree/partition.hpp"

namespace cogtree {

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::string users_file;
  std::string labels_file;
  std::array<std::string, 3> feature_files;  // A, V, T
  CueSet cues;
  std::array<int, 3> dims{0, 0, 0};

  std::filesystem::path users_path() const { return base_dir / users_file; }
  std::filesystem::path labels_path() const { return base_dir / labels_file; }
  std::filesystem::path feature_path(int m) const {
    return base_dir / feature_files[std::size_t(m)];
  }
};

struct Dataset {
  CueSet cues;
  std::array<int, 3> dims{0, 0, 0};
  int padded_length = 0;                // g
  std::vector<SurrogatePoint> users;    // sorted by user_id
  std::vector<FeatureSequence> videos;  // sorted by video_id

  const SurrogatePoint& user(const std::string& user_id) const {
    auto it = std::lower_bound(
        users.begin(), users.end(), user_id,
        [](const SurrogatePoint& p, const std::string& id) { return p.user_id < id; });
    if (it == users.end() || it->user_id != user_id)
      raise(Errc::CrossReference, "unknown user '" + user_id + "'");
    return *it;
  }

  std::vector<const FeatureSequence*> videos_of(const std::string& user_id) const {
    std::vector<const FeatureSequence*> out;
    for (const FeatureSequence& v : videos)
      if (v.user_id == user_id) out.push_back(&v);
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& text, const std::string& file, std::size_t row) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size() || !std::isfinite(v)) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    raise(Errc::ParseError, file + ":" + std::to_string(row) + ": not a finite decimal: '" +
                                text + "'");
  }
}

inline int parse_int(const std::string& text, const std::string& file, std::size_t row) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    raise(Errc::ParseError, file + ":" + std::to_string(row) + ": not an integer: '" + text + "'");
  }
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ParseError, "cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct UtteranceKey {
  std::string video_id;
  int utterance;
  bool operator<(const UtteranceKey& o) const {
    return video_id != o.video_id ? video_id < o.video_id : utterance < o.utterance;
  }
};

}  // namespace detail

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ParseError, "cannot open manifest '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    raise(Errc::ParseError, "manifest '" + path + "': " + e.what());
  }
  DatasetManifest m;
  m.base_dir = std::filesystem::path(path).parent_path();
  try {
    m.users_file = j.at("users").get<std::string>();
    m.labels_file = j.at("labels").get<std::string>();
    m.feature_files[0] = j.at("features").at("A").get<std::string>();
    m.feature_files[1] = j.at("features").at("V").get<std::string>();
    m.feature_files[2] = j.at("features").at("T").get<std::string>();
    m.cues.names = j.at("cues").get<std::vector<std::string>>();
    m.dims[0] = j.at("dims").at("A").get<int>();
    m.dims[1] = j.at("dims").at("V").get<int>();
    m.dims[2] = j.at("dims").at("T").get<int>();
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ParseError, "manifest '" + path + "': " + e.what());
  }
  m.cues.validate();
  for (int d : m.dims)
    if (d < 1) raise(Errc::ParseError, "manifest '" + path + "': feature dims must be positive");
  return m;
}

// Read, cross-validate and pad the dataset described by a manifest.
// Cue columns arriving outside [0,1] are min-max normalized per cue.
inline Dataset ingest(const DatasetManifest& manifest) {
  Dataset ds;
  ds.cues = manifest.cues;
  ds.dims = manifest.dims;

  // Users.
  const std::string users_name = manifest.users_file;
  const std::vector<std::string> user_lines = detail::read_lines(manifest.users_path());
  if (user_lines.empty()) raise(Errc::ParseError, users_name + ": empty file");
  {
    const std::vector<std::string> header = detail::split_csv(user_lines[0]);
    if (header.size() != manifest.cues.count() + 1 || header[0] != "user_id")
      raise(Errc::ParseError, users_name + ":1: expected header user_id,<cues>");
    for (std::size_t c = 0; c < manifest.cues.count(); ++c)
      if (header[c + 1] != manifest.cues.names[c])
        raise(Errc::ParseError, users_name + ":1: cue column '" + header[c + 1] +
                                    "' does not match manifest cue '" + manifest.cues.names[c] +
                                    "'");
  }
  for (std::size_t i = 1; i < user_lines.size(); ++i) {
    if (user_lines[i].empty()) continue;
    const std::vector<std::string> f = detail::split_csv(user_lines[i]);
    if (f.size() != manifest.cues.count() + 1)
      raise(Errc::ParseError, users_name + ":" + std::to_string(i + 1) + ": expected " +
                                  std::to_string(manifest.cues.count() + 1) + " columns, got " +
                                  std::to_string(f.size()));
    SurrogatePoint p;
    p.user_id = f[0];
    for (std::size_t c = 0; c < manifest.cues.count(); ++c)
      p.coords.push_back(detail::parse_double(f[c + 1], users_name, i + 1));
    ds.users.push_back(std::move(p));
  }
  if (ds.users.empty()) raise(Errc::ParseError, users_name + ": no user rows");
  std::sort(ds.users.begin(), ds.users.end(),
            [](const SurrogatePoint& a, const SurrogatePoint& b) { return a.user_id < b.user_id; });
  for (std::size_t i = 1; i < ds.users.size(); ++i)
    if (ds.users[i].user_id == ds.users[i - 1].user_id)
      raise(Errc::ParseError, users_name + ": duplicate user '" + ds.users[i].user_id + "'");

  // Per-cue min-max normalization when raw scores leave [0,1].
  for (std::size_t c = 0; c < manifest.cues.count(); ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const SurrogatePoint& p : ds.users) {
      lo = std::min(lo, p.coords[c]);
      hi = std::max(hi, p.coords[c]);
    }
    if (lo >= 0.0 && hi <= 1.0) continue;
    for (SurrogatePoint& p : ds.users)
      p.coords[c] = hi > lo ? (p.coords[c] - lo) / (hi - lo) : 0.5;
  }

  // Labels.
  struct VideoAccum {
    std::string user_id;
    std::map<int, int> labels;                              // utterance -> label
    std::array<std::map<int, std::vector<double>>, 3> feats; // utterance -> row
  };
  std::map<std::string, VideoAccum> videos;

  const std::string labels_name = manifest.labels_file;
  const std::vector<std::string> label_lines = detail::read_lines(manifest.labels_path());
  if (label_lines.empty() || detail::split_csv(label_lines[0]) !=
                                 std::vector<std::string>{"user_id", "video_id", "utterance",
                                                          "label"})
    raise(Errc::ParseError, labels_name + ":1: expected header user_id,video_id,utterance,label");
  for (std::size_t i = 1; i < label_lines.size(); ++i) {
    if (label_lines[i].empty()) continue;
    const std::vector<std::string> f = detail::split_csv(label_lines[i]);
    if (f.size() != 4)
      raise(Errc::ParseError, labels_name + ":" + std::to_string(i + 1) + ": expected 4 columns");
    const int utterance = detail::parse_int(f[2], labels_name, i + 1);
    const int label = detail::parse_int(f[3], labels_name, i + 1);
    if (label != 0 && label != 1)
      raise(Errc::ParseError,
            labels_name + ":" + std::to_string(i + 1) + ": label must be 0 or 1, got " + f[3]);
    bool known_user = false;
    for (const SurrogatePoint& p : ds.users) known_user = known_user || p.user_id == f[0];
    if (!known_user)
      raise(Errc::CrossReference, labels_name + ":" + std::to_string(i + 1) +
                                      ": missing user '" + f[0] + "' for video '" + f[1] + "'");
    VideoAccum& v = videos[f[1]];
    if (v.user_id.empty())
      v.user_id = f[0];
    else if (v.user_id != f[0])
      raise(Errc::CrossReference, labels_name + ":" + std::to_string(i + 1) + ": video '" + f[1] +
                                      "' claimed by users '" + v.user_id + "' and '" + f[0] + "'");
    if (!v.labels.emplace(utterance, label).second)
      raise(Errc::ParseError, labels_name + ":" + std::to_string(i + 1) +
                                  ": duplicate utterance " + f[2] + " of video '" + f[1] + "'");
  }
  if (videos.empty()) raise(Errc::ParseError, labels_name + ": no utterance rows");

  // Features.
  for (int m = 0; m < 3; ++m) {
    const std::string name = manifest.feature_files[std::size_t(m)];
    const std::vector<std::string> lines = detail::read_lines(manifest.feature_path(m));
    if (lines.empty()) raise(Errc::ParseError, name + ": empty file");
    const std::size_t expected = 3 + std::size_t(manifest.dims[std::size_t(m)]);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const std::vector<std::string> f = detail::split_csv(lines[i]);
      if (f.size() != expected)
        raise(Errc::ParseError, name + ":" + std::to_string(i + 1) + ": expected " +
                                    std::to_string(expected) + " columns (ragged feature row), got " +
                                    std::to_string(f.size()));
      auto it = videos.find(f[1]);
      if (it == videos.end())
        raise(Errc::CrossReference,
              name + ":" + std::to_string(i + 1) + ": video '" + f[1] + "' has no label rows");
      if (it->second.user_id != f[0])
        raise(Errc::CrossReference, name + ":" + std::to_string(i + 1) + ": video '" + f[1] +
                                        "' belongs to user '" + it->second.user_id + "', row says '" +
                                        f[0] + "'");
      const int utterance = detail::parse_int(f[2], name, i + 1);
      std::vector<double> row;
      row.reserve(expected - 3);
      for (std::size_t c = 3; c < expected; ++c)
        row.push_back(detail::parse_double(f[c], name, i + 1));
      if (!it->second.feats[std::size_t(m)].emplace(utterance, std::move(row)).second)
        raise(Errc::ParseError, name + ":" + std::to_string(i + 1) + ": duplicate utterance " +
                                    f[2] + " of video '" + f[1] + "'");
    }
  }

  // Cross-validate and pad.
  int g = 0;
  for (const auto& [video_id, v] : videos) {
    const int len = int(v.labels.size());
    for (int u = 1; u <= len; ++u)
      if (!v.labels.count(u))
        raise(Errc::CrossReference, "video '" + video_id + "': utterances are not contiguous (missing " +
                                        std::to_string(u) + " of " + std::to_string(len) + ")");
    for (int m = 0; m < 3; ++m) {
      if (int(v.feats[std::size_t(m)].size()) != len)
        raise(Errc::CrossReference, "video '" + video_id + "': " +
                                        std::to_string(v.feats[std::size_t(m)].size()) +
                                        " feature rows in modality " + std::to_string(m) +
                                        " but " + std::to_string(len) + " labels");
      for (int u = 1; u <= len; ++u)
        if (!v.feats[std::size_t(m)].count(u))
          raise(Errc::CrossReference, "video '" + video_id + "': missing features for utterance " +
                                          std::to_string(u) + " in modality " + std::to_string(m));
    }
    g = std::max(g, len);
  }
  ds.padded_length = g;

  for (const auto& [video_id, v] : videos) {
    FeatureSequence seq;
    seq.video_id = video_id;
    seq.user_id = v.user_id;
    const int len = int(v.labels.size());
    for (int m = 0; m < 3; ++m) {
      seq.modalities[std::size_t(m)] =
          Eigen::MatrixXd::Zero(manifest.dims[std::size_t(m)], g);
      for (int u = 1; u <= len; ++u) {
        const std::vector<double>& row = v.feats[std::size_t(m)].at(u);
        for (int r = 0; r < manifest.dims[std::size_t(m)]; ++r)
          seq.modalities[std::size_t(m)](r, u - 1) = row[std::size_t(r)];
      }
    }
    seq.mask.assign(std::size_t(g), 0);
    seq.labels.assign(std::size_t(g), -1);
    for (int u = 1; u <= len; ++u) {
      seq.mask[std::size_t(u - 1)] = 1;
      seq.labels[std::size_t(u - 1)] = v.labels.at(u);
    }
    ds.videos.push_back(std::move(seq));
  }
  std::sort(ds.videos.begin(), ds.videos.end(),
            [](const FeatureSequence& a, const FeatureSequence& b) {
              return a.video_id < b.video_id;
            });
  return ds;
}

inline Dataset ingest(const std::string& manifest_path) {
  return ingest(load_manifest(manifest_path));
}

// Write a dataset to a directory in the ingestion layout. Doubles print with
// 17 significant digits, so emit/ingest round-trips are exact.
inline void emit(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);

  {
    std::ofstream out(base / "users.csv");
    out << "user_id";
    for (const std::string& c : ds.cues.names) out << "," << c;
    out << "\n";
    for (const SurrogatePoint& p : ds.users) {
      out << p.user_id;
      for (double c : p.coords) out << "," << detail::format_double(c);
      out << "\n";
    }
  }
  {
    std::ofstream out(base / "labels.csv");
    out << "user_id,video_id,utterance,label\n";
    for (const FeatureSequence& v : ds.videos)
      for (int t = 0; t < v.length(); ++t)
        if (v.mask[std::size_t(t)])
          out << v.user_id << "," << v.video_id << "," << (t + 1) << ","
              << v.labels[std::size_t(t)] << "\n";
  }
  const std::array<std::string, 3> names = {"features_a.csv", "features_v.csv", "features_t.csv"};
  for (int m = 0; m < 3; ++m) {
    std::ofstream out(base / names[std::size_t(m)]);
    out << "user_id,video_id,utterance";
    for (int d = 0; d < ds.dims[std::size_t(m)]; ++d) out << ",f" << (d + 1);
    out << "\n";
    for (const FeatureSequence& v : ds.videos)
      for (int t = 0; t < v.length(); ++t) {
        if (!v.mask[std::size_t(t)]) continue;
        out << v.user_id << "," << v.video_id << "," << (t + 1);
        for (int d = 0; d < ds.dims[std::size_t(m)]; ++d)
          out << "," << detail::format_double(v.modalities[std::size_t(m)](d, t));
        out << "\n";
      }
  }
  nlohmann::json manifest;
  manifest["users"] = "users.csv";
  manifest["labels"] = "labels.csv";
  manifest["features"] = {{"A", names[0]}, {"V", names[1]}, {"T", names[2]}};
  manifest["cues"] = ds.cues.names;
  manifest["dims"] = {{"A", ds.dims[0]}, {"V", ds.dims[1]}, {"T", ds.dims[2]}};
  std::ofstream out(base / "manifest.json");
  out << manifest.dump(2) << "\n";
}

// Utterance-label multiset per user, as consumed by the partitioning layer.
inline LabelsByUser labels_by_user(const Dataset& ds) {
  LabelsByUser out;
  for (const FeatureSequence& v : ds.videos) {
    std::vector<int>& labels = out[v.user_id];
    for (int t = 0; t < v.length(); ++t)
      if (v.mask[std::size_t(t)]) labels.push_back(v.labels[std::size_t(t)]);
  }
  return out;
}

}  // namespace cogtree
