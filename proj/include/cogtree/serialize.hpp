#pragma once

// Binary persistence for adaptive trees, including trained submodel weights.
// Little-endian, doubles as raw IEEE-754 bits so round-trips are bit-exact.
// The stream opens with a magic tag and a format version; reads fail loudly
// with the byte offset on truncation or corruption.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cogtree/common.hpp"
#include "cogtree/neural_train.hpp"
#include "cogtree/tree.hpp"

namespace cogtree {

namespace detail {

constexpr char kMagic[4] = {'C', 'G', 'T', 'R'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(char(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(char((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(char((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(std::uint32_t(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u64(bits);
  }
  void str(const std::string& s) {
    u64(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() {
    need(1);
    return std::uint8_t(data_[at_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(data_[at_ + std::size_t(i)])) << (8 * i);
    at_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(data_[at_ + std::size_t(i)])) << (8 * i);
    at_ += 8;
    return v;
  }
  std::int32_t i32() { return std::int32_t(u32()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(data_ + at_, data_ + at_ + n);
    at_ += n;
    return s;
  }
  std::size_t offset() const { return at_; }
  bool exhausted() const { return at_ == size_; }

  [[noreturn]] void fail(const std::string& what) const {
    raise(Errc::CorruptStream, what + " at offset " + std::to_string(at_));
  }

 private:
  void need(std::uint64_t n) {
    if (at_ + n > size_)
      raise(Errc::CorruptStream, "stream truncated at offset " + std::to_string(at_) +
                                     " (need " + std::to_string(n) + " more bytes of " +
                                     std::to_string(size_) + ")");
  }
  const char* data_;
  std::size_t size_;
  std::size_t at_ = 0;
};

inline void write_point(Writer& w, const SurrogatePoint& p) {
  w.str(p.user_id);
  w.u64(p.coords.size());
  for (double c : p.coords) w.f64(c);
}

inline SurrogatePoint read_point(Reader& r) {
  SurrogatePoint p;
  p.user_id = r.str();
  const std::uint64_t n = r.u64();
  p.coords.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) p.coords.push_back(r.f64());
  return p;
}

inline void write_submodel(Writer& w, const SubmodelParams& p) {
  for (int d : p.input_dims) w.i32(d);
  w.i32(p.embed_dim);
  for_each_tensor(const_cast<SubmodelParams&>(p), [&](const auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) w.f64(t.data()[i]);
  });
}

inline SubmodelParams read_submodel(Reader& r) {
  std::array<int, 3> dims{};
  for (int& d : dims) d = r.i32();
  const int embed = r.i32();
  if (embed < 1 || dims[0] < 0 || dims[1] < 0 || dims[2] < 0) r.fail("invalid submodel shape");
  SubmodelParams p = SubmodelParams::zeros(dims, embed);
  for_each_tensor(p, [&](auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = r.f64();
  });
  return p;
}

}  // namespace detail

inline std::vector<char> serialize(const AdaptiveTree& tree) {
  detail::Writer w;
  w.u8(std::uint8_t(detail::kMagic[0]));
  w.u8(std::uint8_t(detail::kMagic[1]));
  w.u8(std::uint8_t(detail::kMagic[2]));
  w.u8(std::uint8_t(detail::kMagic[3]));
  w.u32(detail::kVersion);

  w.i32(tree.space.minkowski_order);
  w.f64(tree.partition.lambda_cut);
  w.i32(tree.partition.cutpoint_candidates);
  w.i32(tree.partition.cluster_min);
  w.i32(tree.partition.cluster_max);
  w.u8(std::uint8_t(tree.partition.mv_mode));
  w.f64(tree.config.theta_p);
  w.f64(tree.config.theta_e);
  w.u64(tree.config.theta_a);
  w.u64(tree.config.theta_b);
  w.f64(tree.config.lambda_dropout);
  w.f64(tree.config.max_dropout);
  w.u8(tree.config.strategy == Strategy::Theoretical ? 0 : 1);

  w.i32(tree.root);
  w.u64(tree.leaves.size());
  for (int leaf : tree.leaves) w.i32(leaf);

  w.u64(tree.nodes.size());
  for (const TreeNode& n : tree.nodes) {
    w.i32(n.id);
    w.i32(n.parent);
    w.i32(n.depth);
    w.u64(n.children.size());
    for (int c : n.children) w.i32(c);
    w.u64(n.subspace.size());
    for (const SurrogatePoint& p : n.subspace) detail::write_point(w, p);
    w.u64(n.adopted.size());
    for (const AdoptedUser& a : n.adopted) {
      detail::write_point(w, a.point);
      w.i32(a.source_node);
      w.f64(a.dropout);
    }
    if (!n.frag_params) {
      w.u8(0);
    } else if (std::holds_alternative<TheoreticalParams>(*n.frag_params)) {
      const auto& tp = std::get<TheoreticalParams>(*n.frag_params);
      w.u8(1);
      w.u64(tp.cut_dimension);
      w.f64(tp.cut_value);
    } else {
      const auto& cp = std::get<ClusterParams>(*n.frag_params);
      w.u8(2);
      w.u64(cp.medoids.size());
      for (const SurrogatePoint& m : cp.medoids) detail::write_point(w, m);
    }
    w.u64(n.termination.size());
    for (TermCriterion t : n.termination) w.u8(std::uint8_t(t));
    w.u8(n.submodel ? 1 : 0);
    if (n.submodel) detail::write_submodel(w, *n.submodel);
  }
  return w.bytes();
}

inline AdaptiveTree deserialize(const char* data, std::size_t size) {
  detail::Reader r(data, size);
  for (char expect : detail::kMagic)
    if (char(r.u8()) != expect) r.fail("bad magic tag");
  const std::uint32_t version = r.u32();
  if (version != detail::kVersion)
    raise(Errc::VersionMismatch, "stream version " + std::to_string(version) +
                                     ", expected " + std::to_string(detail::kVersion));

  AdaptiveTree tree;
  tree.space.minkowski_order = r.i32();
  tree.partition.lambda_cut = r.f64();
  tree.partition.cutpoint_candidates = r.i32();
  tree.partition.cluster_min = r.i32();
  tree.partition.cluster_max = r.i32();
  tree.partition.mv_mode = MvMode(r.u8());
  tree.config.theta_p = r.f64();
  tree.config.theta_e = r.f64();
  tree.config.theta_a = std::size_t(r.u64());
  tree.config.theta_b = std::size_t(r.u64());
  tree.config.lambda_dropout = r.f64();
  tree.config.max_dropout = r.f64();
  tree.config.strategy = r.u8() == 0 ? Strategy::Theoretical : Strategy::Cluster;

  tree.root = r.i32();
  const std::uint64_t leaf_count = r.u64();
  for (std::uint64_t i = 0; i < leaf_count; ++i) tree.leaves.push_back(r.i32());

  const std::uint64_t node_count = r.u64();
  for (std::uint64_t i = 0; i < node_count; ++i) {
    TreeNode n;
    n.id = r.i32();
    n.parent = r.i32();
    n.depth = r.i32();
    const std::uint64_t child_count = r.u64();
    for (std::uint64_t c = 0; c < child_count; ++c) n.children.push_back(r.i32());
    const std::uint64_t point_count = r.u64();
    for (std::uint64_t p = 0; p < point_count; ++p) n.subspace.push_back(detail::read_point(r));
    const std::uint64_t adopted_count = r.u64();
    for (std::uint64_t a = 0; a < adopted_count; ++a) {
      AdoptedUser adopted;
      adopted.point = detail::read_point(r);
      adopted.source_node = r.i32();
      adopted.dropout = r.f64();
      n.adopted.push_back(std::move(adopted));
    }
    const std::uint8_t kind = r.u8();
    if (kind == 1) {
      TheoreticalParams tp;
      tp.cut_dimension = std::size_t(r.u64());
      tp.cut_value = r.f64();
      n.frag_params = tp;
    } else if (kind == 2) {
      ClusterParams cp;
      const std::uint64_t m = r.u64();
      for (std::uint64_t j = 0; j < m; ++j) cp.medoids.push_back(detail::read_point(r));
      n.frag_params = cp;
    } else if (kind != 0) {
      r.fail("unknown fragmentation kind " + std::to_string(int(kind)));
    }
    const std::uint64_t reasons = r.u64();
    for (std::uint64_t t = 0; t < reasons; ++t) {
      const std::uint8_t code = r.u8();
      if (code > 4) r.fail("unknown termination code " + std::to_string(int(code)));
      n.termination.push_back(TermCriterion(code));
    }
    if (r.u8() != 0) n.submodel = detail::read_submodel(r);
    tree.nodes.push_back(std::move(n));
  }
  if (!r.exhausted()) r.fail("trailing bytes");
  return tree;
}

inline AdaptiveTree deserialize(const std::vector<char>& bytes) {
  return deserialize(bytes.data(), bytes.size());
}

inline void save_tree(const AdaptiveTree& tree, const std::string& path) {
  const std::vector<char> bytes = serialize(tree);
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::InvalidArgument, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) raise(Errc::InvalidArgument, "short write to '" + path + "'");
}

inline AdaptiveTree load_tree(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::InvalidArgument, "cannot open '" + path + "' for reading");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

// Structural + bitwise equality, used by round-trip checks.
inline bool trees_identical(const AdaptiveTree& a, const AdaptiveTree& b) {
  const std::vector<char> sa = serialize(a);
  const std::vector<char> sb = serialize(b);
  return sa == sb;
}

}  // namespace cogtree
