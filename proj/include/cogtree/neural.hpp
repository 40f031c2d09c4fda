#pragma once

// Transfer-based submodels: three unimodal LSTMs, attention fusion with the
// knowledge core, a multimodal LSTM, and the softmax prediction head.
//
// Sequence layout: every per-video tensor is (features x g) with g the
// corpus-wide padded utterance count. Real utterances form a prefix of the
// columns; the mask marks them. Padding columns are zero-filled and excluded
// from attention and loss, so unmasked outputs never depend on them.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cogtree/common.hpp"

namespace cogtree {

struct NeuralConfig {
  int embed_dim = 64;  // width of every embedded representation
  int epochs = 100;
  double learning_rate = 0.1;
  double init_scale = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (embed_dim < 1) raise(Errc::InvalidArgument, "embed_dim must be >= 1");
    if (epochs < 1) raise(Errc::InvalidArgument, "epochs must be >= 1");
    if (!(learning_rate > 0.0)) raise(Errc::InvalidArgument, "learning_rate must be positive");
    if (!(init_scale > 0.0)) raise(Errc::InvalidArgument, "init_scale must be positive");
  }
};

// Per-video padded features: one (d_m x g) matrix per modality, a validity
// mask and per-utterance binary labels (-1 on padding columns).
struct FeatureSequence {
  std::string video_id;
  std::string user_id;
  std::array<Eigen::MatrixXd, 3> modalities;  // A, V, T
  std::vector<char> mask;
  std::vector<int> labels;

  int length() const { return int(mask.size()); }
  int real_count() const {
    int n = 0;
    for (char m : mask) n += (m != 0);
    return n;
  }
};

struct LstmParams {
  Eigen::MatrixXd Uf, Ue, Uo, Us;  // embed_dim x input_dim
  Eigen::MatrixXd Wf, We, Wo, Ws;  // embed_dim x embed_dim
  Eigen::VectorXd bf, be, bo, bs;  // embed_dim

  static LstmParams zeros(int embed_dim, int input_dim) {
    LstmParams p;
    for (Eigen::MatrixXd* m : {&p.Uf, &p.Ue, &p.Uo, &p.Us})
      *m = Eigen::MatrixXd::Zero(embed_dim, input_dim);
    for (Eigen::MatrixXd* m : {&p.Wf, &p.We, &p.Wo, &p.Ws})
      *m = Eigen::MatrixXd::Zero(embed_dim, embed_dim);
    for (Eigen::VectorXd* v : {&p.bf, &p.be, &p.bo, &p.bs})
      *v = Eigen::VectorXd::Zero(embed_dim);
    return p;
  }
};

// Attention over timesteps of the 4-slot concatenation {H^A||H^V||H^T||K}.
struct AttentionParams {
  Eigen::MatrixXd Wb;  // embed_dim x 4*embed_dim
  Eigen::VectorXd wb;  // embed_dim
  Eigen::MatrixXd Wh;  // embed_dim x 4*embed_dim
  Eigen::MatrixXd Uh;  // embed_dim x 4*embed_dim

  static AttentionParams zeros(int embed_dim) {
    AttentionParams p;
    p.Wb = Eigen::MatrixXd::Zero(embed_dim, 4 * embed_dim);
    p.wb = Eigen::VectorXd::Zero(embed_dim);
    p.Wh = Eigen::MatrixXd::Zero(embed_dim, 4 * embed_dim);
    p.Uh = Eigen::MatrixXd::Zero(embed_dim, 4 * embed_dim);
    return p;
  }
};

struct HeadParams {
  Eigen::MatrixXd Wg;  // 2 x embed_dim
  Eigen::VectorXd bg;  // 2

  static HeadParams zeros(int embed_dim) {
    return HeadParams{Eigen::MatrixXd::Zero(2, embed_dim), Eigen::VectorXd::Zero(2)};
  }
};

struct SubmodelParams {
  std::array<int, 3> input_dims{0, 0, 0};
  int embed_dim = 0;
  std::array<LstmParams, 3> unimodal;
  AttentionParams attention;
  LstmParams multimodal;  // input_dim == embed_dim
  HeadParams head;        // auxiliary classification head

  static SubmodelParams zeros(const std::array<int, 3>& input_dims, int embed_dim) {
    SubmodelParams p;
    p.input_dims = input_dims;
    p.embed_dim = embed_dim;
    for (int m = 0; m < 3; ++m) p.unimodal[m] = LstmParams::zeros(embed_dim, input_dims[m]);
    p.attention = AttentionParams::zeros(embed_dim);
    p.multimodal = LstmParams::zeros(embed_dim, embed_dim);
    p.head = HeadParams::zeros(embed_dim);
    return p;
  }

  static SubmodelParams random(const std::array<int, 3>& input_dims, int embed_dim,
                               double init_scale, std::uint64_t seed) {
    SubmodelParams p = zeros(input_dims, embed_dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-init_scale, init_scale);
    auto fill = [&](Eigen::MatrixXd& m) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = uni(rng);
    };
    auto fillv = [&](Eigen::VectorXd& v) {
      for (Eigen::Index r = 0; r < v.size(); ++r) v(r) = uni(rng);
    };
    for (LstmParams* l : {&p.unimodal[0], &p.unimodal[1], &p.unimodal[2], &p.multimodal}) {
      fill(l->Uf);
      fill(l->Ue);
      fill(l->Uo);
      fill(l->Us);
      fill(l->Wf);
      fill(l->We);
      fill(l->Wo);
      fill(l->Ws);
      fillv(l->bf);
      fillv(l->be);
      fillv(l->bo);
      fillv(l->bs);
    }
    fill(p.attention.Wb);
    fillv(p.attention.wb);
    fill(p.attention.Wh);
    fill(p.attention.Uh);
    fill(p.head.Wg);
    fillv(p.head.bg);
    return p;
  }
};

// Knowledge core: child-path submodel output, all-zero at leaves.
using KnowledgeCore = Eigen::MatrixXd;  // embed_dim x g

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

struct LstmCache {
  Eigen::MatrixXd x;                 // input_dim x g
  Eigen::MatrixXd f, q, o, ct, s, h; // embed_dim x g
};

struct AttentionCache {
  Eigen::MatrixXd concat;   // 4*embed_dim x g
  Eigen::MatrixXd b;        // embed_dim x g
  Eigen::VectorXd scores;   // g (unmasked positions)
  Eigen::VectorXd alpha;    // g, zero on masked positions
  Eigen::VectorXd context;  // 4*embed_dim
  Eigen::MatrixXd fused;    // embed_dim x g
};

struct SubmodelCache {
  std::array<LstmCache, 3> unimodal;
  AttentionCache attention;
  LstmCache multimodal;
};

// One pass of the gated recurrence over all g timesteps.
//   f,q,o = sigmoid(U x_t + W h_{t-1} + b);  s_t = f.s_{t-1} + q.tanh(...);
//   h_t = o.tanh(s_t)
inline Eigen::MatrixXd lstm_forward(const Eigen::MatrixXd& x, const LstmParams& params,
                                    LstmCache* cache = nullptr) {
  if (!x.allFinite()) raise(Errc::NonFiniteInput, "lstm input contains non-finite values");
  const Eigen::Index dt = params.bf.size();
  const Eigen::Index g = x.cols();
  if (params.Uf.cols() != x.rows())
    raise(Errc::DimensionMismatch, "lstm input has " + std::to_string(x.rows()) +
                                       " features, params expect " +
                                       std::to_string(params.Uf.cols()));
  Eigen::MatrixXd f(dt, g), q(dt, g), o(dt, g), ct(dt, g), s(dt, g), h(dt, g);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(dt);
  Eigen::VectorXd s_prev = Eigen::VectorXd::Zero(dt);
  for (Eigen::Index t = 0; t < g; ++t) {
    const Eigen::VectorXd xt = x.col(t);
    f.col(t) = (params.Uf * xt + params.Wf * h_prev + params.bf).unaryExpr(&detail::sigmoid);
    q.col(t) = (params.Ue * xt + params.We * h_prev + params.be).unaryExpr(&detail::sigmoid);
    o.col(t) = (params.Uo * xt + params.Wo * h_prev + params.bo).unaryExpr(&detail::sigmoid);
    ct.col(t) = (params.Us * xt + params.Ws * h_prev + params.bs).array().tanh().matrix();
    s.col(t) = f.col(t).cwiseProduct(s_prev) + q.col(t).cwiseProduct(ct.col(t));
    h.col(t) = o.col(t).cwiseProduct(s.col(t).array().tanh().matrix());
    h_prev = h.col(t);
    s_prev = s.col(t);
  }
  if (cache) {
    cache->x = x;
    cache->f = f;
    cache->q = q;
    cache->o = o;
    cache->ct = ct;
    cache->s = s;
    cache->h = h;
  }
  return h;
}

// Attention-based fusion of the unimodal embeddings and the knowledge core:
// scores over unmasked timesteps, softmax weights, one shared context vector,
// then h_t^F = tanh(Wh.c + Uh.H_t).
inline Eigen::MatrixXd attention_fuse(const Eigen::MatrixXd& ha, const Eigen::MatrixXd& hv,
                                      const Eigen::MatrixXd& ht, const KnowledgeCore& k,
                                      const std::vector<char>& mask,
                                      const AttentionParams& params,
                                      AttentionCache* cache = nullptr) {
  const Eigen::Index dt = ha.rows();
  const Eigen::Index g = ha.cols();
  if (hv.rows() != dt || ht.rows() != dt || k.rows() != dt || hv.cols() != g || ht.cols() != g ||
      k.cols() != g)
    raise(Errc::DimensionMismatch, "fusion inputs disagree on embed_dim x g shape");
  if (Eigen::Index(mask.size()) != g)
    raise(Errc::DimensionMismatch, "mask length " + std::to_string(mask.size()) +
                                       " does not match sequence length " + std::to_string(g));
  bool any = false;
  for (char m : mask) any = any || (m != 0);
  if (!any) raise(Errc::AllMasked, "attention over a fully masked sequence");

  Eigen::MatrixXd concat(4 * dt, g);
  concat.topRows(dt) = ha;
  concat.middleRows(dt, dt) = hv;
  concat.middleRows(2 * dt, dt) = ht;
  concat.bottomRows(dt) = k;

  Eigen::MatrixXd b = (params.Wb * concat).array().tanh().matrix();
  Eigen::VectorXd scores = b.transpose() * params.wb;

  // Masked softmax over timesteps.
  double max_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < g; ++t)
    if (mask[std::size_t(t)]) max_score = std::max(max_score, scores(t));
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(g);
  double norm = 0.0;
  for (Eigen::Index t = 0; t < g; ++t)
    if (mask[std::size_t(t)]) {
      alpha(t) = std::exp(scores(t) - max_score);
      norm += alpha(t);
    }
  alpha /= norm;

  const Eigen::VectorXd context = concat * alpha;
  Eigen::MatrixXd fused(dt, g);
  const Eigen::VectorXd wc = params.Wh * context;
  for (Eigen::Index t = 0; t < g; ++t)
    fused.col(t) = (wc + params.Uh * concat.col(t)).array().tanh().matrix();

  if (cache) {
    cache->concat = concat;
    cache->b = b;
    cache->scores = scores;
    cache->alpha = alpha;
    cache->context = context;
    cache->fused = fused;
  }
  return fused;
}

// Full submodel: three unimodal passes, fusion with the knowledge core, then
// the multimodal pass producing H^K.
inline Eigen::MatrixXd submodel_forward(const FeatureSequence& sample, const KnowledgeCore& k,
                                        const SubmodelParams& params,
                                        SubmodelCache* cache = nullptr) {
  std::array<Eigen::MatrixXd, 3> h;
  for (int m = 0; m < 3; ++m)
    h[m] = lstm_forward(sample.modalities[std::size_t(m)], params.unimodal[std::size_t(m)],
                        cache ? &cache->unimodal[std::size_t(m)] : nullptr);
  const Eigen::MatrixXd fused = attention_fuse(h[0], h[1], h[2], k, sample.mask, params.attention,
                                               cache ? &cache->attention : nullptr);
  return lstm_forward(fused, params.multimodal, cache ? &cache->multimodal : nullptr);
}

struct HeadOutput {
  Eigen::MatrixXd probabilities;  // 2 x g; columns on masked positions are zero
  std::vector<int> labels;        // -1 on masked positions; argmax ties resolve to 1
};

// Softmax prediction per utterance on the root representation H_0^K.
inline HeadOutput predict_head(const Eigen::MatrixXd& hk, const HeadParams& head,
                               const std::vector<char>& mask) {
  if (head.Wg.cols() != hk.rows())
    raise(Errc::DimensionMismatch, "head expects " + std::to_string(head.Wg.cols()) +
                                       " features, got " + std::to_string(hk.rows()));
  const Eigen::Index g = hk.cols();
  if (Eigen::Index(mask.size()) != g)
    raise(Errc::DimensionMismatch, "mask length does not match sequence length");
  HeadOutput out;
  out.probabilities = Eigen::MatrixXd::Zero(2, g);
  out.labels.assign(std::size_t(g), -1);
  for (Eigen::Index t = 0; t < g; ++t) {
    if (!mask[std::size_t(t)]) continue;
    Eigen::Vector2d z = head.Wg * hk.col(t) + head.bg;
    const double m = z.maxCoeff();
    Eigen::Vector2d e = (z.array() - m).exp();
    const Eigen::Vector2d p = e / e.sum();
    out.probabilities.col(t) = p;
    out.labels[std::size_t(t)] = p(1) >= p(0) ? 1 : 0;
  }
  return out;
}

// Modal label over unmasked predictions; an exact tie resolves to positive.
inline int majority_vote(const std::vector<int>& labels, const std::vector<char>& mask) {
  if (labels.size() != mask.size())
    raise(Errc::DimensionMismatch, "labels/mask length mismatch");
  std::size_t ones = 0, total = 0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (!mask[t]) continue;
    ++total;
    ones += (labels[t] == 1);
  }
  if (total == 0) raise(Errc::EmptyInput, "majority vote over no unmasked predictions");
  return 2 * ones >= total ? 1 : 0;
}

}  // namespace cogtree
