#pragma once

// Training for the transfer-based submodels: reverse-mode gradients through
// head, multimodal LSTM, attention fusion and the unimodal LSTMs; full-batch
// gradient descent with per-sample dynamic dropout; finite-difference
// gradient checking.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "cogtree/common.hpp"
#include "cogtree/neural.hpp"

namespace cogtree {

namespace detail {

// Visit every tensor of a submodel in one canonical order (pack/unpack,
// updates and serialization all share it).
template <class Params, class Fn>
inline void for_each_tensor(Params& p, Fn&& fn) {
  auto lstm = [&](auto& l) {
    fn(l.Uf);
    fn(l.Ue);
    fn(l.Uo);
    fn(l.Us);
    fn(l.Wf);
    fn(l.We);
    fn(l.Wo);
    fn(l.Ws);
    fn(l.bf);
    fn(l.be);
    fn(l.bo);
    fn(l.bs);
  };
  lstm(p.unimodal[0]);
  lstm(p.unimodal[1]);
  lstm(p.unimodal[2]);
  fn(p.attention.Wb);
  fn(p.attention.wb);
  fn(p.attention.Wh);
  fn(p.attention.Uh);
  lstm(p.multimodal);
  fn(p.head.Wg);
  fn(p.head.bg);
}

}  // namespace detail

inline Eigen::Index param_count(const SubmodelParams& params) {
  Eigen::Index n = 0;
  detail::for_each_tensor(const_cast<SubmodelParams&>(params),
                          [&](const auto& t) { n += t.size(); });
  return n;
}

inline Eigen::VectorXd pack_params(const SubmodelParams& params) {
  Eigen::VectorXd out(param_count(params));
  Eigen::Index at = 0;
  detail::for_each_tensor(const_cast<SubmodelParams&>(params), [&](const auto& t) {
    out.segment(at, t.size()) = Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
    at += t.size();
  });
  return out;
}

inline void unpack_params(const Eigen::VectorXd& flat, SubmodelParams& params) {
  Eigen::Index at = 0;
  detail::for_each_tensor(params, [&](auto& t) {
    Eigen::Map<Eigen::VectorXd>(t.data(), t.size()) = flat.segment(at, t.size());
    at += t.size();
  });
}

// params += scale * grads
inline void axpy_params(SubmodelParams& params, double scale, const SubmodelParams& grads) {
  Eigen::VectorXd p = pack_params(params);
  p += scale * pack_params(grads);
  unpack_params(p, params);
}

namespace detail {

inline void lstm_backward(const LstmParams& params, const LstmCache& cache,
                          const Eigen::MatrixXd& dh_out, LstmParams& grads,
                          Eigen::MatrixXd* dx_out) {
  const Eigen::Index dt = params.bf.size();
  const Eigen::Index g = cache.x.cols();
  Eigen::VectorXd dh_carry = Eigen::VectorXd::Zero(dt);
  Eigen::VectorXd ds_carry = Eigen::VectorXd::Zero(dt);
  if (dx_out) dx_out->setZero(cache.x.rows(), g);
  for (Eigen::Index t = g - 1; t >= 0; --t) {
    const Eigen::VectorXd dh = dh_out.col(t) + dh_carry;
    const Eigen::ArrayXd tanh_s = cache.s.col(t).array().tanh();
    const Eigen::ArrayXd f = cache.f.col(t).array();
    const Eigen::ArrayXd q = cache.q.col(t).array();
    const Eigen::ArrayXd o = cache.o.col(t).array();
    const Eigen::ArrayXd ct = cache.ct.col(t).array();

    const Eigen::ArrayXd d_o = dh.array() * tanh_s;
    const Eigen::ArrayXd ds = dh.array() * o * (1.0 - tanh_s.square()) + ds_carry.array();
    Eigen::ArrayXd s_prev = Eigen::ArrayXd::Zero(dt);
    if (t > 0) s_prev = cache.s.col(t - 1).array();
    const Eigen::ArrayXd d_f = ds * s_prev;
    const Eigen::ArrayXd d_q = ds * ct;
    const Eigen::ArrayXd d_ct = ds * q;
    ds_carry = (ds * f).matrix();

    const Eigen::VectorXd af = (d_f * f * (1.0 - f)).matrix();
    const Eigen::VectorXd aq = (d_q * q * (1.0 - q)).matrix();
    const Eigen::VectorXd ao = (d_o * o * (1.0 - o)).matrix();
    const Eigen::VectorXd ac = (d_ct * (1.0 - ct.square())).matrix();

    const Eigen::VectorXd xt = cache.x.col(t);
    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(dt);
    if (t > 0) h_prev = cache.h.col(t - 1);

    grads.Uf += af * xt.transpose();
    grads.Ue += aq * xt.transpose();
    grads.Uo += ao * xt.transpose();
    grads.Us += ac * xt.transpose();
    grads.Wf += af * h_prev.transpose();
    grads.We += aq * h_prev.transpose();
    grads.Wo += ao * h_prev.transpose();
    grads.Ws += ac * h_prev.transpose();
    grads.bf += af;
    grads.be += aq;
    grads.bo += ao;
    grads.bs += ac;

    if (dx_out)
      dx_out->col(t) = params.Uf.transpose() * af + params.Ue.transpose() * aq +
                       params.Uo.transpose() * ao + params.Us.transpose() * ac;
    dh_carry = params.Wf.transpose() * af + params.We.transpose() * aq +
               params.Wo.transpose() * ao + params.Ws.transpose() * ac;
  }
}

// Backward through the fusion; fills per-modality gradients (the knowledge
// core is an input of the frozen child, so its gradient is discarded).
inline void attention_backward(const AttentionParams& params, const AttentionCache& cache,
                               const std::vector<char>& mask, const Eigen::MatrixXd& dfused,
                               AttentionParams& grads, Eigen::MatrixXd& dha,
                               Eigen::MatrixXd& dhv, Eigen::MatrixXd& dht) {
  const Eigen::Index dt = params.wb.size();
  const Eigen::Index g = dfused.cols();

  const Eigen::MatrixXd dz =
      (dfused.array() * (1.0 - cache.fused.array().square())).matrix();  // pre-tanh of fused
  grads.Wh += dz.rowwise().sum() * cache.context.transpose();
  grads.Uh += dz * cache.concat.transpose();
  const Eigen::VectorXd dcontext = params.Wh.transpose() * dz.rowwise().sum();

  Eigen::MatrixXd dconcat = params.Uh.transpose() * dz;  // 4dt x g
  // context = concat * alpha
  const Eigen::VectorXd dalpha = cache.concat.transpose() * dcontext;
  dconcat += dcontext * cache.alpha.transpose();

  // softmax over unmasked scores
  double dot = 0.0;
  for (Eigen::Index t = 0; t < g; ++t)
    if (mask[std::size_t(t)]) dot += cache.alpha(t) * dalpha(t);
  Eigen::VectorXd dscore = Eigen::VectorXd::Zero(g);
  for (Eigen::Index t = 0; t < g; ++t)
    if (mask[std::size_t(t)]) dscore(t) = cache.alpha(t) * (dalpha(t) - dot);

  grads.wb += cache.b * dscore;
  const Eigen::MatrixXd db = params.wb * dscore.transpose();  // dt x g
  const Eigen::MatrixXd dbpre = (db.array() * (1.0 - cache.b.array().square())).matrix();
  grads.Wb += dbpre * cache.concat.transpose();
  dconcat += params.Wb.transpose() * dbpre;

  dha = dconcat.topRows(dt);
  dhv = dconcat.middleRows(dt, dt);
  dht = dconcat.middleRows(2 * dt, dt);
}

}  // namespace detail

// Sum of per-utterance cross-entropies on unmasked positions plus parameter
// gradients of that sum. Returns the unmasked utterance count.
inline std::size_t submodel_loss_grads(const SubmodelParams& params, const FeatureSequence& sample,
                                       const KnowledgeCore& k, double& loss_sum,
                                       SubmodelParams* grads) {
  SubmodelCache cache;
  const Eigen::MatrixXd hk = submodel_forward(sample, k, params, &cache);
  const Eigen::Index g = hk.cols();

  Eigen::MatrixXd dhk = Eigen::MatrixXd::Zero(hk.rows(), g);
  std::size_t count = 0;
  for (Eigen::Index t = 0; t < g; ++t) {
    if (!sample.mask[std::size_t(t)]) continue;
    const int y = sample.labels[std::size_t(t)];
    if (y != 0 && y != 1)
      raise(Errc::InvalidArgument, "unmasked utterance without a binary label in video '" +
                                       sample.video_id + "'");
    ++count;
    Eigen::Vector2d z = params.head.Wg * hk.col(t) + params.head.bg;
    const double m = z.maxCoeff();
    Eigen::Vector2d e = (z.array() - m).exp();
    const Eigen::Vector2d p = e / e.sum();
    loss_sum += -std::log(p(y));
    if (grads) {
      Eigen::Vector2d dz = p;
      dz(y) -= 1.0;
      grads->head.Wg += dz * hk.col(t).transpose();
      grads->head.bg += dz;
      dhk.col(t) += params.head.Wg.transpose() * dz;
    }
  }
  if (count == 0) raise(Errc::AllMasked, "sample '" + sample.video_id + "' has no labeled utterances");
  if (!grads) return count;

  Eigen::MatrixXd dfused;
  detail::lstm_backward(params.multimodal, cache.multimodal, dhk, grads->multimodal, &dfused);
  Eigen::MatrixXd dha, dhv, dht;
  detail::attention_backward(params.attention, cache.attention, sample.mask, dfused,
                             grads->attention, dha, dhv, dht);
  detail::lstm_backward(params.unimodal[0], cache.unimodal[0], dha, grads->unimodal[0], nullptr);
  detail::lstm_backward(params.unimodal[1], cache.unimodal[1], dhv, grads->unimodal[1], nullptr);
  detail::lstm_backward(params.unimodal[2], cache.unimodal[2], dht, grads->unimodal[2], nullptr);
  return count;
}

// One node-training sample: a padded video, its knowledge core, and the
// dynamic dropout ratio (0 for original users).
struct TrainingSample {
  const FeatureSequence* sequence = nullptr;
  KnowledgeCore knowledge;
  double dropout = 0.0;
};

struct TrainResult {
  SubmodelParams params;
  std::vector<double> loss_curve;  // mean cross-entropy per epoch, before the update
};

// Full-batch gradient descent on the mean masked cross-entropy of the
// auxiliary head. Adopted samples get their input features zeroed
// independently with probability `dropout` each epoch; the knowledge core is
// never dropped.
inline TrainResult train_submodel(const std::vector<TrainingSample>& samples,
                                  const NeuralConfig& cfg) {
  cfg.validate();
  if (samples.empty()) raise(Errc::EmptyInput, "training requires at least one sample");
  std::array<int, 3> dims{};
  for (int m = 0; m < 3; ++m)
    dims[std::size_t(m)] = int(samples.front().sequence->modalities[std::size_t(m)].rows());

  TrainResult result;
  result.params =
      SubmodelParams::random(dims, cfg.embed_dim, cfg.init_scale, derive_seed(cfg.seed, 1));
  std::mt19937_64 dropout_rng(derive_seed(cfg.seed, 2));
  std::uniform_real_distribution<double> uni01(0.0, 1.0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SubmodelParams grads = SubmodelParams::zeros(dims, cfg.embed_dim);
    double loss_sum = 0.0;
    std::size_t total = 0;
    for (const TrainingSample& s : samples) {
      if (s.dropout > 0.0) {
        FeatureSequence dropped = *s.sequence;
        for (auto& mod : dropped.modalities)
          for (Eigen::Index c = 0; c < mod.cols(); ++c)
            for (Eigen::Index r = 0; r < mod.rows(); ++r)
              if (uni01(dropout_rng) < s.dropout) mod(r, c) = 0.0;
        total += submodel_loss_grads(result.params, dropped, s.knowledge, loss_sum, &grads);
      } else {
        total += submodel_loss_grads(result.params, *s.sequence, s.knowledge, loss_sum, &grads);
      }
    }
    result.loss_curve.push_back(loss_sum / double(total));
    axpy_params(result.params, -cfg.learning_rate / double(total), grads);
  }
  return result;
}

// Max relative error between analytic gradients and central finite
// differences of the mean masked cross-entropy, over every parameter.
// The error is scaled by max(1, |g_a|, |g_n|).
inline double gradient_check(const SubmodelParams& params, const FeatureSequence& sample,
                             const KnowledgeCore& k, double step = 1e-5) {
  std::array<int, 3> dims = params.input_dims;
  SubmodelParams grads = SubmodelParams::zeros(dims, params.embed_dim);
  double loss = 0.0;
  const std::size_t count = submodel_loss_grads(params, sample, k, loss, &grads);
  Eigen::VectorXd analytic = pack_params(grads) / double(count);

  Eigen::VectorXd flat = pack_params(params);
  SubmodelParams work = params;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double keep = flat(i);
    double lp = 0.0, lm = 0.0;
    flat(i) = keep + step;
    unpack_params(flat, work);
    submodel_loss_grads(work, sample, k, lp, nullptr);
    flat(i) = keep - step;
    unpack_params(flat, work);
    submodel_loss_grads(work, sample, k, lm, nullptr);
    flat(i) = keep;
    const double numeric = (lp - lm) / (2.0 * step) / double(count);
    const double denom = std::max({1.0, std::abs(analytic(i)), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic(i) - numeric) / denom);
  }
  unpack_params(flat, work);
  return worst;
}

}  // namespace cogtree
