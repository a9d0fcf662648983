// SPDX-License-Identifier: Apache-2.0
#include "gesture/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "gesture/error.hpp"

namespace gesture {

using ad::Matrix;

EncodedRecord encode_record(const DatasetRecord& record, const PcaModel& pca) {
  EncodedRecord out;
  out.id = record.id;
  out.fps = record.fps;
  out.words = record.words;
  out.poses.reserve(record.frames.size());
  for (const RawPose& raw : record.frames) out.poses.push_back(encode_pose(pca, normalize_pose(raw)));
  return out;
}

std::vector<std::string> surfaces(const std::vector<TimedWord>& words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const TimedWord& w : words) out.push_back(w.surface);
  return out;
}

void Hyperparams::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
  if (!(alpha >= 0.0) || !(beta >= 0.0)) fail("alpha and beta must be >= 0");
  if (!(lr > 0.0)) fail("learning rate must be > 0");
  if (batch_size < 1) fail("batch size must be >= 1");
  if (!(clip_lo < clip_hi)) fail("clip_lo must be below clip_hi");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (epochs < 0) fail("epochs must be >= 0");
}

LossBreakdown sequence_loss(const Matrix& pred, const Matrix& target, double alpha, double beta,
                            Matrix* grad) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error(Errc::LengthMismatch, "prediction and target shapes differ");
  }
  const Eigen::Index dims = pred.rows();
  const Eigen::Index m = pred.cols();
  if (m < 2) throw Error(Errc::LengthMismatch, "loss needs at least two poses");
  const double md = static_cast<double>(m);
  const double dd = static_cast<double>(dims);

  LossBreakdown out;
  const Matrix diff = pred - target;
  out.mse = diff.squaredNorm() / (md * dd);

  Matrix steps = pred.rightCols(m - 1) - pred.leftCols(m - 1);
  Eigen::RowVectorXd norms = steps.colwise().norm();
  out.continuity = norms.sum() / (md - 1.0);

  const Eigen::VectorXd mean = pred.rowwise().mean();
  const Matrix centered = pred.colwise() - mean;
  out.variance = -(centered.squaredNorm() / md) / dd;

  out.total = out.mse + alpha * out.continuity + beta * out.variance;

  if (grad != nullptr) {
    *grad = (2.0 / (md * dd)) * diff;
    for (Eigen::Index t = 0; t + 1 < m; ++t) {
      if (norms(t) > 0.0) {
        const Eigen::VectorXd u = steps.col(t) * (alpha / ((md - 1.0) * norms(t)));
        grad->col(t + 1) += u;
        grad->col(t) -= u;
      }
    }
    *grad -= (beta * 2.0 / (md * dd)) * centered;
  }
  return out;
}

LossBreakdown compute_loss(std::span<const GestureVector> pred,
                           std::span<const GestureVector> target, const Hyperparams& h) {
  if (pred.size() != target.size()) {
    throw Error(Errc::LengthMismatch, "prediction has " + std::to_string(pred.size()) +
                                          " poses, target " + std::to_string(target.size()));
  }
  if (pred.size() < 2) throw Error(Errc::LengthMismatch, "loss needs at least two poses");
  const Eigen::Index dims = pred.front().size();
  Matrix p(dims, static_cast<Eigen::Index>(pred.size()));
  Matrix t(dims, static_cast<Eigen::Index>(pred.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != dims || target[i].size() != dims) {
      throw Error(Errc::LengthMismatch, "pose dimensions differ");
    }
    p.col(static_cast<Eigen::Index>(i)) = pred[i];
    t.col(static_cast<Eigen::Index>(i)) = target[i];
  }
  return sequence_loss(p, t, h.alpha, h.beta);
}

ad::Var sequence_loss_node(std::span<const ad::Var> poses, std::span<const Matrix> targets,
                           double alpha, double beta, LossBreakdown* mean) {
  if (poses.empty()) throw Error(Errc::EmptyInput, "no poses");
  const Eigen::Index dims = poses.front().rows();
  const Eigen::Index batch = poses.front().cols();
  const auto m = static_cast<Eigen::Index>(poses.size());
  if (static_cast<Eigen::Index>(targets.size()) != batch) {
    throw Error(Errc::LengthMismatch, "one target sequence per sample is required");
  }

  // Per-sample pose_dim x m predictions.
  std::vector<Matrix> preds(static_cast<std::size_t>(batch), Matrix(dims, m));
  for (Eigen::Index t = 0; t < m; ++t) {
    const Matrix& v = poses[static_cast<std::size_t>(t)].value();
    for (Eigen::Index b = 0; b < batch; ++b) preds[static_cast<std::size_t>(b)].col(t) = v.col(b);
  }

  LossBreakdown acc;
  auto grads = std::make_shared<std::vector<Matrix>>(static_cast<std::size_t>(batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto i = static_cast<std::size_t>(b);
    const LossBreakdown l = sequence_loss(preds[i], targets[i], alpha, beta, &(*grads)[i]);
    acc.mse += l.mse;
    acc.continuity += l.continuity;
    acc.variance += l.variance;
    acc.total += l.total;
  }
  const double inv = 1.0 / static_cast<double>(batch);
  acc.mse *= inv;
  acc.continuity *= inv;
  acc.variance *= inv;
  acc.total *= inv;
  if (mean != nullptr) *mean = acc;

  Matrix value(1, 1);
  value(0, 0) = acc.total;
  std::vector<ad::Var> parents(poses.begin(), poses.end());
  return parents.front().tape->record(
      std::move(value), parents, [parents, grads, inv](const Matrix& g, ad::Tape& tape) {
        const double scale = g(0, 0) * inv;
        for (std::size_t t = 0; t < parents.size(); ++t) {
          Matrix* slot = tape.grad_slot(parents[t]);
          if (slot == nullptr) continue;
          for (std::size_t b = 0; b < grads->size(); ++b) {
            slot->col(static_cast<Eigen::Index>(b)) +=
                scale * (*grads)[b].col(static_cast<Eigen::Index>(t));
          }
        }
      });
}

void clip_gradients(ad::ParamStore& store, double lo, double hi) {
  for (ad::ParamId id : store.ids()) {
    auto g = store.grad(id);
    g = g.cwiseMax(lo).cwiseMin(hi);
  }
}

AdamState AdamState::for_store(const ad::ParamStore& store) {
  AdamState s;
  for (ad::ParamId id : store.ids()) {
    const Matrix& v = store.value(id);
    s.first.push_back(Matrix::Zero(v.rows(), v.cols()));
    s.second.push_back(Matrix::Zero(v.rows(), v.cols()));
  }
  return s;
}

void adam_step(ad::ParamStore& store, AdamState& state, double lr) {
  if (state.first.size() != store.size() || state.second.size() != store.size()) {
    throw Error(Errc::ShapeMismatch, "Adam state does not match the parameter store");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (ad::ParamId id : store.ids()) {
    const Matrix& g = store.grad(id);
    Matrix& m1 = state.first[id.index];
    Matrix& m2 = state.second[id.index];
    if (m1.rows() != g.rows() || m1.cols() != g.cols()) {
      throw Error(Errc::ShapeMismatch, "Adam moment shape differs for " + store.name(id));
    }
    m1 = state.beta1 * m1 + (1.0 - state.beta1) * g;
    m2 = state.beta2 * m2 + (1.0 - state.beta2) * g.cwiseProduct(g);
    auto value = store.value(id);
    value.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + state.epsilon);
  }
}

std::vector<TrainingPair> make_training_pairs(std::span<const EncodedRecord> records, int n, int m,
                                              int stride) {
  if (n < 0 || m < 1) throw Error(Errc::InvalidConfig, "window sizes must be positive");
  if (stride <= 0) stride = m;
  const std::size_t window = static_cast<std::size_t>(n + m);
  std::vector<TrainingPair> pairs;
  for (const EncodedRecord& rec : records) {
    if (!(rec.fps > 0.0)) throw Error(Errc::InvalidConfig, "record " + rec.id + " has fps <= 0");
    for (std::size_t start = 0; start + window <= rec.poses.size();
         start += static_cast<std::size_t>(stride)) {
      const double t0 = static_cast<double>(start) / rec.fps;
      const double t1 = static_cast<double>(start + window) / rec.fps;
      TrainingPair pair;
      for (const TimedWord& w : rec.words) {
        if (w.t_start < t1 && w.t_end > t0) pair.words.push_back(w.surface);
      }
      if (pair.words.empty()) continue;
      pair.target_poses.assign(rec.poses.begin() + static_cast<std::ptrdiff_t>(start),
                               rec.poses.begin() + static_cast<std::ptrdiff_t>(start + window));
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

namespace {

struct PreparedPair {
  Matrix words;
  std::vector<GestureVector> seeds;
  Matrix target;  // pose_dim x m
};

std::vector<PreparedPair> prepare(std::span<const TrainingPair> pairs, const Seq2SeqModel& model,
                                  const EmbeddingTable& table) {
  const Seq2SeqConfig& c = model.config;
  if (table.dim() != c.word_dim) {
    throw Error(Errc::DimensionMismatch, "embedding dim " + std::to_string(table.dim()) +
                                             " differs from model word_dim " +
                                             std::to_string(c.word_dim));
  }
  std::vector<PreparedPair> out;
  out.reserve(pairs.size());
  for (const TrainingPair& p : pairs) {
    if (p.words.empty()) throw Error(Errc::EmptyInput, "training pair without words");
    if (static_cast<int>(p.target_poses.size()) != c.n + c.m) {
      throw Error(Errc::LengthMismatch, "training pair needs n+m poses");
    }
    PreparedPair prepared;
    prepared.words = embed_matrix(table, p.words);
    prepared.seeds.assign(p.target_poses.begin(), p.target_poses.begin() + c.n);
    prepared.target.resize(c.pose_dim, c.m);
    for (int t = 0; t < c.m; ++t) prepared.target.col(t) = p.target_poses[static_cast<std::size_t>(c.n + t)];
    out.push_back(std::move(prepared));
  }
  return out;
}

void accumulate(LossBreakdown& acc, const LossBreakdown& l, double weight) {
  acc.mse += weight * l.mse;
  acc.continuity += weight * l.continuity;
  acc.variance += weight * l.variance;
  acc.total += weight * l.total;
}

}  // namespace

std::vector<LossBreakdown> train_model(std::span<const TrainingPair> pairs, const Hyperparams& h,
                                       Seq2SeqModel& model, const EmbeddingTable& table,
                                       const TrainCallbacks& callbacks) {
  h.validate();
  if (pairs.empty()) throw Error(Errc::EmptyDataset, "no training pairs");
  model.config.dropout = h.dropout;
  const std::vector<PreparedPair> data = prepare(pairs, model, table);

  std::mt19937_64 rng(h.seed);
  AdamState adam = AdamState::for_store(model.params);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LossBreakdown> history;
  history.reserve(static_cast<std::size_t>(h.epochs));

  for (int epoch = 1; epoch <= h.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossBreakdown epoch_loss;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(h.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(h.batch_size));
      std::vector<Matrix> words;
      std::vector<std::vector<GestureVector>> seeds;
      std::vector<Matrix> targets;
      for (std::size_t i = start; i < stop; ++i) {
        const PreparedPair& p = data[order[i]];
        words.push_back(p.words);
        seeds.push_back(p.seeds);
        targets.push_back(p.target);
      }
      ad::Tape tape;
      const ForwardGraph graph = build_forward(tape, model, words, seeds, Mode::Train, &rng);
      LossBreakdown batch_loss;
      const ad::Var loss = sequence_loss_node(graph.poses, targets, h.alpha, h.beta, &batch_loss);
      model.params.zero_grad();
      tape.backward(loss, model.params);
      clip_gradients(model.params, h.clip_lo, h.clip_hi);
      adam_step(model.params, adam, h.lr);
      accumulate(epoch_loss, batch_loss, static_cast<double>(stop - start));
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    epoch_loss.mse *= inv;
    epoch_loss.continuity *= inv;
    epoch_loss.variance *= inv;
    epoch_loss.total *= inv;
    history.push_back(epoch_loss);
    model.trained = true;
    if (callbacks.on_epoch) callbacks.on_epoch(epoch, epoch_loss);
    if (callbacks.on_checkpoint && callbacks.checkpoint_every > 0 &&
        epoch % callbacks.checkpoint_every == 0) {
      callbacks.on_checkpoint(epoch, model);
    }
  }
  model.params.zero_grad();
  model.trained = true;
  return history;
}

LossBreakdown evaluate_pairs(std::span<const TrainingPair> pairs, const Hyperparams& h,
                             const Seq2SeqModel& model, const EmbeddingTable& table) {
  if (pairs.empty()) throw Error(Errc::EmptyDataset, "no pairs to evaluate");
  const std::vector<PreparedPair> data = prepare(pairs, model, table);
  LossBreakdown acc;
  const std::size_t batch = static_cast<std::size_t>(std::max(1, h.batch_size));
  for (std::size_t start = 0; start < data.size(); start += batch) {
    const std::size_t stop = std::min(data.size(), start + batch);
    std::vector<Matrix> words;
    std::vector<std::vector<GestureVector>> seeds;
    std::vector<Matrix> targets;
    for (std::size_t i = start; i < stop; ++i) {
      words.push_back(data[i].words);
      seeds.push_back(data[i].seeds);
      targets.push_back(data[i].target);
    }
    ad::Tape tape;
    const ForwardGraph graph = build_forward(tape, model, words, seeds, Mode::Eval, nullptr);
    LossBreakdown l;
    sequence_loss_node(graph.poses, targets, h.alpha, h.beta, &l);
    accumulate(acc, l, static_cast<double>(stop - start));
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  acc.mse *= inv;
  acc.continuity *= inv;
  acc.variance *= inv;
  acc.total *= inv;
  return acc;
}

}  // namespace gesture
