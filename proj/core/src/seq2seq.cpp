// SPDX-License-Identifier: Apache-2.0
#include "gesture/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gesture/error.hpp"

namespace gesture {

using ad::Matrix;
using ad::ParamId;
using ad::ParamStore;
using ad::Tape;
using ad::Var;

void Seq2SeqConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
  if (word_dim < 1) fail("word_dim must be positive");
  if (hidden < 1) fail("hidden must be positive");
  if (pose_dim < 1) fail("pose_dim must be positive");
  if (n < 1) fail("n (seed poses) must be at least 1");
  if (m < 1) fail("m (generated poses) must be at least 1");
  if (attn_dim < 0 || pre_dim < 0) fail("attention and pre-linear sizes must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
}

namespace {

struct Builder {
  ParamStore& store;
  bool bind;

  ParamId get(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (!bind) return store.add(name, rows, cols);
    const ParamId id = store.id(name);
    const Matrix& v = store.value(id);
    if (v.rows() != rows || v.cols() != cols) {
      throw Error(Errc::InvalidModel, "parameter " + name + " has shape " +
                                          std::to_string(v.rows()) + "x" +
                                          std::to_string(v.cols()) + ", expected " +
                                          std::to_string(rows) + "x" + std::to_string(cols));
    }
    return id;
  }

  GruCellParams gru(const std::string& prefix, int input, int hidden) {
    GruCellParams p;
    p.input = input;
    p.hidden = hidden;
    p.W_z = get(prefix + ".W_z", hidden, input);
    p.W_r = get(prefix + ".W_r", hidden, input);
    p.W_h = get(prefix + ".W_h", hidden, input);
    p.U_z = get(prefix + ".U_z", hidden, hidden);
    p.U_r = get(prefix + ".U_r", hidden, hidden);
    p.U_h = get(prefix + ".U_h", hidden, hidden);
    p.b_z = get(prefix + ".b_z", hidden, 1);
    p.b_r = get(prefix + ".b_r", hidden, 1);
    p.b_h = get(prefix + ".b_h", hidden, 1);
    return p;
  }
};

void layout(Seq2SeqModel& model, bool bind) {
  const Seq2SeqConfig& c = model.config;
  Builder b{model.params, bind};
  const int H = c.hidden;
  for (int layer = 0; layer < 2; ++layer) {
    const int in = layer == 0 ? c.word_dim : 2 * H;
    const std::string prefix = "encoder." + std::to_string(layer);
    model.enc_fwd[layer] = b.gru(prefix + ".fwd", in, H);
    model.enc_bwd[layer] = b.gru(prefix + ".bwd", in, H);
  }
  model.attn_W = b.get("attention.W", c.attention_size(), H);
  model.attn_U = b.get("attention.U", c.attention_size(), 2 * H);
  model.attn_v = b.get("attention.v", 1, c.attention_size());
  model.pre_W = b.get("decoder.pre.W", c.pre_size(), c.pose_dim);
  model.pre_b = b.get("decoder.pre.b", c.pre_size(), 1);
  model.dec[0] = b.gru("decoder.0", c.pre_size() + 2 * H, H);
  model.dec[1] = b.gru("decoder.1", H, H);
  model.post_W = b.get("decoder.post.W", c.pose_dim, H);
  model.post_b = b.get("decoder.post.b", c.pose_dim, 1);
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix mask(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) mask(i, j) = keep(rng) ? scale : 0.0;
  }
  return mask;
}

Var maybe_dropout(Var x, const Seq2SeqConfig& c, Mode mode, std::mt19937_64* rng) {
  if (mode != Mode::Train || c.dropout <= 0.0) return x;
  return ad::mul_const(x, dropout_mask(x.rows(), x.cols(), c.dropout, *rng));
}

Var affine(Tape& tape, const ParamStore& store, ParamId W, ParamId b, Var x) {
  return ad::add_bias(ad::matmul(tape.param(store, W), x), tape.param(store, b));
}

bool all_set(const Matrix& mask_row) { return (mask_row.array() != 0.0).all(); }

struct Encoded {
  std::vector<Var> annotations;  // per position, 2H x B
  Matrix mask;                   // S x B
};

Encoded encode_batch(Tape& tape, const Seq2SeqModel& model, std::span<const Matrix> words,
                     Mode mode, std::mt19937_64* rng) {
  const Seq2SeqConfig& c = model.config;
  const auto batch = static_cast<Eigen::Index>(words.size());
  Eigen::Index max_len = 0;
  for (const Matrix& w : words) {
    if (w.cols() < 1) throw Error(Errc::EmptyInput, "every sample needs at least one word");
    if (w.rows() != c.word_dim) {
      throw Error(Errc::ShapeMismatch, "word vectors have length " + std::to_string(w.rows()) +
                                           ", model expects " + std::to_string(c.word_dim));
    }
    max_len = std::max(max_len, w.cols());
  }

  Encoded enc;
  enc.mask = Matrix::Zero(max_len, batch);
  std::vector<Var> inputs;
  inputs.reserve(static_cast<std::size_t>(max_len));
  for (Eigen::Index t = 0; t < max_len; ++t) {
    Matrix x = Matrix::Zero(c.word_dim, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      if (t < words[b].cols()) {
        x.col(b) = words[b].col(t);
        enc.mask(t, b) = 1.0;
      }
    }
    inputs.push_back(maybe_dropout(tape.constant(std::move(x)), c, mode, rng));
  }

  const ParamStore& store = model.params;
  auto run = [&](const GruCellParams& p, const std::vector<Var>& xs, bool reverse) {
    std::vector<Var> states(xs.size());
    Var h = tape.constant(Matrix::Zero(c.hidden, batch));
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const std::size_t t = reverse ? xs.size() - 1 - k : k;
      const Matrix mask_row = enc.mask.row(static_cast<Eigen::Index>(t));
      Var next = gru_cell(tape, store, p, xs[t], h);
      h = all_set(mask_row) ? next : ad::select_cols(next, h, mask_row);
      states[t] = h;
    }
    return states;
  };

  std::vector<Var> layer_in = inputs;
  for (int layer = 0; layer < 2; ++layer) {
    const std::vector<Var> fwd = run(model.enc_fwd[layer], layer_in, false);
    const std::vector<Var> bwd = run(model.enc_bwd[layer], layer_in, true);
    std::vector<Var> out(layer_in.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
      const std::array<Var, 2> parts{fwd[t], bwd[t]};
      out[t] = ad::concat_rows(parts);
    }
    layer_in = std::move(out);
  }
  enc.annotations = std::move(layer_in);
  return enc;
}

struct AttentionGraph {
  Var weights;  // S x B
  Var context;  // 2H x B
};

AttentionGraph attend(Tape& tape, const Seq2SeqModel& model, Var query_state,
                      const std::vector<Var>& annotations, const std::vector<Var>& keys,
                      const Matrix& mask) {
  const ParamStore& store = model.params;
  const Var query = ad::matmul(tape.param(store, model.attn_W), query_state);
  const Var v = tape.param(store, model.attn_v);
  std::vector<Var> scores;
  scores.reserve(keys.size());
  for (const Var& key : keys) scores.push_back(ad::matmul(v, ad::tanh(ad::add(query, key))));
  const Var weights = ad::masked_softmax_cols(ad::concat_rows(scores), mask);
  std::vector<Var> parts;
  parts.reserve(annotations.size());
  for (std::size_t t = 0; t < annotations.size(); ++t) {
    parts.push_back(
        ad::scale_cols(annotations[t], ad::slice_rows(weights, static_cast<Eigen::Index>(t), 1)));
  }
  return {weights, ad::sum(parts)};
}

std::vector<Var> attention_keys(Tape& tape, const Seq2SeqModel& model,
                                const std::vector<Var>& annotations) {
  const Var U = tape.param(model.params, model.attn_U);
  std::vector<Var> keys;
  keys.reserve(annotations.size());
  for (const Var& a : annotations) keys.push_back(ad::matmul(U, a));
  return keys;
}

struct StepGraph {
  Var pose;
  Var h0;
  Var h1;
  Var weights;
};

StepGraph decoder_step(Tape& tape, const Seq2SeqModel& model, Var prev_pose, Var h0, Var h1,
                       const std::vector<Var>& annotations, const std::vector<Var>& keys,
                       const Matrix& mask, Mode mode, std::mt19937_64* rng) {
  const ParamStore& store = model.params;
  const AttentionGraph att = attend(tape, model, h1, annotations, keys, mask);
  const Var pre = affine(tape, store, model.pre_W, model.pre_b, prev_pose);
  const std::array<Var, 2> parts{pre, att.context};
  const Var input = maybe_dropout(ad::concat_rows(parts), model.config, mode, rng);
  const Var n0 = gru_cell(tape, store, model.dec[0], input, h0);
  const Var n1 = gru_cell(tape, store, model.dec[1], n0, h1);
  const Var pose = affine(tape, store, model.post_W, model.post_b, n1);
  return {pose, n0, n1, att.weights};
}

std::vector<Var> to_columns(Tape& tape, std::span<const Eigen::VectorXd> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (const Eigen::VectorXd& v : values) out.push_back(tape.constant(v));
  return out;
}

}  // namespace

Seq2SeqModel init_model(const Seq2SeqConfig& config, std::uint64_t seed) {
  config.validate();
  Seq2SeqModel model;
  model.config = config;
  layout(model, false);

  std::mt19937_64 rng(seed);
  for (ParamId id : model.params.ids()) {
    auto value = model.params.value(id);
    const std::string& name = model.params.name(id);
    const std::string leaf = name.substr(name.rfind('.') + 1);
    if (leaf.front() == 'b') continue;  // biases start at zero
    const double limit = std::sqrt(6.0 / static_cast<double>(value.rows() + value.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < value.cols(); ++j) {
      for (Eigen::Index i = 0; i < value.rows(); ++i) value(i, j) = dist(rng);
    }
  }
  return model;
}

Seq2SeqModel bind_model(const Seq2SeqConfig& config, ad::ParamStore params) {
  config.validate();
  Seq2SeqModel model;
  model.config = config;
  model.params = std::move(params);
  layout(model, true);
  const std::size_t expected = 3 * 2 * 9 + 3 + 4;
  if (model.params.size() != expected) {
    throw Error(Errc::InvalidModel, "parameter store has " + std::to_string(model.params.size()) +
                                        " entries, expected " + std::to_string(expected));
  }
  return model;
}

Var gru_cell(Tape& tape, const ParamStore& store, const GruCellParams& p, Var x, Var h) {
  if (x.rows() != p.input || h.rows() != p.hidden || x.cols() != h.cols()) {
    throw Error(Errc::ShapeMismatch, "GRU expects input " + std::to_string(p.input) +
                                         " and hidden " + std::to_string(p.hidden) + ", got " +
                                         std::to_string(x.rows()) + " and " +
                                         std::to_string(h.rows()));
  }
  auto gate = [&](ParamId W, ParamId U, ParamId b, Var hidden_in) {
    return ad::add_bias(ad::add(ad::matmul(tape.param(store, W), x),
                                ad::matmul(tape.param(store, U), hidden_in)),
                        tape.param(store, b));
  };
  const Var z = ad::sigmoid(gate(p.W_z, p.U_z, p.b_z, h));
  const Var r = ad::sigmoid(gate(p.W_r, p.U_r, p.b_r, h));
  const Var candidate = ad::tanh(gate(p.W_h, p.U_h, p.b_h, ad::mul(r, h)));
  // h' = (1 - z) * h + z * candidate
  return ad::add(h, ad::mul(z, ad::sub(candidate, h)));
}

Eigen::VectorXd gru_cell_forward(const ParamStore& store, const GruCellParams& p,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
  Tape tape;
  const Var out = gru_cell(tape, store, p, tape.constant(x), tape.constant(h));
  return out.value().col(0);
}

std::vector<Eigen::VectorXd> encode_text(const Seq2SeqModel& model,
                                         std::span<const Eigen::VectorXd> embedded_words) {
  if (embedded_words.empty()) throw Error(Errc::EmptyInput, "no words to encode");
  Matrix words(model.config.word_dim, static_cast<Eigen::Index>(embedded_words.size()));
  for (std::size_t i = 0; i < embedded_words.size(); ++i) {
    if (embedded_words[i].size() != model.config.word_dim) {
      throw Error(Errc::ShapeMismatch, "word vector has wrong length");
    }
    words.col(static_cast<Eigen::Index>(i)) = embedded_words[i];
  }
  Tape tape;
  const std::array<Matrix, 1> batch{words};
  const Encoded enc = encode_batch(tape, model, batch, Mode::Eval, nullptr);
  std::vector<Eigen::VectorXd> out;
  out.reserve(enc.annotations.size());
  for (const Var& a : enc.annotations) out.push_back(a.value().col(0));
  return out;
}

AttentionResult attention_weights(const Seq2SeqModel& model, const Eigen::VectorXd& decoder_state,
                                  std::span<const Eigen::VectorXd> annotations) {
  if (annotations.empty()) throw Error(Errc::EmptyInput, "no annotations to attend over");
  const int H = model.config.hidden;
  if (decoder_state.size() != H) throw Error(Errc::ShapeMismatch, "decoder state length");
  for (const auto& a : annotations) {
    if (a.size() != 2 * H) throw Error(Errc::ShapeMismatch, "annotation length");
  }
  Tape tape;
  const std::vector<Var> anns = to_columns(tape, annotations);
  const std::vector<Var> keys = attention_keys(tape, model, anns);
  const Matrix mask = Matrix::Ones(static_cast<Eigen::Index>(anns.size()), 1);
  const AttentionGraph g = attend(tape, model, tape.constant(decoder_state), anns, keys, mask);
  return {g.weights.value().col(0), g.context.value().col(0)};
}

DecoderState zero_decoder_state(const Seq2SeqModel& model) {
  const int H = model.config.hidden;
  return {{Eigen::VectorXd::Zero(H), Eigen::VectorXd::Zero(H)}};
}

DecodeStepResult decode_step(const Seq2SeqModel& model, const GestureVector& prev_pose,
                             const DecoderState& state,
                             std::span<const Eigen::VectorXd> annotations) {
  const Seq2SeqConfig& c = model.config;
  if (annotations.empty()) throw Error(Errc::EmptyInput, "no annotations to attend over");
  if (prev_pose.size() != c.pose_dim || state.hidden[0].size() != c.hidden ||
      state.hidden[1].size() != c.hidden) {
    throw Error(Errc::ShapeMismatch, "decode_step input shapes do not match the model");
  }
  for (const auto& a : annotations) {
    if (a.size() != 2 * c.hidden) throw Error(Errc::ShapeMismatch, "annotation length");
  }
  Tape tape;
  const std::vector<Var> anns = to_columns(tape, annotations);
  const std::vector<Var> keys = attention_keys(tape, model, anns);
  const Matrix mask = Matrix::Ones(static_cast<Eigen::Index>(anns.size()), 1);
  const StepGraph s =
      decoder_step(tape, model, tape.constant(prev_pose), tape.constant(state.hidden[0]),
                   tape.constant(state.hidden[1]), anns, keys, mask, Mode::Eval, nullptr);
  return {s.pose.value().col(0), {{s.h0.value().col(0), s.h1.value().col(0)}},
          s.weights.value().col(0)};
}

ForwardGraph build_forward(Tape& tape, const Seq2SeqModel& model, std::span<const Matrix> words,
                           std::span<const std::vector<GestureVector>> seeds, Mode mode,
                           std::mt19937_64* rng) {
  const Seq2SeqConfig& c = model.config;
  if (words.empty()) throw Error(Errc::EmptyInput, "empty batch");
  if (seeds.size() != words.size()) {
    throw Error(Errc::SeedLengthMismatch, "one seed sequence per sample is required");
  }
  if (mode == Mode::Train && c.dropout > 0.0 && rng == nullptr) {
    throw Error(Errc::InvalidConfig, "train mode with dropout needs an rng");
  }
  const auto batch = static_cast<Eigen::Index>(words.size());
  for (const auto& s : seeds) {
    if (static_cast<int>(s.size()) != c.n) {
      throw Error(Errc::SeedLengthMismatch, "expected " + std::to_string(c.n) +
                                                " seed poses, got " + std::to_string(s.size()));
    }
    for (const auto& p : s) {
      if (p.size() != c.pose_dim) throw Error(Errc::ShapeMismatch, "seed pose length");
    }
  }

  const Encoded enc = encode_batch(tape, model, words, mode, rng);
  const std::vector<Var> keys = attention_keys(tape, model, enc.annotations);

  Var h0 = tape.constant(Matrix::Zero(c.hidden, batch));
  Var h1 = tape.constant(Matrix::Zero(c.hidden, batch));
  ForwardGraph out;
  out.poses.reserve(static_cast<std::size_t>(c.m));
  out.attention.reserve(static_cast<std::size_t>(c.m));

  const int steps = c.n + c.m - 1;
  for (int k = 0; k < steps; ++k) {
    Var prev;
    if (k < c.n) {
      Matrix p(c.pose_dim, batch);
      for (Eigen::Index b = 0; b < batch; ++b) p.col(b) = seeds[b][static_cast<std::size_t>(k)];
      prev = tape.constant(std::move(p));
    } else {
      prev = out.poses.back();
    }
    const StepGraph s =
        decoder_step(tape, model, prev, h0, h1, enc.annotations, keys, enc.mask, mode, rng);
    h0 = s.h0;
    h1 = s.h1;
    if (k >= c.n - 1) {
      out.poses.push_back(s.pose);
      out.attention.push_back(s.weights.value());
    }
  }
  return out;
}

ForwardResult forward(const Seq2SeqModel& model, const Eigen::MatrixXd& words,
                      const std::vector<GestureVector>& seeds, Mode mode, std::mt19937_64* rng) {
  if (words.cols() < 1) throw Error(Errc::EmptyInput, "no words");
  Tape tape;
  const std::array<Matrix, 1> batch_words{words};
  const std::array<std::vector<GestureVector>, 1> batch_seeds{seeds};
  const ForwardGraph g = build_forward(tape, model, batch_words, batch_seeds, mode, rng);
  ForwardResult result;
  result.attention.resize(static_cast<Eigen::Index>(g.poses.size()), words.cols());
  for (std::size_t t = 0; t < g.poses.size(); ++t) {
    result.poses.push_back(g.poses[t].value().col(0));
    result.attention.row(static_cast<Eigen::Index>(t)) = g.attention[t].col(0).transpose();
  }
  return result;
}

}  // namespace gesture
