// SPDX-License-Identifier: Apache-2.0
#include "gesture/autodiff.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gesture/error.hpp"

namespace gesture::ad {

namespace {

void check_same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw Error(Errc::ShapeMismatch, "operands recorded on different tapes");
  }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::ShapeMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

ParamId ParamStore::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (lookup_.count(name)) throw Error(Errc::InvalidConfig, "duplicate parameter " + name);
  const auto index = static_cast<std::uint32_t>(entries_.size());
  lookup_.emplace(name, index);
  entries_.push_back({std::move(name), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)});
  return ParamId{index};
}

ParamId ParamStore::id(std::string_view name) const {
  auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) {
    throw Error(Errc::InvalidModel, "unknown parameter " + std::string(name));
  }
  return ParamId{it->second};
}

bool ParamStore::contains(std::string_view name) const {
  return lookup_.count(std::string(name)) != 0;
}

std::size_t ParamStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

std::vector<ParamId> ParamStore::ids() const {
  std::vector<ParamId> out;
  out.reserve(entries_.size());
  for (std::uint32_t i = 0; i < entries_.size(); ++i) out.push_back(ParamId{i});
  return out;
}

void ParamStore::zero_grad() {
  for (Entry& e : entries_) e.grad.setZero();
}

const Matrix& Var::value() const { return tape->value(*this); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  return push(std::move(node));
}

Var Tape::param(const ParamStore& store, ParamId id) {
  Node node;
  node.ref = &store.value(id);
  node.needs_grad = true;
  node.param = id;
  return push(std::move(node));
}

Var Tape::record(Matrix value, std::span<const Var> parents, Backward backward) {
  Node node;
  node.value = std::move(value);
  for (Var p : parents) {
    if (p.tape != this) throw Error(Errc::ShapeMismatch, "parent recorded on a different tape");
    node.needs_grad = node.needs_grad || nodes_[p.index].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  return push(std::move(node));
}

const Matrix& Tape::value(Var v) const {
  const Node& n = nodes_.at(v.index);
  return n.ref ? *n.ref : n.value;
}

const Matrix& Tape::grad(Var v) const { return nodes_.at(v.index).grad; }

Matrix* Tape::grad_slot(Var v) {
  Node& n = nodes_[v.index];
  return n.needs_grad ? &n.grad : nullptr;
}

void Tape::backward(Var loss, ParamStore& store) {
  if (nodes_.empty() || loss.tape != this || loss.index >= nodes_.size()) {
    throw Error(Errc::NoRecordedGraph, "loss is not recorded on this tape");
  }
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw Error(Errc::ShapeMismatch, "loss must be a 1x1 value");
  }
  for (std::size_t i = 0; i <= loss.index; ++i) {
    Node& n = nodes_[i];
    if (n.needs_grad) {
      const Matrix& v = n.ref ? *n.ref : n.value;
      n.grad.setZero(v.rows(), v.cols());
    }
  }
  if (!nodes_[loss.index].needs_grad) return;
  nodes_[loss.index].grad(0, 0) = 1.0;

  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad) continue;
    if (n.backward) {
      n.backward(n.grad, *this);
    } else if (n.param.valid()) {
      store.grad(n.param) += n.grad;
    }
  }
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw Error(Errc::ShapeMismatch, "matmul inner dimensions " + std::to_string(av.cols()) +
                                         " vs " + std::to_string(bv.rows()));
  }
  Matrix out = av * bv;
  const std::array<Var, 2> parents{a, b};
  return a.tape->record(std::move(out), parents, [a, b](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) ga->noalias() += g * t.value(b).transpose();
    if (Matrix* gb = t.grad_slot(b)) gb->noalias() += t.value(a).transpose() * g;
  });
}

Var add(Var a, Var b) {
  check_same_tape(a, b);
  check_same_shape(a.value(), b.value(), "add");
  const std::array<Var, 2> parents{a, b};
  return a.tape->record(a.value() + b.value(), parents, [a, b](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) *ga += g;
    if (Matrix* gb = t.grad_slot(b)) *gb += g;
  });
}

Var sub(Var a, Var b) {
  check_same_tape(a, b);
  check_same_shape(a.value(), b.value(), "sub");
  const std::array<Var, 2> parents{a, b};
  return a.tape->record(a.value() - b.value(), parents, [a, b](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) *ga += g;
    if (Matrix* gb = t.grad_slot(b)) *gb -= g;
  });
}

Var add_bias(Var a, Var bias) {
  check_same_tape(a, bias);
  const Matrix& bv = bias.value();
  if (bv.cols() != 1 || bv.rows() != a.rows()) {
    throw Error(Errc::ShapeMismatch, "bias must be a column matching the operand rows");
  }
  Matrix out = a.value().colwise() + bv.col(0);
  const std::array<Var, 2> parents{a, bias};
  return a.tape->record(std::move(out), parents, [a, bias](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) *ga += g;
    if (Matrix* gb = t.grad_slot(bias)) *gb += g.rowwise().sum();
  });
}

Var mul(Var a, Var b) {
  check_same_tape(a, b);
  check_same_shape(a.value(), b.value(), "mul");
  const std::array<Var, 2> parents{a, b};
  return a.tape->record(a.value().cwiseProduct(b.value()), parents,
                        [a, b](const Matrix& g, Tape& t) {
                          if (Matrix* ga = t.grad_slot(a)) *ga += g.cwiseProduct(t.value(b));
                          if (Matrix* gb = t.grad_slot(b)) *gb += g.cwiseProduct(t.value(a));
                        });
}

Var mul_const(Var a, const Matrix& c) {
  check_same_shape(a.value(), c, "mul_const");
  const std::array<Var, 1> parents{a};
  return a.tape->record(a.value().cwiseProduct(c), parents, [a, c](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) *ga += g.cwiseProduct(c);
  });
}

Var scale(Var a, double c) {
  const std::array<Var, 1> parents{a};
  return a.tape->record(a.value() * c, parents, [a, c](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) *ga += c * g;
  });
}

namespace {

// Index the next recorded node will receive.
Var next_var(Tape* tape) { return Var{tape, static_cast<std::uint32_t>(tape->size())}; }

}  // namespace

Var sigmoid(Var a) {
  Matrix out = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  const Var self = next_var(a.tape);
  const std::array<Var, 1> parents{a};
  return a.tape->record(std::move(out), parents, [a, self](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) {
      const Matrix& y = t.value(self);
      *ga += g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
    }
  });
}

Var tanh(Var a) {
  Matrix out = a.value().array().tanh().matrix();
  const Var self = next_var(a.tape);
  const std::array<Var, 1> parents{a};
  return a.tape->record(std::move(out), parents, [a, self](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) {
      const Matrix& y = t.value(self);
      *ga += (g.array() * (1.0 - y.array().square())).matrix();
    }
  });
}

Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  const std::array<Var, 1> parents{a};
  return a.tape->record(std::move(out), parents, [a](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) {
      *ga += (t.value(a).array() > 0.0).select(g, 0.0).matrix();
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw Error(Errc::EmptyInput, "concat_rows of nothing");
  Tape* tape = parts.front().tape;
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    check_same_tape(parts.front(), p);
    if (p.cols() != cols) throw Error(Errc::ShapeMismatch, "concat_rows column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (Var p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  std::vector<Var> owned(parts.begin(), parts.end());
  return tape->record(std::move(out), parts, [owned](const Matrix& g, Tape& t) {
    Eigen::Index off = 0;
    for (Var p : owned) {
      const Eigen::Index r = t.value(p).rows();
      if (Matrix* gp = t.grad_slot(p)) *gp += g.middleRows(off, r);
      off += r;
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw Error(Errc::ShapeMismatch, "slice_rows out of range");
  }
  const std::array<Var, 1> parents{a};
  return a.tape->record(a.value().middleRows(start, count), parents,
                        [a, start, count](const Matrix& g, Tape& t) {
                          if (Matrix* ga = t.grad_slot(a)) ga->middleRows(start, count) += g;
                        });
}

Var scale_cols(Var a, Var row) {
  check_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw Error(Errc::ShapeMismatch, "scale_cols expects a 1 x cols row");
  }
  Matrix out = a.value() * row.value().row(0).asDiagonal();
  const std::array<Var, 2> parents{a, row};
  return a.tape->record(std::move(out), parents, [a, row](const Matrix& g, Tape& t) {
    if (Matrix* ga = t.grad_slot(a)) *ga += g * t.value(row).row(0).asDiagonal();
    if (Matrix* gr = t.grad_slot(row)) {
      *gr += g.cwiseProduct(t.value(a)).colwise().sum();
    }
  });
}

Var sum(std::span<const Var> parts) {
  if (parts.empty()) throw Error(Errc::EmptyInput, "sum of nothing");
  Matrix out = parts.front().value();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    check_same_tape(parts.front(), parts[i]);
    check_same_shape(out, parts[i].value(), "sum");
    out += parts[i].value();
  }
  std::vector<Var> owned(parts.begin(), parts.end());
  return parts.front().tape->record(std::move(out), parts, [owned](const Matrix& g, Tape& t) {
    for (Var p : owned) {
      if (Matrix* gp = t.grad_slot(p)) *gp += g;
    }
  });
}

Var masked_softmax_cols(Var scores, const Matrix& mask) {
  const Matrix& s = scores.value();
  check_same_shape(s, mask, "masked_softmax_cols");
  Matrix out = Matrix::Zero(s.rows(), s.cols());
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      if (mask(i, j) != 0.0) hi = std::max(hi, s(i, j));
    }
    if (!std::isfinite(hi)) continue;
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      if (mask(i, j) != 0.0) {
        out(i, j) = std::exp(s(i, j) - hi);
        total += out(i, j);
      }
    }
    out.col(j) /= total;
  }
  const Var self = next_var(scores.tape);
  const std::array<Var, 1> parents{scores};
  return scores.tape->record(std::move(out), parents, [scores, self](const Matrix& g, Tape& t) {
    if (Matrix* gs = t.grad_slot(scores)) {
      const Matrix& y = t.value(self);
      const Eigen::RowVectorXd dot = g.cwiseProduct(y).colwise().sum();
      *gs += y.cwiseProduct(g - Matrix::Ones(g.rows(), 1) * dot);
    }
  });
}

Var select_cols(Var a, Var b, const Matrix& mask_row) {
  check_same_tape(a, b);
  check_same_shape(a.value(), b.value(), "select_cols");
  if (mask_row.rows() != 1 || mask_row.cols() != a.cols()) {
    throw Error(Errc::ShapeMismatch, "select_cols mask must be 1 x cols");
  }
  Matrix out = b.value();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (mask_row(0, j) != 0.0) out.col(j) = a.value().col(j);
  }
  const std::array<Var, 2> parents{a, b};
  return a.tape->record(std::move(out), parents, [a, b, mask_row](const Matrix& g, Tape& t) {
    Matrix* ga = t.grad_slot(a);
    Matrix* gb = t.grad_slot(b);
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (mask_row(0, j) != 0.0) {
        if (ga) ga->col(j) += g.col(j);
      } else if (gb) {
        gb->col(j) += g.col(j);
      }
    }
  });
}

Var mse(Var pred, const Matrix& target) {
  check_same_shape(pred.value(), target, "mse");
  const double count = static_cast<double>(target.size());
  Matrix out(1, 1);
  out(0, 0) = (pred.value() - target).squaredNorm() / count;
  const std::array<Var, 1> parents{pred};
  return pred.tape->record(std::move(out), parents,
                           [pred, target, count](const Matrix& g, Tape& t) {
                             if (Matrix* gp = t.grad_slot(pred)) {
                               *gp += (2.0 * g(0, 0) / count) * (t.value(pred) - target);
                             }
                           });
}

}  // namespace gesture::ad
