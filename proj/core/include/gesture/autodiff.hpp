// SPDX-License-Identifier: Apache-2.0
#pragma once

// Minimal reverse-mode differentiation over dense matrices. A Tape records
// every operation of one forward pass; `backward` walks it in reverse and
// accumulates parameter gradients into a ParamStore. Batches are laid out
// as columns.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace gesture::ad {

using Matrix = Eigen::MatrixXd;

struct ParamId {
  std::uint32_t index = UINT32_MAX;
  bool valid() const noexcept { return index != UINT32_MAX; }
  friend bool operator==(ParamId, ParamId) = default;
};

/// Named parameters, each with a gradient accumulator of the same shape.
/// Shapes are fixed by `add`.
class ParamStore {
 public:
  ParamId add(std::string name, Eigen::Index rows, Eigen::Index cols);

  ParamId id(std::string_view name) const;
  bool contains(std::string_view name) const;

  const Matrix& value(ParamId id) const { return entries_.at(id.index).value; }
  Eigen::Ref<Matrix> value(ParamId id) { return entries_.at(id.index).value; }
  const Matrix& grad(ParamId id) const { return entries_.at(id.index).grad; }
  Eigen::Ref<Matrix> grad(ParamId id) { return entries_.at(id.index).grad; }
  const std::string& name(ParamId id) const { return entries_.at(id.index).name; }

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const noexcept;
  std::vector<ParamId> ids() const;

  void zero_grad();

 private:
  struct Entry {
    std::string name;
    Matrix value;
    Matrix grad;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t index = 0;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

class Tape {
 public:
  /// Receives the gradient of the node's output; pushes gradients to parents
  /// through `grad_slot`.
  using Backward = std::function<void(const Matrix& out_grad, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf that reads the stored value without copying. The store must
  /// outlive the tape.
  Var param(const ParamStore& store, ParamId id);
  Var record(Matrix value, std::span<const Var> parents, Backward backward);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;
  /// Gradient accumulator of `v` during backward, or nullptr when `v` does
  /// not depend on any parameter.
  Matrix* grad_slot(Var v);

  /// Reverse pass from a 1x1 node; adds parameter gradients into `store`.
  /// Node gradients are reset first, so calling twice accumulates twice.
  void backward(Var loss, ParamStore& store);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;
    Matrix grad;
    bool needs_grad = false;
    ParamId param;
    Backward backward;
  };
  std::vector<Node> nodes_;

  Var push(Node node);
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// a + bias broadcast over columns; bias is rows x 1.
Var add_bias(Var a, Var bias);
/// Elementwise product.
Var mul(Var a, Var b);
/// Elementwise product with a constant matrix (dropout masks).
Var mul_const(Var a, const Matrix& c);
Var scale(Var a, double c);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
/// Column j of `a` scaled by row(0, j).
Var scale_cols(Var a, Var row);
Var sum(std::span<const Var> parts);
/// Column-wise softmax over rows where mask != 0; masked entries are 0.
Var masked_softmax_cols(Var scores, const Matrix& mask);
/// Per column: a where mask(0, j) != 0, otherwise b.
Var select_cols(Var a, Var b, const Matrix& mask_row);
/// Mean of squared differences against a constant target (1x1 output).
Var mse(Var pred, const Matrix& target);

}  // namespace gesture::ad
