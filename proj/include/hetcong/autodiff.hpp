#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hetcong/types.hpp"

namespace hetcong::ad {

class Tape;

/// Handle to a recorded matrix value. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run recording of dense matrix operations. Nodes are appended in
/// evaluation order, so reverse recording order is a valid backward schedule.
/// Single-threaded; use one tape per thread.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  /// A differentiable input (parameter).
  Var leaf(Matrix value);
  /// An input that never receives a gradient.
  Var constant(Matrix value);

  /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1x1.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  /// Adds into the gradient buffer of `id` if it participates in differentiation.
  template <typename Expr>
  void accumulate(std::size_t id, const Expr& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.grad += g;
  }

  Var record(Matrix value, std::vector<std::size_t> parents, BackwardFn fn);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

using Index = std::vector<std::size_t>;

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// Adds a 1 x cols row vector to every row.
Var add_bias(Var a, Var bias);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var one_minus(Var a);
Var concat_cols(std::span<const Var> parts);
inline Var concat_cols(std::initializer_list<Var> parts) { return concat_cols(std::span<const Var>(parts.begin(), parts.size())); }
Var relu(Var a);
Var sigmoid(Var a);
Var square(Var a);
/// Elementwise square root; the derivative at exactly zero is taken as zero.
Var sqrt(Var a);
/// Mean of all entries, 1x1.
Var mean(Var a);
Var sum(Var a);
/// Column means over rows, 1 x cols. Zero rows gives zeros.
Var row_mean(Var a);
/// Repeats a 1x1 value into a rows x cols matrix.
Var broadcast(Var scalar, Eigen::Index rows, Eigen::Index cols);
/// Rows [start, start + count) of `a`.
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
/// out[i] = a[index[i]].
Var gather_rows(Var a, const Index& index);
/// out[s] = mean of rows i with segment[i] == s; empty segments are zero rows.
Var segment_mean(Var a, const Index& segment, std::size_t n_segments);
/// Multiplies row i of `a` by the scalar s[i] (s is rows x 1).
Var scale_rows(Var a, Var s);

}  // namespace hetcong::ad
