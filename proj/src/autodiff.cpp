#include "hetcong/autodiff.hpp"

#include <cmath>

#include "hetcong/error.hpp"

namespace hetcong::ad {
namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) throw NumericError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

Tape& tape_of(Var a) {
  if (!a.tape()) throw NumericError("operation on an unbound variable");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  if (a.tape() != b.tape()) throw NumericError("operands recorded on different tapes");
  return tape_of(a);
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

Var Tape::leaf(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::vector<std::size_t> parents, BackwardFn fn) {
  bool needs = false;
  for (std::size_t p : parents) needs = needs || nodes_[p].needs_grad;
  nodes_.push_back(Node{std::move(value), Matrix(), needs, needs ? std::move(fn) : nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw NumericError("backward: loss belongs to another tape");
  const Matrix& lv = nodes_[loss.id()].value;
  if (lv.rows() != 1 || lv.cols() != 1) throw NumericError("backward: loss must be scalar, got " + shape(lv));
  for (Node& n : nodes_)
    if (n.needs_grad) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  if (!nodes_[loss.id()].needs_grad) return;
  nodes_[loss.id()].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward) n.backward(*this, i);
  }
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require(a.cols() == b.rows(), "matmul", a.value(), b.value());
  Matrix out = a.value() * b.value();
  const auto ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add", a.value(), b.value());
  const auto ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var add_bias(Var a, Var bias) {
  Tape& t = tape_of(a, bias);
  require(bias.rows() == 1 && bias.cols() == a.cols(), "add_bias", a.value(), bias.value());
  Matrix out = a.value();
  out.rowwise() += bias.value().row(0);
  const auto ia = a.id(), ib = bias.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    if (t.needs_grad(ib)) t.accumulate(ib, t.grad(self).colwise().sum());
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub", a.value(), b.value());
  const auto ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mul", a.value(), b.value());
  const auto ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self).cwiseProduct(t.value(ib)));
    t.accumulate(ib, t.grad(self).cwiseProduct(t.value(ia)));
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  const auto ia = a.id();
  return t.record(a.value() * s, {ia}, [ia, s](Tape& t, std::size_t self) { t.accumulate(ia, t.grad(self) * s); });
}

Var one_minus(Var a) {
  Tape& t = tape_of(a);
  const auto ia = a.id();
  Matrix out = (1.0 - a.value().array()).matrix();
  return t.record(std::move(out), {ia}, [ia](Tape& t, std::size_t self) { t.accumulate(ia, -t.grad(self)); });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw NumericError("concat_cols: no operands");
  Tape& t = tape_of(parts[0]);
  Eigen::Index cols = 0;
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> widths;
  for (const Var& p : parts) {
    tape_of(parts[0], p);
    require(p.rows() == parts[0].rows(), "concat_cols", parts[0].value(), p.value());
    cols += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  Matrix out(parts[0].rows(), cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return t.record(std::move(out), ids, [ids, widths](Tape& t, std::size_t self) {
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.needs_grad(ids[k])) t.accumulate(ids[k], t.grad(self).middleCols(at, widths[k]));
      at += widths[k];
    }
  });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  const auto ia = a.id();
  return t.record(a.value().cwiseMax(0.0), {ia}, [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, (t.value(ia).array() > 0.0).cast<double>().matrix().cwiseProduct(t.grad(self)));
  });
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  const auto ia = a.id();
  Matrix out = a.value().unaryExpr([](double x) {
    // Split by sign so exp never overflows.
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return t.record(std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
    const auto s = t.value(self).array();
    t.accumulate(ia, (s * (1.0 - s) * t.grad(self).array()).matrix());
  });
}

Var square(Var a) {
  Tape& t = tape_of(a);
  const auto ia = a.id();
  return t.record(a.value().array().square().matrix(), {ia}, [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, (2.0 * t.value(ia).array() * t.grad(self).array()).matrix());
  });
}

Var sqrt(Var a) {
  Tape& t = tape_of(a);
  if ((a.value().array() < 0.0).any()) throw NumericError("sqrt: negative operand");
  const auto ia = a.id();
  return t.record(a.value().array().sqrt().matrix(), {ia}, [ia](Tape& t, std::size_t self) {
    const Matrix& r = t.value(self);
    Matrix g = t.grad(self);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = r.data()[i] > 0.0 ? g.data()[i] * 0.5 / r.data()[i] : 0.0;
    t.accumulate(ia, g);
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  const auto ia = a.id();
  Matrix out(1, 1);
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.value().size(); ++i) s += a.value().data()[i];
  out(0, 0) = s;
  return t.record(std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
    const double g = t.grad(self)(0, 0);
    t.accumulate(ia, Matrix::Constant(t.value(ia).rows(), t.value(ia).cols(), g));
  });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw NumericError("mean: empty operand " + shape(a.value()));
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var row_mean(Var a) {
  Tape& t = tape_of(a);
  const auto ia = a.id();
  const Eigen::Index r = a.rows();
  Matrix out = Matrix::Zero(1, a.cols());
  for (Eigen::Index i = 0; i < r; ++i) out += a.value().row(i);
  if (r > 0) out /= static_cast<double>(r);
  return t.record(std::move(out), {ia}, [ia, r](Tape& t, std::size_t self) {
    if (r == 0) return;
    Matrix g(r, t.grad(self).cols());
    g.rowwise() = t.grad(self).row(0) / static_cast<double>(r);
    t.accumulate(ia, g);
  });
}

Var broadcast(Var s, Eigen::Index rows, Eigen::Index cols) {
  Tape& t = tape_of(s);
  if (s.rows() != 1 || s.cols() != 1) throw NumericError("broadcast: expected 1x1, got " + shape(s.value()));
  const auto is = s.id();
  return t.record(Matrix::Constant(rows, cols, s.value()(0, 0)), {is}, [is](Tape& t, std::size_t self) {
    Matrix g(1, 1);
    g(0, 0) = t.grad(self).sum();
    t.accumulate(is, g);
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  Tape& t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.rows())
    throw NumericError("slice_rows: rows [" + std::to_string(start) + ", " + std::to_string(start + count) +
                       ") out of range for " + shape(a.value()));
  const auto ia = a.id();
  return t.record(a.value().middleRows(start, count), {ia}, [ia, start, count](Tape& t, std::size_t self) {
    Matrix acc = Matrix::Zero(t.value(ia).rows(), t.value(ia).cols());
    acc.middleRows(start, count) = t.grad(self);
    t.accumulate(ia, acc);
  });
}

Var gather_rows(Var a, const Index& index) {
  Tape& t = tape_of(a);
  const auto ia = a.id();
  const auto n = static_cast<std::size_t>(a.rows());
  Matrix out(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= n)
      throw NumericError("gather_rows: index " + std::to_string(index[i]) + " out of range for " + shape(a.value()));
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(static_cast<Eigen::Index>(index[i]));
  }
  return t.record(std::move(out), {ia}, [ia, index](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix acc = Matrix::Zero(t.value(ia).rows(), t.value(ia).cols());
    for (std::size_t i = 0; i < index.size(); ++i)
      acc.row(static_cast<Eigen::Index>(index[i])) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(ia, acc);
  });
}

Var segment_mean(Var a, const Index& segment, std::size_t n_segments) {
  Tape& t = tape_of(a);
  if (segment.size() != static_cast<std::size_t>(a.rows()))
    throw NumericError("segment_mean: " + std::to_string(segment.size()) + " segment ids for " + shape(a.value()));
  const auto ia = a.id();
  std::vector<double> inv(n_segments, 0.0);
  for (std::size_t s : segment) {
    if (s >= n_segments)
      throw NumericError("segment_mean: segment id " + std::to_string(s) + " >= " + std::to_string(n_segments));
    inv[s] += 1.0;
  }
  for (double& c : inv) c = c > 0 ? 1.0 / c : 0.0;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n_segments), a.cols());
  for (std::size_t i = 0; i < segment.size(); ++i)
    out.row(static_cast<Eigen::Index>(segment[i])) += a.value().row(static_cast<Eigen::Index>(i));
  for (std::size_t s = 0; s < n_segments; ++s) out.row(static_cast<Eigen::Index>(s)) *= inv[s];
  return t.record(std::move(out), {ia}, [ia, segment, inv](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix acc(static_cast<Eigen::Index>(segment.size()), g.cols());
    for (std::size_t i = 0; i < segment.size(); ++i)
      acc.row(static_cast<Eigen::Index>(i)) = g.row(static_cast<Eigen::Index>(segment[i])) * inv[segment[i]];
    t.accumulate(ia, acc);
  });
}

Var scale_rows(Var a, Var s) {
  Tape& t = tape_of(a, s);
  require(s.cols() == 1 && s.rows() == a.rows(), "scale_rows", a.value(), s.value());
  const auto ia = a.id(), is = s.id();
  Matrix out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) *= s.value()(i, 0);
  return t.record(std::move(out), {ia, is}, [ia, is](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) {
      Matrix ga = g;
      for (Eigen::Index i = 0; i < ga.rows(); ++i) ga.row(i) *= t.value(is)(i, 0);
      t.accumulate(ia, ga);
    }
    if (t.needs_grad(is)) t.accumulate(is, g.cwiseProduct(t.value(ia)).rowwise().sum());
  });
}

}  // namespace hetcong::ad
