#include "trajprop/nn/tape.hpp"

#include <cmath>

#include "trajprop/error.hpp"

namespace trajprop::nn {

const Matrix& Var::value() const { return tape->value(id); }

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::param(Param& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{this, it->second};
  Var v = push(p.value, nullptr);
  nodes_.back().param = &p;
  param_nodes_.emplace(&p, v.id);
  return v;
}

Var Tape::push(Matrix value, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

void Tape::backward(Var loss) {
  require(loss.tape == this, "backward: variable belongs to another tape");
  require(value(loss).size() == 1, "backward: loss must be a scalar");
  for (auto& n : nodes_) n.grad.setZero(n.value.rows(), n.value.cols());
  grad(loss.id)(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward) n.backward(*this, i);
  }
  for (auto& n : nodes_) {
    if (n.param == nullptr) continue;
    if (n.param->grad.rows() != n.value.rows() || n.param->grad.cols() != n.value.cols()) n.param->zero_grad();
    n.param->grad += n.grad;
  }
}

namespace {

void same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    fail("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
  }
  Tape& t = *a.tape;
  const int ia = a.id, ib = b.id;
  return t.push(a.value() * b.value(), [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.grad(ia).noalias() += g * t.value(ib).transpose();
    t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var matmul_const(Var a, const Matrix& m) {
  require(a.cols() == m.rows(), "matmul_const: inner dimensions differ");
  Tape& t = *a.tape;
  const int ia = a.id;
  return t.push(a.value() * m, [ia, m](Tape& t, int self) { t.grad(ia).noalias() += t.grad(self) * m.transpose(); });
}

Var add(Var a, Var b) {
  same_shape(a, b, "add");
  const int ia = a.id, ib = b.id;
  return a.tape->push(a.value() + b.value(), [ia, ib](Tape& t, int self) {
    t.grad(ia) += t.grad(self);
    t.grad(ib) += t.grad(self);
  });
}

Var sub(Var a, Var b) {
  same_shape(a, b, "sub");
  const int ia = a.id, ib = b.id;
  return a.tape->push(a.value() - b.value(), [ia, ib](Tape& t, int self) {
    t.grad(ia) += t.grad(self);
    t.grad(ib) -= t.grad(self);
  });
}

Var mul(Var a, Var b) {
  same_shape(a, b, "mul");
  const int ia = a.id, ib = b.id;
  return a.tape->push(a.value().cwiseProduct(b.value()), [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.grad(ia) += g.cwiseProduct(t.value(ib));
    t.grad(ib) += g.cwiseProduct(t.value(ia));
  });
}

Var add_row(Var a, Var b) {
  if (b.rows() != 1 || b.cols() != a.cols()) fail("add_row: bias must be 1 x " + std::to_string(a.cols()));
  const int ia = a.id, ib = b.id;
  Matrix out = a.value().rowwise() + b.value().row(0);
  return a.tape->push(std::move(out), [ia, ib](Tape& t, int self) {
    t.grad(ia) += t.grad(self);
    t.grad(ib) += t.grad(self).colwise().sum();
  });
}

Var scale(Var a, double s) {
  const int ia = a.id;
  return a.tape->push(a.value() * s, [ia, s](Tape& t, int self) { t.grad(ia) += s * t.grad(self); });
}

Var add_scalar(Var a, double s) {
  const int ia = a.id;
  return a.tape->push(a.value().array() + s, [ia](Tape& t, int self) { t.grad(ia) += t.grad(self); });
}

Var sigmoid(Var a) {
  const int ia = a.id;
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return a.tape->push(std::move(y), [ia](Tape& t, int self) {
    const auto y = t.value(self).array();
    t.grad(ia).array() += t.grad(self).array() * y * (1.0 - y);
  });
}

Var tanh(Var a) {
  const int ia = a.id;
  return a.tape->push(a.value().array().tanh().matrix(), [ia](Tape& t, int self) {
    const auto y = t.value(self).array();
    t.grad(ia).array() += t.grad(self).array() * (1.0 - y * y);
  });
}

Var exp(Var a) {
  const int ia = a.id;
  return a.tape->push(a.value().array().exp().matrix(), [ia](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self).array() * t.value(self).array();
  });
}

Var square(Var a) {
  const int ia = a.id;
  return a.tape->push(a.value().array().square().matrix(), [ia](Tape& t, int self) {
    t.grad(ia).array() += 2.0 * t.grad(self).array() * t.value(ia).array();
  });
}

Var prelu(Var a, Var slope) {
  require(slope.rows() == 1 && slope.cols() == 1, "prelu: slope must be 1x1");
  const int ia = a.id, is = slope.id;
  const double s = slope.value()(0, 0);
  Matrix y = a.value().unaryExpr([s](double v) { return v > 0.0 ? v : s * v; });
  return a.tape->push(std::move(y), [ia, is](Tape& t, int self) {
    const double s = t.value(is)(0, 0);
    const Matrix& x = t.value(ia);
    const Matrix& g = t.grad(self);
    double gs = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double v = x(r, c);
        if (v > 0.0) {
          t.grad(ia)(r, c) += g(r, c);
        } else {
          t.grad(ia)(r, c) += s * g(r, c);
          gs += v * g(r, c);
        }
      }
    }
    t.grad(is)(0, 0) += gs;
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: nothing to concatenate");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    require(p.rows() == rows, "concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
    ids.push_back(p.id);
    widths.push_back(p.cols());
  }
  return parts.front().tape->push(std::move(out), [ids, widths](Tape& t, int self) {
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      t.grad(ids[i]) += t.grad(self).middleCols(at, widths[i]);
      at += widths[i];
    }
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols: range out of bounds");
  const int ia = a.id;
  return a.tape->push(a.value().middleCols(start, count),
                      [ia, start, count](Tape& t, int self) { t.grad(ia).middleCols(start, count) += t.grad(self); });
}

Var sum(Var a) {
  const int ia = a.id;
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape->push(std::move(out), [ia](Tape& t, int self) { t.grad(ia).array() += t.grad(self)(0, 0); });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  require(n > 0, "mean: empty input");
  return scale(sum(a), 1.0 / n);
}

}  // namespace trajprop::nn
