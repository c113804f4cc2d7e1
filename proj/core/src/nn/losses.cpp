#include "trajprop/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajprop/error.hpp"

namespace trajprop::nn {

namespace {

constexpr double kLogFloor = 1e-12;

}  // namespace

Var loss_mse(Var pred, Var target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) fail("loss_mse: shape mismatch");
  return mean(square(sub(pred, target)));
}

Var loss_bce(Var score, double label) {
  require(label >= 0.0 && label <= 1.0, "loss_bce: label must lie in [0, 1]");
  const Matrix& s = score.value();
  const double n = static_cast<double>(s.size());
  require(n > 0, "loss_bce: empty input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-s(i)));
    total -= label * std::log(std::max(p, kLogFloor)) + (1.0 - label) * std::log(std::max(1.0 - p, kLogFloor));
  }
  Matrix out(1, 1);
  out(0, 0) = total / n;
  const int is = score.id;
  return score.tape->push(std::move(out), [is, label, n](Tape& t, int self) {
    const double g = t.grad(self)(0, 0) / n;
    const Matrix& s = t.value(is);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-s(i)));
      double d = 0.0;
      if (p > kLogFloor) d -= label * (1.0 - p);
      if (1.0 - p > kLogFloor) d += (1.0 - label) * p;
      t.grad(is)(i) += g * d;
    }
  });
}

Var loss_ls_real(Var score) { return scale(mean(square(add_scalar(score, -1.0))), 0.5); }

Var loss_ls_fake(Var score) { return scale(mean(square(score)), 0.5); }

Var loss_kl_gaussian(Var mu, Var logvar) {
  if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols()) fail("loss_kl_gaussian: shape mismatch");
  const Matrix& m = mu.value();
  const Matrix& lv = logvar.value();
  const double rows = static_cast<double>(m.rows());
  require(rows > 0, "loss_kl_gaussian: empty input");
  Matrix out(1, 1);
  out(0, 0) = -0.5 * (1.0 + lv.array() - m.array().square() - lv.array().exp()).sum() / rows;
  const int im = mu.id, il = logvar.id;
  return mu.tape->push(std::move(out), [im, il, rows](Tape& t, int self) {
    const double g = t.grad(self)(0, 0) / rows;
    t.grad(im).array() += g * t.value(im).array();
    t.grad(il).array() += g * 0.5 * (t.value(il).array().exp() - 1.0);
  });
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(r).array() - m).exp().matrix();
    out.row(r) = e / e.sum();
  }
  return out;
}

Var loss_xent(Var logits, const std::vector<int>& classes) {
  const Matrix& z = logits.value();
  require(static_cast<std::size_t>(z.rows()) == classes.size(), "loss_xent: one class per row required");
  for (int c : classes) require(c >= 0 && c < z.cols(), "loss_xent: class label out of range");
  Matrix p = softmax_rows(z);
  const double rows = static_cast<double>(z.rows());
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) total -= std::log(std::max(p(r, classes[static_cast<std::size_t>(r)]), kLogFloor));
  Matrix out(1, 1);
  out(0, 0) = total / rows;
  const int il = logits.id;
  return logits.tape->push(std::move(out), [il, p = std::move(p), classes, rows](Tape& t, int self) {
    const double g = t.grad(self)(0, 0) / rows;
    Matrix d = p;
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      const auto c = classes[static_cast<std::size_t>(r)];
      if (p(r, c) > kLogFloor) {
        d(r, c) -= 1.0;
      } else {
        d.row(r).setZero();
      }
    }
    t.grad(il) += g * d;
  });
}

Var loss_k_variety(const std::vector<Var>& candidates, Var target) {
  require(!candidates.empty(), "loss_k_variety: empty candidate set");
  const Matrix& y = target.value();
  for (const Var& c : candidates) {
    if (c.rows() != y.rows() || c.cols() != y.cols()) fail("loss_k_variety: candidate shape differs from target");
  }
  const Eigen::Index rows = y.rows(), cols = y.cols();
  require(rows > 0 && cols > 0, "loss_k_variety: empty target");
  std::vector<int> best(static_cast<std::size_t>(rows), 0);
  double total = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    double bv = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const double v = (candidates[k].value().row(r) - y.row(r)).squaredNorm() / static_cast<double>(cols);
      if (v < bv) {
        bv = v;
        best[static_cast<std::size_t>(r)] = static_cast<int>(k);
      }
    }
    total += bv;
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(rows);
  std::vector<int> ids;
  for (const Var& c : candidates) ids.push_back(c.id);
  const int it = target.id;
  return target.tape->push(std::move(out), [ids, best, it, rows, cols](Tape& t, int self) {
    const double g = t.grad(self)(0, 0) * 2.0 / static_cast<double>(rows * cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const int id = ids[static_cast<std::size_t>(best[static_cast<std::size_t>(r)])];
      const Eigen::RowVectorXd diff = t.value(id).row(r) - t.value(it).row(r);
      t.grad(id).row(r) += g * diff;
      t.grad(it).row(r) -= g * diff;
    }
  });
}

}  // namespace trajprop::nn
