#include "trajprop/nn/layers.hpp"

#include <cmath>

#include "trajprop/error.hpp"

namespace trajprop::nn {

Param& ParamSet::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  Param& p = params_.emplace_back();
  p.name = std::move(name);
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  return p;
}

std::vector<Param*> ParamSet::all() {
  std::vector<Param*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Param*> ParamSet::all() const {
  std::vector<const Param*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = u(rng);
}

}  // namespace

Linear::Linear(ParamSet& ps, const std::string& name, int in_dim, int out_dim, Rng& rng)
    : in_(in_dim), out_(out_dim), name_(name) {
  require(in_dim >= 1 && out_dim >= 1, "linear '" + name + "': dims must be >= 1");
  w_ = &ps.add(name + ".weight", in_dim, out_dim);
  b_ = &ps.add(name + ".bias", 1, out_dim);
  fill_uniform(w_->value, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng);
  ps.add_spec({"linear", name, in_dim, out_dim, "uniform-fan-in"});
}

Var Linear::operator()(Tape& t, Var x) const {
  if (x.cols() != in_) {
    fail("linear '" + name_ + "': expected input width " + std::to_string(in_) + ", got " + std::to_string(x.cols()));
  }
  return add_row(matmul(x, t.param(*w_)), t.param(*b_));
}

PReLU::PReLU(ParamSet& ps, const std::string& name) {
  slope_ = &ps.add(name + ".slope", 1, 1);
  slope_->value(0, 0) = 0.25;
  ps.add_spec({"prelu", name, 1, 1, "slope-0.25"});
}

Var PReLU::operator()(Tape& t, Var x) const { return prelu(x, t.param(*slope_)); }

LstmCell::LstmCell(ParamSet& ps, const std::string& name, int in_dim, int hidden, Rng& rng)
    : in_(in_dim), hidden_(hidden), name_(name) {
  require(in_dim >= 1 && hidden >= 1, "lstm-cell '" + name + "': dims must be >= 1");
  wx_ = &ps.add(name + ".wx", in_dim, 4 * hidden);
  wh_ = &ps.add(name + ".wh", hidden, 4 * hidden);
  b_ = &ps.add(name + ".bias", 1, 4 * hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(wx_->value, bound, rng);
  fill_uniform(wh_->value, bound, rng);
  b_->value.middleCols(hidden, hidden).setOnes();
  ps.add_spec({"lstm-cell", name, in_dim, hidden, "uniform-fan-in,forget-bias-1"});
}

LstmState LstmCell::zero_state(Tape& t, Eigen::Index batch) const {
  return {t.constant(Matrix::Zero(batch, hidden_)), t.constant(Matrix::Zero(batch, hidden_))};
}

LstmState LstmCell::step(Tape& t, Var x, const LstmState& s) const {
  if (x.cols() != in_) {
    fail("lstm-cell '" + name_ + "': expected input width " + std::to_string(in_) + ", got " +
         std::to_string(x.cols()));
  }
  if (s.h.cols() != hidden_ || s.h.rows() != x.rows()) {
    fail("lstm-cell '" + name_ + "': state shape does not match batch x hidden");
  }
  const Var z = add_row(add(matmul(x, t.param(*wx_)), matmul(s.h, t.param(*wh_))), t.param(*b_));
  const Var i = sigmoid(slice_cols(z, 0, hidden_));
  const Var f = sigmoid(slice_cols(z, hidden_, hidden_));
  const Var g = tanh(slice_cols(z, 2 * hidden_, hidden_));
  const Var o = sigmoid(slice_cols(z, 3 * hidden_, hidden_));
  const Var c = add(mul(f, s.c), mul(i, g));
  const Var h = mul(o, tanh(c));
  return {h, c};
}

}  // namespace trajprop::nn
