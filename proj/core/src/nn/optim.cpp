#include "trajprop/nn/optim.hpp"

#include <cmath>

#include "trajprop/error.hpp"

namespace trajprop::nn {

Adam::Adam(std::vector<Param*> params, AdamOptions opts) : params_(std::move(params)), opts_(opts) {
  for (Param* p : params_) {
    moments_.push_back({Matrix::Zero(p->value.rows(), p->value.cols()), Matrix::Zero(p->value.rows(), p->value.cols())});
  }
}

void Adam::step() {
  for (Param* p : params_) {
    if (!p->grad.allFinite()) fail(ErrorKind::kDivergence, "non-finite gradient in parameter '" + p->name + "'");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    Moments& mo = moments_[i];
    mo.m = opts_.beta1 * mo.m + (1.0 - opts_.beta1) * p.grad;
    mo.v = opts_.beta2 * mo.v + (1.0 - opts_.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= opts_.lr * (mo.m.array() / bc1) / ((mo.v.array() / bc2).sqrt() + opts_.eps);
    p.grad.setZero();
  }
}

}  // namespace trajprop::nn
