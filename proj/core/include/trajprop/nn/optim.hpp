#pragma once

#include <unordered_map>
#include <vector>

#include "trajprop/nn/tape.hpp"

namespace trajprop::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. step() consumes and zeroes the gradients.
class Adam {
 public:
  explicit Adam(std::vector<Param*> params, AdamOptions opts = {});

  /// Throws a divergence error naming the parameter if any gradient is not
  /// finite; parameters are left untouched in that case.
  void step();
  long steps() const { return t_; }

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };
  std::vector<Param*> params_;
  std::vector<Moments> moments_;
  AdamOptions opts_;
  long t_ = 0;
};

}  // namespace trajprop::nn
