#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trajprop/nn/tape.hpp"

namespace trajprop::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  std::size_t checked = 0;
};

/// Compare reverse-mode gradients of `build` (a scalar-valued graph) with
/// central finite differences for every entry of `params`.
///
/// Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult check_gradients(const std::function<Var(Tape&)>& build, const std::vector<Param*>& params,
                                double h = 1e-5, double floor = 1e-6);

}  // namespace trajprop::nn
