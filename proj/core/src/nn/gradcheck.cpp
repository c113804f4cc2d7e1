#include "trajprop/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace trajprop::nn {

GradCheckResult check_gradients(const std::function<Var(Tape&)>& build, const std::vector<Param*>& params, double h,
                                double floor) {
  for (Param* p : params) p->zero_grad();
  {
    Tape t;
    t.backward(build(t));
  }
  auto eval = [&] {
    Tape t;
    return build(t).value()(0, 0);
  };

  GradCheckResult res;
  for (Param* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double orig = p->value(i);
      p->value(i) = orig + h;
      const double up = eval();
      p->value(i) = orig - h;
      const double down = eval();
      p->value(i) = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad(i);
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      ++res.checked;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst_param = p->name;
        res.worst_index = i;
      }
    }
  }
  return res;
}

}  // namespace trajprop::nn
