#pragma once

#include <vector>

#include "trajprop/nn/tape.hpp"

namespace trajprop::nn {

/// Mean of squared differences over every entry.
Var loss_mse(Var pred, Var target);

/// Binary cross-entropy of sigmoid(score) against a constant label in [0,1].
/// Log arguments are clamped at 1e-12.
Var loss_bce(Var score, double label);

/// Least-squares adversarial terms: mean of (s - 1)^2 / 2 and s^2 / 2.
Var loss_ls_real(Var score);
Var loss_ls_fake(Var score);

/// KL(N(mu, exp(logvar)) || N(0, I)), summed over latent dims and averaged
/// over rows.
Var loss_kl_gaussian(Var mu, Var logvar);

/// Softmax cross-entropy, averaged over rows.
Var loss_xent(Var logits, const std::vector<int>& classes);

/// Row-wise minimum over candidates of the per-row MSE, averaged over rows.
/// Gradient reaches only the minimising candidate of each row.
Var loss_k_variety(const std::vector<Var>& candidates, Var target);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace trajprop::nn
