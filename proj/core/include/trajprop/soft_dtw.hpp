#pragma once

#include <span>
#include <vector>

#include "trajprop/trajectory.hpp"

namespace trajprop {

/// Soft-DTW discrepancy between two 2D step sequences with squared Euclidean
/// step cost and smoothing `gamma` > 0. Tends to classic DTW as gamma -> 0.
double soft_dtw(std::span<const Vec2> a, std::span<const Vec2> b, double gamma);
double soft_dtw(const DisplacementSeries& a, const DisplacementSeries& b, double gamma);

/// Value plus gradient with respect to `a`.
struct SoftDtwGrad {
  double value = 0.0;
  std::vector<Vec2> grad_a;
};
SoftDtwGrad soft_dtw_grad(std::span<const Vec2> a, std::span<const Vec2> b, double gamma);

/// soft_dtw(a,b) - (soft_dtw(a,a) + soft_dtw(b,b)) / 2, clamped at zero.
double soft_dtw_divergence(std::span<const Vec2> a, std::span<const Vec2> b, double gamma);

}  // namespace trajprop
