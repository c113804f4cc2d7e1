#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "trajprop/nn/tape.hpp"
#include "trajprop/rng.hpp"
#include "trajprop/trajectory.hpp"

namespace trajprop::detail {

/// Column `step` of a batch of series as a B x 2 matrix.
inline nn::Matrix step_matrix(const std::vector<std::vector<Vec2>>& series, std::size_t step,
                              const Standardizer& st) {
  nn::Matrix m(static_cast<Eigen::Index>(series.size()), 2);
  for (std::size_t b = 0; b < series.size(); ++b) {
    const Vec2 d = st.apply(series[b][step]);
    m(static_cast<Eigen::Index>(b), 0) = d.x;
    m(static_cast<Eigen::Index>(b), 1) = d.y;
  }
  return m;
}

inline nn::Matrix flat_matrix(const std::vector<std::vector<Vec2>>& series, const Standardizer* st) {
  const std::size_t steps = series.empty() ? 0 : series.front().size();
  nn::Matrix m(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(2 * steps));
  for (std::size_t b = 0; b < series.size(); ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const Vec2 d = st ? st->apply(series[b][t]) : series[b][t];
      m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(2 * t)) = d.x;
      m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(2 * t + 1)) = d.y;
    }
  }
  return m;
}

inline nn::Matrix onehot(const std::vector<int>& classes, int k) {
  nn::Matrix m = nn::Matrix::Zero(static_cast<Eigen::Index>(classes.size()), k);
  for (std::size_t b = 0; b < classes.size(); ++b) {
    if (k > 0) m(static_cast<Eigen::Index>(b), classes[b]) = 1.0;
  }
  return m;
}

inline nn::Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  nn::Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = g(rng);
  return m;
}

/// Destandardize then integrate: positions = (x * scale + shift) C.
struct PositionMap {
  nn::Matrix m;
  nn::Matrix offset;
};

inline PositionMap position_map(std::size_t steps, const Standardizer& st, const nn::Matrix& cumsum) {
  const auto n = static_cast<Eigen::Index>(2 * steps);
  Eigen::VectorXd scale(n), shift(n);
  for (Eigen::Index i = 0; i < n; i += 2) {
    scale(i) = st.std_x;
    scale(i + 1) = st.std_y;
    shift(i) = st.mean_x;
    shift(i + 1) = st.mean_y;
  }
  PositionMap pm;
  pm.m = scale.asDiagonal() * cumsum;
  pm.offset = shift.transpose() * cumsum;
  return pm;
}

inline nn::Var to_positions(nn::Tape& t, nn::Var flat, const PositionMap& pm) {
  return nn::add_row(nn::matmul_const(flat, pm.m), t.constant(pm.offset));
}

/// Seeded permutation that does not depend on std::shuffle.
inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng() % i)]);
  return idx;
}

inline std::vector<Vec2> row_to_series(const nn::Matrix& m, Eigen::Index row, const Standardizer& st) {
  std::vector<Vec2> out(static_cast<std::size_t>(m.cols() / 2));
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = st.invert({m(row, static_cast<Eigen::Index>(2 * t)), m(row, static_cast<Eigen::Index>(2 * t + 1))});
  }
  return out;
}

}  // namespace trajprop::detail
