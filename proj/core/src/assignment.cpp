#include <algorithm>
#include <limits>

#include "trajprop/clustering.hpp"
#include "trajprop/error.hpp"

namespace trajprop {

// O(n^3) shortest augmenting path formulation with row/column potentials.
std::vector<int> hungarian(std::span<const double> cost, int n) {
  require(n >= 0 && cost.size() == static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
          "hungarian: cost matrix must be n x n");
  const double inf = std::numeric_limits<double>::infinity();
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> u(un + 1, 0.0), v(un + 1, 0.0);
  std::vector<std::size_t> p(un + 1, 0), way(un + 1, 0);
  for (std::size_t i = 1; i <= un; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(un + 1, inf);
    std::vector<char> used(un + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= un; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * un + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= un; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col(un, -1);
  for (std::size_t j = 1; j <= un; ++j) col[p[j] - 1] = static_cast<int>(j - 1);
  return col;
}

std::vector<int> align_labels(std::span<const int> prev, std::span<const int> next, int k) {
  require(prev.size() == next.size(), "align_labels: length mismatch");
  const auto uk = static_cast<std::size_t>(k);
  // cost[old][new] = -overlap, so the matching maximises agreement.
  std::vector<double> cost(uk * uk, 0.0);
  for (std::size_t i = 0; i < prev.size(); ++i) {
    require(prev[i] >= 0 && prev[i] < k && next[i] >= 0 && next[i] < k, "align_labels: label out of range");
    cost[static_cast<std::size_t>(next[i]) * uk + static_cast<std::size_t>(prev[i])] -= 1.0;
  }
  return hungarian(cost, k);
}

}  // namespace trajprop
