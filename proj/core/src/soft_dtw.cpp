#include "trajprop/soft_dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajprop/error.hpp"

namespace trajprop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_dist(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double softmin3(double a, double b, double c, double gamma) {
  const double m = std::min({a, b, c});
  if (m == kInf) return kInf;
  const double s = std::exp(-(a - m) / gamma) + std::exp(-(b - m) / gamma) + std::exp(-(c - m) / gamma);
  return m - gamma * std::log(s);
}

void check_args(std::span<const Vec2> a, std::span<const Vec2> b, double gamma) {
  if (!(gamma > 0.0)) fail("soft_dtw: gamma must be > 0");
  require(!a.empty() && !b.empty(), "soft_dtw: empty series");
}

// (n+2) x (m+2) accumulated-cost table, row-major; cell (i,j) for 1-based i,j.
std::vector<double> forward_table(std::span<const Vec2> a, std::span<const Vec2> b, double gamma) {
  const std::size_t n = a.size(), m = b.size(), w = m + 2;
  std::vector<double> r((n + 2) * w, kInf);
  r[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      r[i * w + j] = sq_dist(a[i - 1], b[j - 1]) +
                     softmin3(r[(i - 1) * w + j - 1], r[(i - 1) * w + j], r[i * w + j - 1], gamma);
    }
  }
  return r;
}

}  // namespace

double soft_dtw(std::span<const Vec2> a, std::span<const Vec2> b, double gamma) {
  check_args(a, b, gamma);
  const auto r = forward_table(a, b, gamma);
  return r[a.size() * (b.size() + 2) + b.size()];
}

double soft_dtw(const DisplacementSeries& a, const DisplacementSeries& b, double gamma) {
  return soft_dtw(a.deltas, b.deltas, gamma);
}

SoftDtwGrad soft_dtw_grad(std::span<const Vec2> a, std::span<const Vec2> b, double gamma) {
  check_args(a, b, gamma);
  const std::size_t n = a.size(), m = b.size(), w = m + 2;
  auto r = forward_table(a, b, gamma);
  SoftDtwGrad out;
  out.value = r[n * w + m];

  // Backward recursion for the expected alignment matrix.
  std::vector<double> d((n + 2) * w, 0.0);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) d[i * w + j] = sq_dist(a[i - 1], b[j - 1]);
  for (std::size_t i = 1; i <= n; ++i) r[i * w + m + 1] = -kInf;
  for (std::size_t j = 1; j <= m; ++j) r[(n + 1) * w + j] = -kInf;
  r[(n + 1) * w + m + 1] = r[n * w + m];

  std::vector<double> e((n + 2) * w, 0.0);
  e[(n + 1) * w + m + 1] = 1.0;
  for (std::size_t j = m; j >= 1; --j) {
    for (std::size_t i = n; i >= 1; --i) {
      const double rij = r[i * w + j];
      const double ca = std::exp((r[(i + 1) * w + j] - rij - d[(i + 1) * w + j]) / gamma);
      const double cb = std::exp((r[i * w + j + 1] - rij - d[i * w + j + 1]) / gamma);
      const double cc = std::exp((r[(i + 1) * w + j + 1] - rij - d[(i + 1) * w + j + 1]) / gamma);
      e[i * w + j] = e[(i + 1) * w + j] * ca + e[i * w + j + 1] * cb + e[(i + 1) * w + j + 1] * cc;
    }
  }

  out.grad_a.assign(n, Vec2{});
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double g = 2.0 * e[i * w + j];
      out.grad_a[i - 1].x += g * (a[i - 1].x - b[j - 1].x);
      out.grad_a[i - 1].y += g * (a[i - 1].y - b[j - 1].y);
    }
  }
  return out;
}

double soft_dtw_divergence(std::span<const Vec2> a, std::span<const Vec2> b, double gamma) {
  const double v = soft_dtw(a, b, gamma) - 0.5 * (soft_dtw(a, a, gamma) + soft_dtw(b, b, gamma));
  return std::max(0.0, v);
}

}  // namespace trajprop
