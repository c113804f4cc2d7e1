#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "trajprop/error.hpp"
#include "trajprop/rng.hpp"
#include "trajprop/soft_dtw.hpp"

using namespace trajprop;

namespace {

std::vector<Vec2> series(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec2> s(n);
  for (auto& v : s) v = {u(rng), u(rng)};
  return s;
}

}  // namespace

TEST(SoftDtw, MatchesRecursiveOracle) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto a = series(1 + rng() % 10, rng), b = series(1 + rng() % 10, rng);
    const double g = 0.05 + 0.1 * static_cast<double>(rng() % 20);
    EXPECT_NEAR(soft_dtw(a, b, g), oracle::soft_dtw(a, b, g), 1e-9);
  }
}

TEST(SoftDtw, SmallGammaApproachesDtw) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto a = series(6, rng), b = series(8, rng);
    const double hard = oracle::dtw(a, b);
    const double soft = soft_dtw(a, b, 1e-4);
    EXPECT_LE(soft, hard + 1e-12);
    EXPECT_NEAR(soft, hard, 1e-2);
  }
}

TEST(SoftDtw, SingleStepIsSquaredDistance) {
  const std::vector<Vec2> a{{0, 0}}, b{{3, 4}};
  EXPECT_DOUBLE_EQ(soft_dtw(a, b, 1.0), 25.0);
}

TEST(SoftDtw, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    auto a = series(5, rng);
    const auto b = series(7, rng);
    const auto g = soft_dtw_grad(a, b, 0.5);
    EXPECT_NEAR(g.value, soft_dtw(a, b, 0.5), 1e-12);
    for (std::size_t t = 0; t < a.size(); ++t) {
      for (int c = 0; c < 2; ++c) {
        double& x = c == 0 ? a[t].x : a[t].y;
        const double keep = x;
        x = keep + 1e-6;
        const double up = soft_dtw(a, b, 0.5);
        x = keep - 1e-6;
        const double down = soft_dtw(a, b, 0.5);
        x = keep;
        const double num = (up - down) / 2e-6;
        EXPECT_NEAR(c == 0 ? g.grad_a[t].x : g.grad_a[t].y, num, 1e-6);
      }
    }
  }
}

TEST(SoftDtw, DivergenceIsZeroOnSelfAndNonNegative) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto a = series(6, rng), b = series(6, rng);
    EXPECT_NEAR(soft_dtw_divergence(a, a, 1.0), 0.0, 1e-12);
    EXPECT_GE(soft_dtw_divergence(a, b, 1.0), 0.0);
  }
}

TEST(SoftDtw, RejectsBadInput) {
  const std::vector<Vec2> a{{0, 0}}, empty;
  EXPECT_THROW(soft_dtw(a, a, 0.0), Error);
  EXPECT_THROW(soft_dtw(a, empty, 1.0), Error);
}
