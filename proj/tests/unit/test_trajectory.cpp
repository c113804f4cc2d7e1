#include <gtest/gtest.h>

#include <random>

#include "trajprop/rng.hpp"
#include "trajprop/error.hpp"
#include "trajprop/trajectory.hpp"

using namespace trajprop;

namespace {

Trajectory random_walk(std::size_t points, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  Trajectory t;
  t.agent_id = "a";
  Vec2 p{g(rng) * 10, g(rng) * 10};
  for (std::size_t i = 0; i < points; ++i) {
    t.points.push_back(p);
    p = p + Vec2{0.4 + g(rng), g(rng)};
  }
  return t;
}

}  // namespace

TEST(Displacements, RoundTripThroughReconstruct) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto t = random_walk(21, s);
    const auto d = to_displacements(t, 8, 12);
    EXPECT_EQ(d.size(), 20u);
    const auto back = reconstruct(d);
    ASSERT_EQ(back.points.size(), t.points.size());
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      EXPECT_NEAR(back.points[i].x, t.points[i].x, 1e-12);
      EXPECT_NEAR(back.points[i].y, t.points[i].y, 1e-12);
    }
  }
}

TEST(Displacements, LengthMismatchNamesBothLengths) {
  const auto t = random_walk(20, 1);
  try {
    to_displacements(t, 8, 12);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("21"), std::string::npos) << msg;
    EXPECT_NE(msg.find("20"), std::string::npos) << msg;
  }
}

TEST(Displacements, ConstantVelocityHasEqualDeltas) {
  Trajectory t;
  for (int i = 0; i < 21; ++i) t.points.push_back({0.5 * i, -0.25 * i});
  const auto d = to_displacements(t, 8, 12);
  for (const Vec2 v : d.deltas) {
    EXPECT_NEAR(v.x, 0.5, 1e-12);
    EXPECT_NEAR(v.y, -0.25, 1e-12);
  }
}

TEST(Displacements, IntegrateExcludesStart) {
  const std::vector<Vec2> d{{1, 0}, {0, 2}};
  const auto p = integrate(d, {10, 10});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p[0].x, 11);
  EXPECT_DOUBLE_EQ(p[1].y, 12);
}

TEST(Displacements, SplitAndConcatAreInverse) {
  const auto d = to_displacements(random_walk(21, 3), 8, 12);
  const auto [obs, fut] = split(d);
  EXPECT_EQ(obs.size(), 8u);
  EXPECT_EQ(fut.size(), 12u);
  EXPECT_EQ(fut.t_obs, 0u);
  EXPECT_DOUBLE_EQ(fut.origin.x, d.last_observed().x);
  const auto joined = concat(obs, fut);
  ASSERT_EQ(joined.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(joined.deltas[i].x, d.deltas[i].x);
}

TEST(Displacements, SplitWithoutFutureFails) {
  auto d = to_displacements(random_walk(21, 3), 8, 12);
  const auto obs = observed_part(d);
  EXPECT_THROW(split(obs), Error);
}

TEST(Displacements, FlattenUnflatten) {
  const auto d = to_displacements(random_walk(21, 4), 8, 12);
  const auto f = flatten(d);
  EXPECT_EQ(f.values.size(), 40u);
  const auto back = unflatten(f.values);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i].y, d.deltas[i].y);
}

TEST(Standardizer, FitApplyInvert) {
  std::vector<DisplacementSeries> s;
  for (std::uint64_t i = 0; i < 30; ++i) s.push_back(to_displacements(random_walk(21, i), 8, 12));
  const auto st = Standardizer::fit(s);
  EXPECT_FALSE(st.is_identity());
  double mx = 0, n = 0;
  for (const auto& d : s)
    for (const Vec2 v : d.deltas) {
      mx += st.apply(v).x;
      n += 1;
    }
  EXPECT_NEAR(mx / n, 0.0, 1e-12);
  const Vec2 v{0.3, -0.7};
  EXPECT_NEAR(st.invert(st.apply(v)).x, v.x, 1e-12);
  EXPECT_NEAR(st.invert(st.apply(v)).y, v.y, 1e-12);
  EXPECT_TRUE(Standardizer{}.is_identity());
}
