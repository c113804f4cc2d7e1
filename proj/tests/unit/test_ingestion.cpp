#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "trajprop/config.hpp"
#include "trajprop/error.hpp"
#include "trajprop/ingestion.hpp"

using namespace trajprop;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "trajprop_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

Corpus tiny(const std::string& name, std::size_t n, std::uint64_t seed) {
  auto spec = scenario_preset("two-regime");
  spec.name = name;
  return synth_corpus(spec, n, seed);
}

}  // namespace

TEST(TrajNet, ParsesAndGroupsByAgent) {
  const auto p = temp_file("simple.txt", "0 1 0.0 0.0\n0 2 5.0 5.0\n10 1 1.0 0.5\n10 2 5.0 6.0\n20 1 2.0 1.0\n");
  const auto tr = load_trajnet(p);
  ASSERT_EQ(tr.size(), 2u);
  EXPECT_EQ(tr[0].agent_id, "1");
  EXPECT_EQ(tr[0].points.size(), 3u);
  EXPECT_DOUBLE_EQ(tr[0].points[2].x, 2.0);
  EXPECT_EQ(tr[0].source_dataset, "simple");
}

TEST(TrajNet, MalformedLineReportsLineNumber) {
  const auto p = temp_file("bad.txt", "0 1 0.0 0.0\n10 1 oops\n");
  try {
    load_trajnet(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(TrajNet, NonNumericAgentIsRejected) {
  EXPECT_THROW(load_trajnet(temp_file("agent.txt", "0 bob 0 0\n")), Error);
}

TEST(TrajNet, FrameGapSplitsTrack) {
  const auto p = temp_file("gap.txt", "0 1 0 0\n10 1 1 0\n20 1 2 0\n50 1 5 0\n60 1 6 0\n70 3 0 0\n");
  const auto tr = load_trajnet(p);
  // agent 1 splits into 3 + 2 points; agent 3 has one point and is dropped
  ASSERT_EQ(tr.size(), 2u);
  EXPECT_EQ(tr[0].points.size(), 3u);
  EXPECT_EQ(tr[1].points.size(), 2u);
}

TEST(TrajNet, WriteLoadRoundTrip) {
  const auto spec = scenario_preset("three-regime");
  const auto trajs = synth_trajectories(spec, 12, 5);
  const auto p = fs::temp_directory_path() / "trajprop_tests" / "rt.txt";
  write_trajnet(p, trajs);
  const auto back = load_trajnet(p);
  ASSERT_EQ(back.size(), trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    ASSERT_EQ(back[i].points.size(), trajs[i].points.size());
    EXPECT_DOUBLE_EQ(back[i].points.back().y, trajs[i].points.back().y);
  }
}

TEST(Segment, OverlapAndStride) {
  Trajectory t;
  for (int i = 0; i < 50; ++i) t.points.push_back({0.1 * i, 0});
  EXPECT_EQ(segment({t}, 8, 12, false).size(), 2u);
  EXPECT_EQ(segment({t}, 8, 12, true, 1).size(), 30u);
  EXPECT_EQ(segment({t}, 8, 12, true, 5).size(), 6u);
  Trajectory short_t;
  for (int i = 0; i < 20; ++i) short_t.points.push_back({0.1 * i, 0});
  EXPECT_EQ(segment({short_t}, 8, 12, false).size(), 0u);
}

TEST(Splits, TrainTestFractions) {
  SplitPlan plan;
  plan.seed = 3;
  const auto s = make_splits({tiny("a", 100, 1)}, plan);
  EXPECT_EQ(s.train.size(), 70u);
  EXPECT_EQ(s.val.size(), 15u);
  EXPECT_EQ(s.test.size(), 15u);
  plan.test_fraction = 0.2;
  EXPECT_THROW(make_splits({tiny("a", 100, 1)}, plan), Error);
}

TEST(Splits, LeaveOneDatasetOut) {
  SplitPlan plan;
  plan.mode = SplitMode::kLeaveOneDatasetOut;
  plan.held_out = "b";
  const auto s = make_splits({tiny("a", 50, 1), tiny("b", 30, 2), tiny("c", 40, 3)}, plan);
  EXPECT_EQ(s.test.size(), 30u);
  EXPECT_EQ(s.train.size() + s.val.size(), 90u);
  EXPECT_EQ(s.val.size(), 9u);
  plan.held_out = "zara";
  try {
    make_splits({tiny("a", 50, 1)}, plan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(Synthetic, DeterministicAndLabelled) {
  const auto a = tiny("x", 40, 9), b = tiny("x", 40, 9);
  ASSERT_EQ(a.labels.size(), 40u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.samples[i].deltas[3].x, b.samples[i].deltas[3].x);
  for (int l : a.labels) EXPECT_TRUE(l == 0 || l == 1);
  EXPECT_NO_THROW(a.validate());
}
