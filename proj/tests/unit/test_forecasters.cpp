#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "trajprop/clustering.hpp"
#include "trajprop/config.hpp"
#include "trajprop/error.hpp"
#include "trajprop/forecasters.hpp"
#include "trajprop/metrics.hpp"
#include "trajprop/ranking.hpp"

using namespace trajprop;

namespace {

DisplacementSeries obs_of(std::vector<Vec2> d) {
  DisplacementSeries s;
  s.t_obs = d.size();
  s.deltas = std::move(d);
  return s;
}

ForecasterConfig small(ForecasterKind kind, int epochs) {
  ForecasterConfig c;
  c.kind = kind;
  c.embed_dim = 8;
  c.lstm_dim = 24;
  c.decode_dim = 16;
  c.epochs = epochs;
  c.batch = 32;
  c.lr = 5e-3;
  c.seed = 4;
  return c;
}

}  // namespace

TEST(Cvm, ConstantVelocityIsExact) {
  const auto o = obs_of(std::vector<Vec2>(8, Vec2{0.3, -0.1}));
  for (double sigma : {0.0, 1.0, 3.0}) {
    for (const auto& v : cvm_predict(o, 12, sigma)) {
      EXPECT_NEAR(v.x, 0.3, 1e-15);
      EXPECT_NEAR(v.y, -0.1, 1e-15);
    }
  }
}

TEST(Cvm, KernelWeightsFavourRecentSteps) {
  std::vector<Vec2> d;
  for (int t = 0; t < 8; ++t) d.push_back({static_cast<double>(t), 0.0});
  const auto o = obs_of(d);
  EXPECT_DOUBLE_EQ(cvm_predict(o, 3, 0.0)[0].x, 7.0);
  // lags 0..7 with sigma 1
  double num = 0, den = 0;
  for (int lag = 0; lag < 8; ++lag) {
    const double w = std::exp(-0.5 * lag * lag);
    num += w * (7 - lag);
    den += w;
  }
  EXPECT_NEAR(cvm_predict(o, 3, 1.0)[2].x, num / den, 1e-12);
  EXPECT_GT(cvm_predict(o, 1, 1.0)[0].x, cvm_predict(o, 1, 3.0)[0].x);
}

TEST(ForecasterConfig, RejectsBadValues) {
  ForecasterConfig c;
  c.lambda = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.lr = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  EXPECT_EQ(ForecasterConfig::from_json(c.to_json()).to_json(), c.to_json());
  EXPECT_THROW(forecaster_kind_from_string("lstm"), Error);
}

TEST(Red, OverfitsTenSamples) {
  auto corpus = synth_corpus(scenario_preset("three-regime"), 10, 2);
  ForecasterConfig cfg;
  cfg.kind = ForecasterKind::kRed;
  cfg.epochs = 2000;
  cfg.lr = 3e-3;
  cfg.batch = 10;
  cfg.seed = 4;
  RedForecaster red(cfg);
  const auto log = red.train(corpus);
  EXPECT_LT(log.loss.back(), log.loss.front());
  double mean = 0;
  for (const auto& s : corpus.samples) {
    const auto pred = red.predict(observed_part(s));
    mean += future_errors(observed_part(s), pred, future_deltas(s)).ade / 10.0;
  }
  EXPECT_LT(mean, 0.05);
}

TEST(Red, JsonRoundTripPredictsIdentically) {
  const auto corpus = synth_corpus(scenario_preset("two-regime"), 20, 3);
  RedForecaster red(small(ForecasterKind::kRed, 2));
  red.train(corpus);
  const auto back = RedForecaster::from_json(red.to_json());
  const auto o = observed_part(corpus.samples[0]);
  EXPECT_EQ(red.predict(o), back.predict(o));
}

TEST(Generative, ShapesDeterminismAndNoiseEffect) {
  const auto corpus = synth_corpus(scenario_preset("two-regime"), 40, 5);
  GenerativeForecaster g(small(ForecasterKind::kCfGan, 1));
  g.train(corpus);
  const auto o = observed_part(corpus.samples[0]);
  const auto a = g.sample(o, 4, 9), b = g.sample(o, 4, 9);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[0].size(), 12u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a[0], a[1]);
}

TEST(Generative, ConditionedRequiresSpace) {
  const auto corpus = synth_corpus(scenario_preset("two-regime"), 20, 5);
  GenerativeForecaster g(small(ForecasterKind::kGanOurs, 1), 2);
  EXPECT_THROW(g.train(corpus, nullptr), Error);
}

TEST(Generative, VaeTrainsAndRoundTrips) {
  const auto corpus = synth_corpus(scenario_preset("two-regime"), 40, 6);
  const auto space = kmeans(corpus_points(corpus), 2, {.seed = 1});
  GenerativeForecaster g(small(ForecasterKind::kVaeOurs, 2), 2);
  const auto log = g.train(corpus, &space);
  ASSERT_EQ(log.aux.size(), log.loss.size());
  for (double kl : log.aux) EXPECT_GE(kl, 0.0);
  const auto back = GenerativeForecaster::from_json(g.to_json());
  const auto o = observed_part(corpus.samples[1]);
  const auto p1 = g.propose(o, space, 2, 3), p2 = back.propose(o, space, 2, 3);
  ASSERT_EQ(p1.size(), 2u);
  for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_EQ(p1.proposals[i].future, p2.proposals[i].future);
  EXPECT_NO_THROW(p1.validate(true));
}

// The class input, not the observation, decides which regime a proposal follows.
TEST(Generative, ConditioningSteersProposals) {
  const auto corpus = synth_corpus(scenario_preset("two-regime"), 200, 7);
  const auto space = kmeans(corpus_points(corpus), 2, {.seed = 2});
  auto cfg = small(ForecasterKind::kGanOurs, 25);
  GenerativeForecaster g(cfg, 2);
  g.train(corpus, &space);
  const auto test = synth_corpus(scenario_preset("two-regime"), 50, 8);
  std::size_t hits = 0, total = 0;
  for (const auto& s : test.samples) {
    const auto o = observed_part(s);
    const auto ps = g.propose(o, space, 1, 11);
    for (const auto& p : ps.proposals) {
      const auto v = proposal_vector(o, p.future, space, Operand::kFuture);
      int best = -1;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < space.k; ++c) {
        const auto cv = centroid_vector(space, c, Operand::kFuture, 12);
        double d = 0;
        for (std::size_t i = 0; i < v.size(); ++i) d += (v[i] - cv[i]) * (v[i] - cv[i]);
        if (d < bd) bd = d, best = c;
      }
      hits += best == p.cluster;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(total), 0.8);
}

TEST(ProposalSet, ValidateCatchesBadProbabilities) {
  ProposalSet ps;
  ps.proposals = {{{{0, 0}}, 0}, {{{0, 0}}, 1}};
  ps.probabilities = {0.5, 0.6};
  EXPECT_THROW(ps.validate(true), Error);
  ps.probabilities = {0.5, 0.5};
  EXPECT_NO_THROW(ps.validate(true));
  ps.proposals[1].cluster = 0;
  EXPECT_THROW(ps.validate(true), Error);
}

TEST(CumsumMatrix, IntegratesInterleavedDeltas) {
  const auto m = cumsum_matrix(3);
  nn::Matrix d(1, 6);
  d << 1, 10, 2, 20, 3, 30;
  const nn::Matrix p = d * m;
  EXPECT_DOUBLE_EQ(p(0, 4), 6);
  EXPECT_DOUBLE_EQ(p(0, 5), 60);
}
