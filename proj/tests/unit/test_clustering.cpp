#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "trajprop/clustering.hpp"
#include "trajprop/config.hpp"
#include "trajprop/error.hpp"
#include "trajprop/rng.hpp"
#include "trajprop/soft_dtw.hpp"

using namespace trajprop;

namespace {

PointSet blobs(const std::vector<std::vector<double>>& centers, std::size_t per, double spread, std::uint64_t seed,
               std::vector<int>* labels) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  PointSet out;
  for (std::size_t i = 0; i < per; ++i) {
    for (std::size_t c = 0; c < centers.size(); ++c) {
      std::vector<double> p = centers[c];
      for (auto& v : p) v += g(rng);
      out.push_back(std::move(p));
      if (labels) labels->push_back(static_cast<int>(c));
    }
  }
  return out;
}

const std::vector<std::vector<double>> kThree{{0, 0, 0, 0}, {6, 6, 0, 0}, {0, 6, 6, 0}};

}  // namespace

// A single seeded run can still start two centers in one blob; the best of a
// handful of runs by inertia must not.
TEST(KMeans, RecoversSeparatedBlobs) {
  std::vector<int> truth;
  const auto pts = blobs(kThree, 40, 0.5, 1, &truth);
  int exact = 0;
  double best_inertia = 1e300, best_ari = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = kmeans(pts, 3, {.seed = seed});
    EXPECT_NO_THROW(s.validate());
    for (std::size_t i = 1; i < s.objective_history.size(); ++i) {
      EXPECT_LE(s.objective_history[i], s.objective_history[i - 1] + 1e-9);
    }
    const double ari = adjusted_rand_index(s.assignments, truth);
    exact += ari > 1.0 - 1e-12;
    if (s.objective_history.back() < best_inertia) best_inertia = s.objective_history.back(), best_ari = ari;
  }
  EXPECT_GE(exact, 17);
  EXPECT_NEAR(best_ari, 1.0, 1e-12);
}

TEST(KMeans, DeterministicUnderSeed) {
  const auto pts = blobs(kThree, 20, 2.0, 2, nullptr);
  const auto a = kmeans(pts, 4, {.seed = 5}), b = kmeans(pts, 4, {.seed = 5});
  EXPECT_EQ(a.assignments, b.assignments);
}

TEST(KMeans, NoEmptyClustersWithDuplicates) {
  PointSet pts{{0}, {0}, {0}, {0}, {10}, {20}};
  const auto s = kmeans(pts, 3, {.seed = 3});
  for (const auto& m : s.members) EXPECT_FALSE(m.empty());
  EXPECT_THROW(kmeans(pts, 7), Error);
}

TEST(Assign, TiesGoToLowestIdAndDimsAreChecked) {
  ClusterSpace s;
  s.k = 2;
  s.centroids = {{1.0}, {-1.0}};
  const std::vector<double> x{0.0};
  EXPECT_EQ(assign(s, x), 0);
  const std::vector<double> bad{0.0, 1.0};
  EXPECT_THROW(assign(s, bad), Error);
}

TEST(Dbi, MatchesDefinition) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pts = blobs(kThree, 15, 1.5, seed, nullptr);
    const auto s = kmeans(pts, 3, {.seed = seed});
    EXPECT_NEAR(dbi(s, pts), oracle::dbi_l2(pts, s.assignments, s.centroids), 1e-12);
  }
}

TEST(Dbi, HandComputedTwoClusters) {
  // clusters {0, 2} and {10, 12}: scatter 1 each, centroid gap 10 -> (1+1)/10
  PointSet pts{{0}, {2}, {10}, {12}};
  ClusterSpace s;
  s.k = 2;
  s.centroids = {{1}, {11}};
  s.assignments = {0, 0, 1, 1};
  s.rebuild_index();
  EXPECT_NEAR(dbi(s, pts), 0.2, 1e-15);
  s.k = 1;
  s.centroids = {{6}};
  s.assignments = {0, 0, 0, 0};
  s.rebuild_index();
  EXPECT_THROW(dbi(s, pts), Error);
}

TEST(SelectK, PicksTrueClusterCount) {
  const auto pts = blobs(kThree, 30, 0.4, 3, nullptr);
  const std::vector<int> grid{2, 3, 4, 5};
  SelectKOptions opts;
  opts.runs = 3;
  const auto r = select_k(pts, grid, opts);
  EXPECT_EQ(r.k_best, 3);
  ASSERT_EQ(r.table.size(), 4u);
  EXPECT_EQ(r.table[1].run_dbi.size(), 3u);
  const std::vector<int> one{4};
  EXPECT_EQ(select_k(pts, one, opts).k_best, 4);
}

TEST(SelectK, ThreeRegimeCorpusSelectsThree) {
  const auto c = synth_corpus(scenario_preset("three-regime"), 300, 8);
  const std::vector<int> grid{2, 3, 4, 5, 6};
  const auto r = select_k(corpus_points(c), grid, {});
  EXPECT_EQ(r.k_best, 3);
}

TEST(TsKMeans, SeparatesRegimes) {
  const auto c = synth_corpus(scenario_preset("two-regime"), 60, 4);
  TsKMeansOptions o;
  o.max_iter = 10;
  o.barycenter_iters = 10;
  const auto s = ts_kmeans(corpus_points(c), 2, o);
  EXPECT_EQ(s.metric, Metric::kSoftDtw);
  EXPECT_NEAR(adjusted_rand_index(s.assignments, c.labels), 1.0, 1e-12);
  EXPECT_GE(dbi(s, corpus_points(c)), 0.0);
}

TEST(TsKMeans, BarycenterNeverWorseThanStart) {
  const auto c = synth_corpus(scenario_preset("three-regime"), 30, 5);
  const auto pts = corpus_points(c);
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto objective = [&](const std::vector<double>& z) {
    double s = 0;
    for (const auto& p : pts) s += soft_dtw(unflatten(z), unflatten(p), 1.0);
    return s;
  };
  const auto start = pts[0];
  const auto bar = soft_dtw_barycenter(pts, idx, start, 1.0, 20, 0.1);
  EXPECT_LE(objective(bar), objective(start));
}

TEST(Ari, MatchesPairCounting) {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> a(50), b(50);
    for (auto& v : a) v = static_cast<int>(rng() % 3);
    for (auto& v : b) v = static_cast<int>(rng() % 4);
    EXPECT_NEAR(adjusted_rand_index(a, b), oracle::ari_pairs(a, b), 1e-12);
  }
  const std::vector<int> x{0, 0, 1, 1}, y{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(x, y), 1.0);
}

TEST(Hungarian, MatchesBruteForce) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<double> cost(static_cast<std::size_t>(n * n));
    for (auto& c : cost) c = static_cast<double>(rng() % 100);
    const auto col = hungarian(cost, n);
    double got = 0;
    for (int r = 0; r < n; ++r) got += cost[static_cast<std::size_t>(r * n + col[static_cast<std::size_t>(r)])];
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    double best = 1e18;
    do {
      double s = 0;
      for (int r = 0; r < n; ++r) s += cost[static_cast<std::size_t>(r * n + p[static_cast<std::size_t>(r)])];
      best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    EXPECT_DOUBLE_EQ(got, best);
  }
}

TEST(AlignLabels, OptimalForSmallK) {
  Rng rng(8);
  for (int k = 2; k <= 8; ++k) {
    for (int t = 0; t < 10; ++t) {
      std::vector<int> prev(30), next(30);
      for (std::size_t i = 0; i < prev.size(); ++i) {
        prev[i] = static_cast<int>(rng() % static_cast<unsigned>(k));
        next[i] = (prev[i] + 2) % k;
        if (rng() % 4 == 0) next[i] = static_cast<int>(rng() % static_cast<unsigned>(k));
      }
      const auto perm = align_labels(prev, next, k);
      std::size_t agree = 0;
      for (std::size_t i = 0; i < prev.size(); ++i) agree += perm[static_cast<std::size_t>(next[i])] == prev[i];
      EXPECT_EQ(agree, oracle::best_permutation_agreement(prev, next, k));
    }
  }
}

TEST(ClusterSpaceJson, RoundTrip) {
  const auto pts = blobs(kThree, 10, 0.5, 9, nullptr);
  auto s = kmeans(pts, 3, {.seed = 1});
  s.id = "space-x";
  const auto back = ClusterSpace::from_json(s.to_json());
  EXPECT_EQ(back.assignments, s.assignments);
  EXPECT_EQ(back.centroids, s.centroids);
  EXPECT_EQ(back.id, "space-x");
  EXPECT_EQ(back.to_json().dump(), s.to_json().dump());
}
