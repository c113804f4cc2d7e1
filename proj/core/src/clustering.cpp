#include "trajprop/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "trajprop/error.hpp"
#include "trajprop/rng.hpp"
#include "trajprop/soft_dtw.hpp"

namespace trajprop {

std::string to_string(Metric m) {
  switch (m) {
    case Metric::kEuclideanFlat:
      return "euclidean-flat";
    case Metric::kSoftDtw:
      return "soft-dtw";
    case Metric::kFeatureL2:
      return "feature-l2";
  }
  return "unknown";
}

Metric metric_from_string(const std::string& s) {
  if (s == "euclidean-flat") return Metric::kEuclideanFlat;
  if (s == "soft-dtw") return Metric::kSoftDtw;
  if (s == "feature-l2") return Metric::kFeatureL2;
  fail(ErrorKind::kConfig, "unknown metric '" + s + "'");
}

void ClusterSpace::rebuild_index() {
  members.assign(static_cast<std::size_t>(k), {});
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int c = assignments[i];
    require(c >= 0 && c < k, "cluster id out of range");
    members[static_cast<std::size_t>(c)].push_back(i);
  }
  weights.assign(static_cast<std::size_t>(k), 0.0);
  const double n = static_cast<double>(assignments.size());
  for (int c = 0; c < k; ++c) {
    weights[static_cast<std::size_t>(c)] =
        n > 0 ? static_cast<double>(members[static_cast<std::size_t>(c)].size()) / n : 0.0;
  }
}

void ClusterSpace::validate() const {
  require(k >= 1, "cluster space: k must be >= 1");
  require(centroids.size() == static_cast<std::size_t>(k), "cluster space: centroid count != k");
  require(members.size() == static_cast<std::size_t>(k), "cluster space: member index size != k");
  std::size_t total = 0;
  std::vector<int> seen(assignments.size(), 0);
  for (int c = 0; c < k; ++c) {
    for (std::size_t i : members[static_cast<std::size_t>(c)]) {
      require(i < assignments.size() && assignments[i] == c, "cluster space: member index disagrees with assignments");
      ++seen[i];
    }
    total += members[static_cast<std::size_t>(c)].size();
  }
  require(total == assignments.size(), "cluster space: members do not cover every sample exactly once");
  require(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }),
          "cluster space: sample in more than one cluster");
  if (!assignments.empty()) {
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    require(std::abs(wsum - 1.0) <= 1e-12, "cluster space: weights do not sum to 1");
  }
}

nlohmann::json ClusterSpace::to_json() const {
  nlohmann::json j;
  j["format"] = "trajprop.cluster_space";
  j["version"] = 1;
  j["id"] = id;
  j["k"] = k;
  j["metric"] = to_string(metric);
  j["gamma"] = gamma;
  j["centroids"] = centroids;
  j["assignments"] = assignments;
  j["weights"] = weights;
  j["objective_history"] = objective_history;
  j["standardization"] = {{"mean_x", standardizer.mean_x},
                          {"mean_y", standardizer.mean_y},
                          {"std_x", standardizer.std_x},
                          {"std_y", standardizer.std_y}};
  return j;
}

ClusterSpace ClusterSpace::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.cluster_space") fail(ErrorKind::kConfig, "not a cluster space document");
  if (j.value("version", 0) != 1) fail(ErrorKind::kConfig, "unsupported cluster space version");
  ClusterSpace s;
  s.id = j.at("id").get<std::string>();
  s.k = j.at("k").get<int>();
  s.metric = metric_from_string(j.at("metric").get<std::string>());
  s.gamma = j.at("gamma").get<double>();
  s.centroids = j.at("centroids").get<PointSet>();
  s.assignments = j.at("assignments").get<std::vector<int>>();
  s.objective_history = j.value("objective_history", std::vector<double>{});
  const auto& st = j.at("standardization");
  s.standardizer = {st.at("mean_x").get<double>(), st.at("mean_y").get<double>(), st.at("std_x").get<double>(),
                    st.at("std_y").get<double>()};
  s.rebuild_index();
  s.validate();
  return s;
}

namespace {

double sq_l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_data(const PointSet& data, int k, const char* who) {
  if (data.empty()) fail(std::string(who) + ": empty data");
  require(k >= 1, std::string(who) + ": k must be >= 1");
  if (static_cast<std::size_t>(k) > data.size()) {
    fail(std::string(who) + ": k = " + std::to_string(k) + " exceeds sample count " + std::to_string(data.size()));
  }
  const std::size_t d = data.front().size();
  require(d > 0, std::string(who) + ": zero-dimensional points");
  for (const auto& row : data) require(row.size() == d, std::string(who) + ": ragged data");
}

// k-means++: first center uniform, then proportional to `dist` to the nearest
// chosen center. Falls back to an unused index when every distance is zero.
template <typename Dist>
PointSet plus_plus_seed(const PointSet& data, int k, Rng& rng, Dist dist) {
  const std::size_t n = data.size();
  std::vector<char> used(n, 0);
  PointSet centers;
  std::size_t first = static_cast<std::size_t>(rng() % n);
  centers.push_back(data[first]);
  used[first] = 1;
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) best[i] = dist(data[i], centers.back());
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  while (centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += used[i] ? 0.0 : best[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double r = uni(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        r -= best[i];
        if (r <= 0.0 && best[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (!used[i] && best[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i)
        if (!used[i]) free.push_back(i);
      pick = free[static_cast<std::size_t>(rng() % free.size())];
    }
    used[pick] = 1;
    centers.push_back(data[pick]);
    for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], dist(data[i], centers.back()));
  }
  return centers;
}

// Assign every point to its nearest center (ties -> smaller id). Returns
// whether any assignment changed; fills per-point cost.
template <typename Dist>
bool assign_all(const PointSet& data, const PointSet& centers, std::vector<int>& labels, std::vector<double>& cost,
                Dist dist) {
  bool changed = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    int best = 0;
    double bd = dist(data[i], centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
      const double d = dist(data[i], centers[c]);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(c);
      }
    }
    if (labels[i] != best) changed = true;
    labels[i] = best;
    cost[i] = bd;
  }
  return changed;
}

// Move the costliest point of a multi-member cluster into each empty cluster.
bool repair_empty(const PointSet& data, PointSet& centers, std::vector<int>& labels, std::vector<double>& cost,
                  double zero_cost_of_self) {
  const int k = static_cast<int>(centers.size());
  bool repaired = false;
  for (int c = 0; c < k; ++c) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t far = data.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (sizes[static_cast<std::size_t>(labels[i])] < 2) continue;
      if (far == data.size() || cost[i] > cost[far]) far = i;
    }
    require(far < data.size(), "empty-cluster repair: no donor cluster");
    centers[static_cast<std::size_t>(c)] = data[far];
    labels[far] = c;
    cost[far] = zero_cost_of_self;
    repaired = true;
  }
  return repaired;
}

ClusterSpace finish(PointSet centers, std::vector<int> labels, Metric metric) {
  ClusterSpace s;
  s.k = static_cast<int>(centers.size());
  s.metric = metric;
  s.centroids = std::move(centers);
  s.assignments = std::move(labels);
  s.rebuild_index();
  return s;
}

}  // namespace

double dissimilarity(const ClusterSpace& space, std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dissimilarity: dimension mismatch");
  if (space.metric == Metric::kSoftDtw) return soft_dtw(unflatten(a), unflatten(b), space.gamma);
  return std::sqrt(sq_l2(a, b));
}

int assign(const ClusterSpace& space, std::span<const double> sample) {
  require(space.k >= 1, "assign: empty cluster space");
  if (sample.size() != space.dim()) {
    fail("assign: sample has dimension " + std::to_string(sample.size()) + " but " + to_string(space.metric) +
         " space expects " + std::to_string(space.dim()));
  }
  int best = 0;
  double bd = dissimilarity(space, sample, space.centroids[0]);
  for (int c = 1; c < space.k; ++c) {
    const double d = dissimilarity(space, sample, space.centroids[static_cast<std::size_t>(c)]);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  return best;
}

ClusterSpace kmeans(const PointSet& data, int k, const KMeansOptions& opts) {
  check_data(data, k, "kmeans");
  Rng rng(opts.seed);
  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) { return sq_l2(a, b); };
  PointSet centers = plus_plus_seed(data, k, rng, dist);
  const std::size_t n = data.size(), d = data.front().size();
  std::vector<int> labels(n, -1);
  std::vector<double> cost(n, 0.0);
  std::vector<double> history;

  for (std::size_t it = 0; it < std::max<std::size_t>(opts.max_iter, 1); ++it) {
    const bool changed = assign_all(data, centers, labels, cost, dist);
    const bool repaired = repair_empty(data, centers, labels, cost, 0.0);
    history.push_back(std::accumulate(cost.begin(), cost.end(), 0.0));
    if (it > 0 && !changed && !repaired) break;

    PointSet next(static_cast<std::size_t>(k), std::vector<double>(d, 0.0));
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& row = next[static_cast<std::size_t>(labels[i])];
      for (std::size_t j = 0; j < d; ++j) row[j] += data[i][j];
      ++count[static_cast<std::size_t>(labels[i])];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < next.size(); ++c) {
      for (double& v : next[c]) v /= static_cast<double>(count[c]);
      shift = std::max(shift, std::sqrt(sq_l2(next[c], centers[c])));
    }
    centers = std::move(next);
    if (shift < opts.tol) {
      assign_all(data, centers, labels, cost, dist);
      repair_empty(data, centers, labels, cost, 0.0);
      history.push_back(std::accumulate(cost.begin(), cost.end(), 0.0));
      break;
    }
  }
  // Leave a Lloyd fixed point: labels are the argmin for the stored centers.
  assign_all(data, centers, labels, cost, dist);
  repair_empty(data, centers, labels, cost, 0.0);

  ClusterSpace s = finish(std::move(centers), std::move(labels), Metric::kEuclideanFlat);
  s.objective_history = std::move(history);
  s.validate();
  return s;
}

std::vector<double> soft_dtw_barycenter(const PointSet& series, std::span<const std::size_t> idx,
                                        std::vector<double> init, double gamma, std::size_t iters, double step) {
  require(!idx.empty(), "soft_dtw_barycenter: no members");
  const double inv = 1.0 / static_cast<double>(idx.size());
  auto objective_and_grad = [&](const std::vector<double>& z, std::vector<double>* grad) {
    double obj = 0.0;
    if (grad) grad->assign(z.size(), 0.0);
    for (std::size_t m : idx) {
      const auto g = soft_dtw_grad(unflatten(z), unflatten(series[m]), gamma);
      obj += g.value * inv;
      if (grad) {
        for (std::size_t t = 0; t < g.grad_a.size(); ++t) {
          (*grad)[2 * t] += g.grad_a[t].x * inv;
          (*grad)[2 * t + 1] += g.grad_a[t].y * inv;
        }
      }
    }
    return obj;
  };

  std::vector<double> z = std::move(init);
  std::vector<double> best = z, grad;
  double best_obj = objective_and_grad(z, &grad);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t j = 0; j < z.size(); ++j) z[j] -= step * grad[j];
    const double obj = objective_and_grad(z, &grad);
    if (!std::isfinite(obj)) break;
    if (obj < best_obj) {
      best_obj = obj;
      best = z;
    }
  }
  return best;
}

ClusterSpace ts_kmeans(const PointSet& data, int k, const TsKMeansOptions& opts) {
  check_data(data, k, "ts_kmeans");
  require(data.front().size() % 2 == 0, "ts_kmeans: rows must hold interleaved (dx, dy) pairs");
  if (!(opts.gamma > 0.0)) fail("ts_kmeans: gamma must be > 0");
  const double gamma = opts.gamma;
  Rng rng(opts.seed);
  auto sdtw = [gamma](const std::vector<double>& a, const std::vector<double>& b) {
    return soft_dtw(unflatten(a), unflatten(b), gamma);
  };
  auto div = [gamma](const std::vector<double>& a, const std::vector<double>& b) {
    return soft_dtw_divergence(unflatten(a), unflatten(b), gamma);
  };
  PointSet centers = plus_plus_seed(data, k, rng, div);
  const std::size_t n = data.size(), d = data.front().size();
  std::vector<int> labels(n, -1);
  std::vector<double> cost(n, 0.0);
  std::vector<double> history;

  for (std::size_t it = 0; it < std::max<std::size_t>(opts.max_iter, 1); ++it) {
    const bool changed = assign_all(data, centers, labels, cost, sdtw);
    const bool repaired = repair_empty(data, centers, labels, cost, -std::numeric_limits<double>::infinity());
    if (repaired) assign_all(data, centers, labels, cost, sdtw);
    history.push_back(std::accumulate(cost.begin(), cost.end(), 0.0));
    if (it > 0 && !changed && !repaired) break;

    for (int c = 0; c < k; ++c) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if (labels[i] == c) idx.push_back(i);
      if (idx.empty()) continue;
      // Warm start from whichever of the current center and the member mean
      // scores better.
      std::vector<double> mean(d, 0.0);
      for (std::size_t i : idx)
        for (std::size_t j = 0; j < d; ++j) mean[j] += data[i][j] / static_cast<double>(idx.size());
      double obj_cur = 0.0, obj_mean = 0.0;
      for (std::size_t i : idx) {
        obj_cur += sdtw(centers[static_cast<std::size_t>(c)], data[i]);
        obj_mean += sdtw(mean, data[i]);
      }
      std::vector<double> init = obj_mean < obj_cur ? mean : centers[static_cast<std::size_t>(c)];
      centers[static_cast<std::size_t>(c)] =
          soft_dtw_barycenter(data, idx, std::move(init), gamma, opts.barycenter_iters, opts.barycenter_step);
    }
  }
  assign_all(data, centers, labels, cost, sdtw);
  if (repair_empty(data, centers, labels, cost, -std::numeric_limits<double>::infinity())) {
    assign_all(data, centers, labels, cost, sdtw);
  }

  ClusterSpace s = finish(std::move(centers), std::move(labels), Metric::kSoftDtw);
  s.gamma = gamma;
  s.objective_history = std::move(history);
  s.validate();
  return s;
}

double dbi(const ClusterSpace& space, const PointSet& data) {
  require(data.size() == space.assignments.size(), "dbi: data does not match the cluster space");
  if (space.k < 2) fail("dbi: undefined for k = 1");
  auto dist = [&](std::span<const double> a, std::span<const double> b) {
    if (space.metric == Metric::kSoftDtw) return soft_dtw_divergence(unflatten(a), unflatten(b), space.gamma);
    return std::sqrt(sq_l2(a, b));
  };
  const auto k = static_cast<std::size_t>(space.k);
  std::vector<double> sigma(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& mem = space.members[c];
    if (mem.empty()) fail("dbi: cluster " + std::to_string(c) + " is empty");
    for (std::size_t i : mem) sigma[c] += dist(data[i], space.centroids[c]);
    sigma[c] /= static_cast<double>(mem.size());
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double sep = dist(space.centroids[i], space.centroids[j]);
      const double r = sep > 0.0 ? (sigma[i] + sigma[j]) / sep : std::numeric_limits<double>::infinity();
      worst = std::max(worst, r);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

ClusterSpace run_clusterer(const PointSet& data, int k, const SelectKOptions& opts, std::uint64_t seed) {
  if (opts.clusterer == ClustererKind::kTsKMeans) {
    TsKMeansOptions o = opts.ts;
    o.seed = seed;
    return ts_kmeans(data, k, o);
  }
  KMeansOptions o = opts.kmeans;
  o.seed = seed;
  return kmeans(data, k, o);
}

SelectKResult select_k(const PointSet& data, std::span<const int> candidates, const SelectKOptions& opts) {
  require(opts.runs >= 1, "select_k: runs must be >= 1");
  require(!candidates.empty(), "select_k: no candidate k");
  SelectKResult out;
  if (candidates.size() == 1) {
    out.k_best = candidates.front();
    out.table.push_back({candidates.front(), std::numeric_limits<double>::quiet_NaN(), {}});
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k : candidates) {
    SelectKRow row;
    row.k = k;
    for (std::size_t r = 0; r < opts.runs; ++r) {
      const auto seed = derive_seed(opts.seed, "select_k/" + std::to_string(k), r);
      const auto space = run_clusterer(data, k, opts, seed);
      row.run_dbi.push_back(dbi(space, data));
    }
    row.mean_dbi = std::accumulate(row.run_dbi.begin(), row.run_dbi.end(), 0.0) / static_cast<double>(opts.runs);
    if (row.mean_dbi < best || (row.mean_dbi == best && k < out.k_best)) {
      best = row.mean_dbi;
      out.k_best = k;
    }
    out.table.push_back(std::move(row));
  }
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size(), "adjusted_rand_index: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [key, v] : table) index += c2(v);
  for (const auto& [key, v] : rows) sa += c2(v);
  for (const auto& [key, v] : cols) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(n));
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

PointSet corpus_points(const Corpus& corpus, const Standardizer& st) {
  PointSet out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.samples) {
    auto flat = flatten(s).values;
    out.push_back(st.is_identity() ? std::move(flat) : st.apply_flat(flat));
  }
  return out;
}

}  // namespace trajprop
