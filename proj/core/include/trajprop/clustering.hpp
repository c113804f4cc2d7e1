#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trajprop/ingestion.hpp"
#include "trajprop/trajectory.hpp"

namespace trajprop {

/// Rows of equal length. Flat displacements, interleaved series or feature
/// vectors depending on the metric.
using PointSet = std::vector<std::vector<double>>;

enum class Metric { kEuclideanFlat, kSoftDtw, kFeatureL2 };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

/// K-partition of a dataset. Every sample belongs to exactly one cluster.
struct ClusterSpace {
  int k = 0;
  Metric metric = Metric::kEuclideanFlat;
  /// Soft-DTW smoothing (kSoftDtw only).
  double gamma = 1.0;
  /// One row per cluster, same layout as the clustered points.
  PointSet centroids;
  std::vector<int> assignments;
  std::vector<std::vector<std::size_t>> members;
  std::vector<double> weights;
  Standardizer standardizer;
  std::string id;
  /// Clustering objective after each outer iteration (inertia for k-Means).
  std::vector<double> objective_history;

  std::size_t dim() const { return centroids.empty() ? 0 : centroids.front().size(); }
  std::size_t size() const { return assignments.size(); }

  /// Recompute members and weights from assignments.
  void rebuild_index();
  /// Partition and weight invariants; throws on violation.
  void validate() const;

  nlohmann::json to_json() const;
  static ClusterSpace from_json(const nlohmann::json& j);
};

/// Dissimilarity used by the space: L2 for flat and feature spaces, soft-DTW
/// for time-series spaces.
double dissimilarity(const ClusterSpace& space, std::span<const double> a, std::span<const double> b);

/// Nearest centroid; ties go to the smallest cluster id.
int assign(const ClusterSpace& space, std::span<const double> sample);

struct KMeansOptions {
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  double tol = 1e-10;
};

/// Lloyd's algorithm with k-means++ seeding and farthest-point repair of empty
/// clusters.
ClusterSpace kmeans(const PointSet& data, int k, const KMeansOptions& opts = {});

struct TsKMeansOptions {
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_iter = 30;
  std::size_t barycenter_iters = 30;
  double barycenter_step = 0.1;
};

/// k-Means under soft-DTW with gradient-descent barycenters. Rows hold
/// interleaved (dx, dy) series of equal length.
ClusterSpace ts_kmeans(const PointSet& data, int k, const TsKMeansOptions& opts = {});

/// Soft-DTW barycenter of `series` by gradient descent from `init`; returns the
/// best iterate seen.
std::vector<double> soft_dtw_barycenter(const PointSet& series, std::span<const std::size_t> idx,
                                        std::vector<double> init, double gamma, std::size_t iters, double step);

/// Davies-Bouldin index under the space's metric. Lower is better.
double dbi(const ClusterSpace& space, const PointSet& data);

enum class ClustererKind { kKMeans, kTsKMeans };

struct SelectKRow {
  int k = 0;
  double mean_dbi = 0.0;
  std::vector<double> run_dbi;
};

struct SelectKResult {
  int k_best = 0;
  std::vector<SelectKRow> table;
};

struct SelectKOptions {
  ClustererKind clusterer = ClustererKind::kKMeans;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
  TsKMeansOptions ts;
};

/// Average DBI over `runs` seeded runs per candidate; ties pick the smallest k.
SelectKResult select_k(const PointSet& data, std::span<const int> candidates, const SelectKOptions& opts);

ClusterSpace run_clusterer(const PointSet& data, int k, const SelectKOptions& opts, std::uint64_t seed);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Flattened full displacement series of every sample, standardized.
PointSet corpus_points(const Corpus& corpus, const Standardizer& st = {});

/// Minimum-cost perfect matching on a square cost matrix (row-major, n x n).
/// Returns col[row].
std::vector<int> hungarian(std::span<const double> cost, int n);

/// Relabel `next` so that its agreement with `prev` is maximal. Returns the
/// permutation applied (new_label = perm[old_label]).
std::vector<int> align_labels(std::span<const int> prev, std::span<const int> next, int k);

}  // namespace trajprop
