#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trajprop/clustering.hpp"
#include "trajprop/forecasters.hpp"
#include "trajprop/fp_scgan.hpp"

namespace trajprop {

enum class RankMethod { kCent, kNeighDs, kNeighFs, kAnet };
std::string to_string(RankMethod m);
RankMethod rank_method_from_string(const std::string& s);

/// What a proposal is compared with: its future alone, or obs followed by it.
enum class Operand { kFuture, kFull };

struct AnetSpec {
  int hidden = 64;
  int layers = 2;
  int samples_per_class = 50;
  int epochs = 60;
  int batch = 64;
  double lr = 1e-3;
};

struct RankerConfig {
  RankMethod method = RankMethod::kCent;
  double tau = 1.0;
  std::size_t n_neig = 20;
  Operand operand = Operand::kFuture;
  AnetSpec anet;

  void validate() const;
  nlohmann::json to_json() const;
  static RankerConfig from_json(const nlohmann::json& j);
};

/// p_i proportional to exp((1/m_i)/tau). A zero distance takes all the mass;
/// several zeros share it evenly.
std::vector<double> inverse_distance_softmax(std::span<const double> m, double tau);

/// Vector a proposal is ranked with. Feature-space clusterings embed
/// obs followed by the proposal; displacement spaces use standardized
/// displacements of the chosen operand.
std::vector<double> proposal_vector(const DisplacementSeries& obs, std::span<const Vec2> future,
                                    const ClusterSpace& space, Operand op, const FpScGan* embedder = nullptr);

/// Centroid c restricted to the operand (the trailing `future_steps` steps in
/// displacement spaces).
std::vector<double> centroid_vector(const ClusterSpace& space, int c, Operand op, std::size_t future_steps);

std::vector<double> centroid_distances(const ProposalSet& ps, const ClusterSpace& space, Operand op,
                                       const FpScGan* embedder = nullptr);
ProposalSet rank_centroids(ProposalSet ps, const ClusterSpace& space, double tau, Operand op = Operand::kFuture,
                           const FpScGan* embedder = nullptr);

/// Training vectors grouped by cluster, in the space proposals are compared in.
struct NeighborBank {
  std::vector<PointSet> members;
  Operand operand = Operand::kFuture;
  bool features = false;
};

/// Groups `corpus` by `space.assignments`, so `space` must have been fit on it.
NeighborBank build_bank(const Corpus& corpus, const ClusterSpace& space, Operand op,
                        const FpScGan* embedder = nullptr);

/// Mean L2 distance to the n_neig closest members of each proposal's cluster
/// (exact linear scan, n_neig capped at cluster size).
std::vector<double> neighbor_distances(const ProposalSet& ps, const ClusterSpace& space, const NeighborBank& bank,
                                       std::size_t n_neig, const FpScGan* embedder = nullptr);
ProposalSet rank_neighbors(ProposalSet ps, const ClusterSpace& space, const NeighborBank& bank, double tau,
                           std::size_t n_neig, const FpScGan* embedder = nullptr);

/// MLP over flattened futures classifying them into cluster ids.
class AnetClassifier {
 public:
  AnetClassifier() = default;
  AnetClassifier(const AnetClassifier&) = delete;
  AnetClassifier& operator=(const AnetClassifier&) = delete;
  AnetClassifier(AnetClassifier&&) = default;
  AnetClassifier& operator=(AnetClassifier&&) = default;

  /// Trains on futures generated by a conditioned forecaster: classes drawn
  /// from the cluster weights, observations from `corpus`.
  static AnetClassifier train(const GenerativeForecaster& gen, const ClusterSpace& space, const Corpus& corpus,
                              const AnetSpec& spec, std::uint64_t seed);
  /// Trains on futures sampled from the FP SC-GAN generator.
  static AnetClassifier train(const FpScGan& gan, const AnetSpec& spec, std::uint64_t seed);
  /// Trains directly on labelled futures.
  static AnetClassifier fit(const std::vector<std::vector<Vec2>>& futures, const std::vector<int>& labels, int k,
                            const Standardizer& st, const AnetSpec& spec, std::uint64_t seed);

  std::vector<double> predict_proba(std::span<const Vec2> future) const;
  std::vector<std::vector<double>> predict_proba_batch(const std::vector<std::vector<Vec2>>& futures) const;
  ProposalSet rank(ProposalSet ps) const;

  bool trained() const { return trained_; }
  int k() const { return k_; }
  double train_accuracy() const { return train_accuracy_; }

  nlohmann::json to_json() const;
  static AnetClassifier from_json(const nlohmann::json& j);

 private:
  void build(std::size_t future_steps, std::uint64_t seed);
  nn::Matrix logits(const std::vector<std::vector<Vec2>>& futures) const;

  AnetSpec spec_;
  int k_ = 0;
  std::size_t steps_ = 0;
  Standardizer st_;
  nn::ParamSet params_;
  std::vector<nn::Dense> hidden_;
  nn::Linear out_;
  double train_accuracy_ = 0.0;
  bool trained_ = false;
};

/// Everything a ranker might need; only the pieces its method uses must be set.
struct RankResources {
  const ClusterSpace* space = nullptr;
  const NeighborBank* bank = nullptr;
  const FpScGan* embedder = nullptr;
  const AnetClassifier* anet = nullptr;
};

ProposalSet rank(ProposalSet ps, const RankerConfig& cfg, const RankResources& res);

/// Cluster id of the most probable proposal; ties go to the smaller id.
int top_cluster(const ProposalSet& ps);

/// Percentage of sets whose most probable cluster equals the label.
double ranking_accuracy(std::span<const ProposalSet> ranked, std::span<const int> labels);

}  // namespace trajprop
