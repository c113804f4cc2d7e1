#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajprop/config.hpp"
#include "trajprop/metrics.hpp"

namespace trajprop {

/// Hash of a corpus's sample values and window, used as the data lineage id.
std::string corpus_hash(const Corpus& c);

struct DataBundle {
  Splits splits;
  std::string name;
  std::string data_hash;
};

DataBundle load_data(const ExperimentConfig& cfg);

struct ClusterArtifact {
  ClusterSpace space;
  SelectKResult selection;
  std::optional<FpScGan> fp;
  std::string method;
  std::string stage_hash;
  std::string data_hash;
  std::uint64_t seed = 0;

  const FpScGan* embedder() const { return fp ? &*fp : nullptr; }
  std::string dbi_csv() const;
  nlohmann::json to_json() const;
  static ClusterArtifact from_json(const nlohmann::json& j);
};

ClusterArtifact run_clustering(const ExperimentConfig& cfg, const DataBundle& data, std::uint64_t seed);

struct ModelArtifact {
  ForecasterKind kind = ForecasterKind::kCvm;
  std::optional<RedForecaster> red;
  std::optional<GenerativeForecaster> gen;
  std::optional<AnetClassifier> anet;
  TrainLog log;
  std::string model_id;
  std::string space_id;
  std::string stage_hash;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static ModelArtifact from_json(const nlohmann::json& j);
};

/// Conditioned kinds need `clusters`; its stage hash must match the config.
ModelArtifact train_model(const ExperimentConfig& cfg, const DataBundle& data, const ClusterArtifact* clusters,
                          std::uint64_t seed);

/// One ProposalSet per test sample: K proposals for conditioned models,
/// top_k samples for context-free generators, one prediction otherwise.
std::vector<ProposalSet> propose_all(const ExperimentConfig& cfg, const Corpus& test, const ClusterArtifact* clusters,
                                     const ModelArtifact& model, std::uint64_t seed);

/// Fills probabilities of conditioned proposal sets; others pass through.
std::vector<ProposalSet> rank_all(const ExperimentConfig& cfg, std::vector<ProposalSet> sets, const Corpus& train,
                                  const ClusterArtifact* clusters, const ModelArtifact& model);

/// Calibration of one temperature. Distance rankers never change their argmax
/// with tau, so accuracy stays flat and only the spread of mass moves.
struct TauRow {
  double tau = 1.0;
  double ranking_accuracy = 0.0;
  /// Mean probability placed on the pseudo-label cluster.
  double label_prob = 0.0;
  /// Mean entropy of the ranking distribution, in nats.
  double entropy = 0.0;
};

/// Re-rank `sets` once per tau with everything else fixed.
std::vector<TauRow> tau_sweep(const ExperimentConfig& cfg, const std::vector<ProposalSet>& sets, const Corpus& train,
                              const ClusterArtifact& clusters, const ModelArtifact& model,
                              const std::vector<int>& labels, const std::vector<double>& taus);
std::string tau_sweep_csv(const std::vector<TauRow>& rows);

/// Cluster id of each full ground-truth sample under the space.
std::vector<int> pseudo_labels(const Corpus& corpus, const ClusterArtifact& clusters);

RunMetrics score(const ExperimentConfig& cfg, const Corpus& test, const std::vector<ProposalSet>& ranked,
                 const std::vector<int>* labels, bool conditioned);

nlohmann::json proposal_set_to_json(const ProposalSet& ps, std::size_t sample, const std::vector<Vec2>* truth,
                                    int label = -1);
ProposalSet proposal_set_from_json(const nlohmann::json& j);

struct RunArtifacts {
  std::optional<ClusterArtifact> clusters;
  ModelArtifact model;
  std::vector<ProposalSet> ranked;
  std::vector<int> labels;
  RunMetrics metrics;
};

/// cluster -> train -> propose -> rank -> score for one derived seed.
RunArtifacts run_once(const ExperimentConfig& cfg, const DataBundle& data, std::uint64_t seed);

struct Evaluation {
  EvalReport report;
  /// Run 0, kept for ranked output and plots.
  RunArtifacts first;
};

/// All runs (one for CVM) with seeds derived from the global seed.
Evaluation evaluate(const ExperimentConfig& cfg, const DataBundle& data, int runs_override = 0);

/// Ranked output as JSON lines, one per test sample.
std::string ranked_jsonl(const Corpus& test, const std::vector<ProposalSet>& ranked, const std::vector<int>& labels);

}  // namespace trajprop
