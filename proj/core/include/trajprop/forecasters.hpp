#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trajprop/clustering.hpp"
#include "trajprop/ingestion.hpp"
#include "trajprop/nn/layers.hpp"
#include "trajprop/trajectory.hpp"

namespace trajprop {

enum class ForecasterKind { kCvm, kRed, kCfGan, kCfVae, kGanOurs, kVaeOurs };

std::string to_string(ForecasterKind k);
ForecasterKind forecaster_kind_from_string(const std::string& s);
bool is_generative(ForecasterKind k);
bool is_conditioned(ForecasterKind k);
bool is_vae(ForecasterKind k);

struct ForecasterConfig {
  ForecasterKind kind = ForecasterKind::kGanOurs;
  int embed_dim = 16;
  int lstm_dim = 64;
  int decode_dim = 32;
  /// Second hidden width of RED's output MLP.
  int red_hidden2 = 16;
  std::size_t t_obs = 8;
  std::size_t t_pred = 12;
  double lambda = 0.5;
  double beta = 1.0;
  int z_dim = 8;
  int k_variety = 3;
  int epochs = 100;
  int batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double cvm_sigma = 1.0;
  bool standardize = false;

  void validate() const;
  nlohmann::json to_json() const;
  static ForecasterConfig from_json(const nlohmann::json& j);
};

struct Proposal {
  std::vector<Vec2> future;
  int cluster = -1;
};

/// Proposed futures for one observed track, optionally with probabilities.
struct ProposalSet {
  DisplacementSeries observed;
  std::vector<Proposal> proposals;
  std::vector<double> probabilities;
  std::string source;

  std::size_t size() const { return proposals.size(); }
  bool has_probabilities() const { return !probabilities.empty(); }
  /// Probabilities non-negative and summing to 1 within 1e-9 when present;
  /// one proposal per cluster id when `conditioned`.
  void validate(bool conditioned) const;
};

/// Gaussian-kernel weighted average of observed displacements, repeated for
/// t_pred steps. sigma <= 0 uses the last displacement alone.
std::vector<Vec2> cvm_predict(const DisplacementSeries& obs, std::size_t t_pred, double sigma);

struct TrainLog {
  std::vector<double> loss;
  std::vector<double> aux;  // discriminator loss or KL term
};

/// LSTM encoder + MLP that emits every future displacement at once.
class RedForecaster {
 public:
  explicit RedForecaster(ForecasterConfig cfg);
  RedForecaster(const RedForecaster&) = delete;
  RedForecaster& operator=(const RedForecaster&) = delete;
  RedForecaster(RedForecaster&&) = default;
  RedForecaster& operator=(RedForecaster&&) = default;

  TrainLog train(const Corpus& corpus);
  std::vector<Vec2> predict(const DisplacementSeries& obs) const;
  std::vector<std::vector<Vec2>> predict_batch(const std::vector<DisplacementSeries>& obs) const;
  bool trained() const { return trained_; }
  const ForecasterConfig& config() const { return cfg_; }

  nlohmann::json to_json() const;
  static RedForecaster from_json(const nlohmann::json& j);

 private:
  void build();

  ForecasterConfig cfg_;
  Standardizer st_;
  nn::ParamSet params_;
  nn::Dense embed_, h1_, h2_;
  nn::LstmCell lstm_;
  nn::Linear out_;
  bool trained_ = false;
};

/// Context-free and cluster-conditioned generative forecasters.
///
/// The generator embeds observed displacements (one-hot class appended per
/// step when conditioned), runs an LSTM, joins the final state with noise and
/// decodes the future autoregressively starting from the last observed
/// displacement. GAN variants train a future-tracklet discriminator; VAE
/// variants train a recognition network over the ground-truth future.
class GenerativeForecaster {
 public:
  /// `num_classes` is K for conditioned kinds and ignored otherwise.
  GenerativeForecaster(ForecasterConfig cfg, int num_classes = 0);
  GenerativeForecaster(const GenerativeForecaster&) = delete;
  GenerativeForecaster& operator=(const GenerativeForecaster&) = delete;
  GenerativeForecaster(GenerativeForecaster&&) = default;
  GenerativeForecaster& operator=(GenerativeForecaster&&) = default;

  /// Context-free kinds ignore `space`; conditioned kinds require it and use
  /// its assignments as ground-truth classes (one per corpus sample).
  TrainLog train(const Corpus& corpus, const ClusterSpace* space = nullptr);

  /// Future displacements for each (obs, class, z) row.
  std::vector<std::vector<Vec2>> generate(const std::vector<DisplacementSeries>& obs, const std::vector<int>& classes,
                                          const nn::Matrix& z) const;

  /// n futures with fresh noise each, in generation order.
  std::vector<std::vector<Vec2>> sample(const DisplacementSeries& obs, std::size_t n, std::uint64_t seed) const;

  /// One proposal per cluster. With n_z > 1 each proposal is the mean of n_z
  /// decoded draws; noise draws are shared across clusters.
  ProposalSet propose(const DisplacementSeries& obs, const ClusterSpace& space, std::size_t n_z,
                      std::uint64_t seed) const;

  bool trained() const { return trained_; }
  int num_classes() const { return k_; }
  const ForecasterConfig& config() const { return cfg_; }
  const std::string& space_id() const { return space_id_; }

  nlohmann::json to_json() const;
  static GenerativeForecaster from_json(const nlohmann::json& j);

 private:
  struct Batch;
  void build();
  nn::Var encode_decode(nn::Tape& t, const Batch& b, nn::Var z) const;
  nn::Var discriminate(nn::Tape& t, nn::Var future_flat, const nn::Matrix& onehot) const;
  void recognise(nn::Tape& t, const Batch& b, nn::Var* mu, nn::Var* logvar) const;
  Batch make_batch(const std::vector<DisplacementSeries>& obs, const std::vector<std::vector<Vec2>>* future,
                   const std::vector<int>& classes) const;

  ForecasterConfig cfg_;
  int k_ = 0;
  Standardizer st_;
  std::string space_id_;
  nn::ParamSet gen_;
  nn::ParamSet disc_;
  // generator
  nn::Dense enc_embed_, join_, dec_embed_, dec_head_;
  nn::LstmCell enc_lstm_, dec_lstm_;
  nn::Linear dec_out_;
  // recognition network (VAE)
  nn::Dense rec_embed_;
  nn::LstmCell rec_lstm_;
  nn::Linear rec_mu_, rec_logvar_;
  // discriminator (GAN)
  nn::Dense d_embed_, d_head_;
  nn::LstmCell d_lstm_;
  nn::Linear d_out_;
  bool trained_ = false;
};

/// Cumulative-sum matrix mapping interleaved deltas (1 x 2T) to interleaved
/// positions relative to the start.
nn::Matrix cumsum_matrix(std::size_t steps);

}  // namespace trajprop
