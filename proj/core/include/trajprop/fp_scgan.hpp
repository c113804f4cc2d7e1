#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trajprop/clustering.hpp"
#include "trajprop/forecasters.hpp"
#include "trajprop/ingestion.hpp"
#include "trajprop/nn/layers.hpp"

namespace trajprop {

enum class EncoderKind { kLstm, kMlp };

struct FpScGanConfig {
  int z_dim = 8;
  int hidden = 64;
  int embed_dim = 16;
  int feature_dim = 64;
  EncoderKind encoder = EncoderKind::kLstm;
  double lambda = 0.5;
  int epochs = 30;
  int batch = 64;
  double lr = 1e-3;
  /// Optimizer steps between reclusters; 0 means once per epoch.
  std::size_t recluster_period = 0;
  bool standardize = false;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static FpScGanConfig from_json(const nlohmann::json& j);
};

/// Class ids drawn i.i.d. from the cluster weights.
std::vector<int> draw_classes(std::span<const double> weights, std::size_t n, Rng& rng);

/// Self-conditioned GAN over full displacement series.
///
/// The generator maps noise and a one-hot cluster id to a complete series.
/// The discriminator's encoder output is the feature space: every
/// `recluster_period` steps the real samples are embedded, re-partitioned by
/// k-Means and the new ids are matched to the previous ones by maximum
/// overlap.
class FpScGan {
 public:
  FpScGan(FpScGanConfig cfg, int k, std::size_t t_obs, std::size_t t_pred);
  FpScGan(const FpScGan&) = delete;
  FpScGan& operator=(const FpScGan&) = delete;
  FpScGan(FpScGan&&) = default;
  FpScGan& operator=(FpScGan&&) = default;

  /// Trains on full series and returns the final cluster space. The space is
  /// the initial flat k-Means partition until the first recluster fires.
  const ClusterSpace& train(const Corpus& corpus);

  std::vector<double> embed(const DisplacementSeries& full) const;
  PointSet embed_batch(const std::vector<DisplacementSeries>& full) const;

  std::vector<DisplacementSeries> sample_displacements(int c, std::size_t n, std::uint64_t seed) const;

  const ClusterSpace& feature_space() const { return space_; }
  void set_space_id(std::string id) { space_.id = std::move(id); }
  int k() const { return k_; }
  bool trained() const { return trained_; }
  std::size_t reclusters() const { return reclusters_; }
  const TrainLog& log() const { return log_; }
  std::size_t steps() const { return t_obs_ + t_pred_; }

  nlohmann::json to_json() const;
  static FpScGan from_json(const nlohmann::json& j);

 private:
  void build();
  nn::Var generate(nn::Tape& t, const nn::Matrix& z, const nn::Matrix& onehot) const;
  nn::Var encode(nn::Tape& t, nn::Var flat) const;
  nn::Var score(nn::Tape& t, nn::Var flat) const;
  void recluster(const PointSet& real_std);

  FpScGanConfig cfg_;
  int k_;
  std::size_t t_obs_, t_pred_;
  Standardizer st_;
  ClusterSpace space_;
  nn::ParamSet gen_, disc_;
  nn::Dense g1_, g2_;
  nn::Linear g_out_;
  nn::Dense e_embed_, e1_, e2_;
  nn::LstmCell e_lstm_;
  nn::Dense c1_;
  nn::Linear c_out_;
  TrainLog log_;
  std::size_t reclusters_ = 0;
  bool trained_ = false;
};

}  // namespace trajprop
