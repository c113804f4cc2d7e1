#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajprop/forecasters.hpp"
#include "trajprop/fp_scgan.hpp"
#include "trajprop/ingestion.hpp"
#include "trajprop/ranking.hpp"

namespace trajprop {

inline constexpr int kSchemaVersion = 1;

struct DataConfig {
  /// "synthetic" or "trajnet".
  std::string source = "synthetic";
  /// Synthetic preset: constant-velocity, two-regime or three-regime.
  std::string scenario = "three-regime";
  std::size_t n = 600;
  std::vector<std::string> files;
  double dt = 0.4;
  bool overlap = false;
  std::size_t stride = 1;
  SplitPlan split;
};

struct ClusteringConfig {
  /// kmeans, ts-kmeans or fp-scgan.
  std::string method = "kmeans";
  std::vector<int> k_grid{2, 3, 4, 5, 6};
  double gamma = 1.0;
  int runs = 5;
  bool standardize = false;
  FpScGanConfig fp_scgan;
};

struct EvaluationConfig {
  int runs = 5;
  std::size_t top_k = 3;
  std::size_t n_z = 1;
  std::size_t plots = 6;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  std::size_t t_obs = 8;
  std::size_t t_pred = 12;
  DataConfig data;
  ClusteringConfig clustering;
  ForecasterConfig forecaster;
  RankerConfig ranking;
  EvaluationConfig evaluation;
  std::string output_dir = "out";

  /// Throws kConfig. With `check_files` every data path must exist.
  void validate(bool check_files = true) const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a of the canonical serialization (sorted keys, no whitespace).
std::string config_hash(const ExperimentConfig& cfg);

/// Hash of the sections a pipeline stage depends on: "data", "cluster",
/// "model" or "rank". Each stage includes the ones before it.
std::string stage_hash(const ExperimentConfig& cfg, const std::string& stage);

ScenarioSpec scenario_preset(const std::string& name, std::size_t t_obs = 8, std::size_t t_pred = 12);

}  // namespace trajprop
