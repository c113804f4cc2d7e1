#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trajprop/forecasters.hpp"
#include "trajprop/trajectory.hpp"

namespace trajprop {

/// Mean / final Euclidean distance between position sequences.
double ade(std::span<const Vec2> pred, std::span<const Vec2> truth);
double fde(std::span<const Vec2> pred, std::span<const Vec2> truth);

struct AdeFde {
  double ade = 0.0;
  double fde = 0.0;
};

/// Integrates both displacement futures from the last observed position and
/// measures them there.
AdeFde future_errors(const DisplacementSeries& obs, std::span<const Vec2> pred, std::span<const Vec2> truth);

/// Among the k most probable proposals (ties to the smaller cluster id), the
/// one with the lowest ADE; its FDE is reported alongside.
AdeFde topk_by_likelihood(const ProposalSet& ranked, std::span<const Vec2> truth, std::size_t k);

/// Min-ADE among the first k samples in generation order.
AdeFde topk_by_sampling(const DisplacementSeries& obs, const std::vector<std::vector<Vec2>>& samples,
                        std::span<const Vec2> truth, std::size_t k);

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
Stat summarize(std::span<const double> v);

/// Test-set averages for one run.
struct RunMetrics {
  double top1_ade = 0.0, top1_fde = 0.0;
  double top3_ade = 0.0, top3_fde = 0.0;
  double ranking_accuracy = 0.0;
  bool ranked = false;
  std::uint64_t seed = 0;
};

struct EvalRow {
  std::string dataset;
  std::string model_id;
  std::string forecaster;
  std::string ranking;     // "none" for unranked predictors
  std::string clustering;  // "none" for context-free predictors
  Stat top1_ade, top1_fde, top3_ade, top3_fde;
  Stat ranking_accuracy;
  bool ranked = false;
  std::vector<std::uint64_t> seeds;
  std::string config_hash;

  static EvalRow aggregate(std::span<const RunMetrics> runs);
};

struct EvalReport {
  std::vector<EvalRow> rows;

  /// Values finite and non-negative, at least one run per row.
  void validate() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

}  // namespace trajprop
