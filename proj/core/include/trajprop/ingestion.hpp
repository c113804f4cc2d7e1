#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trajprop/trajectory.hpp"

namespace trajprop {

/// Fixed-length samples drawn from one or more source datasets.
struct Corpus {
  std::string name;
  std::size_t t_obs = 8;
  std::size_t t_pred = 12;
  std::vector<DisplacementSeries> samples;
  /// Ground-truth regime labels for synthetic corpora; empty otherwise.
  std::vector<int> labels;
  std::vector<std::string> provenance;

  std::size_t size() const { return samples.size(); }
  bool has_labels() const { return !labels.empty(); }
  void validate() const;
};

/// Parse a TrajNet text file (`frame_id agent_id x y` per line).
///
/// Frame gaps larger than the file's smallest frame increment split an agent
/// into separate tracks; tracks shorter than two points are dropped.
std::vector<Trajectory> load_trajnet(const std::filesystem::path& path, double dt = 0.4);

/// Cut trajectories into windows of t_obs + t_pred + 1 positions. Without
/// overlap consecutive windows advance by a full window; with overlap they
/// advance by `stride`.
Corpus segment(const std::vector<Trajectory>& trajs, std::size_t t_obs, std::size_t t_pred,
               bool overlap, std::size_t stride = 1, std::string name = {});

enum class SplitMode { kTrainTestSplit, kLeaveOneDatasetOut };

struct SplitPlan {
  SplitMode mode = SplitMode::kTrainTestSplit;
  std::string held_out;
  double train_fraction = 0.7;
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  /// Share of the training union used for validation in LODO mode.
  double lodo_val_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct Splits {
  Corpus train;
  Corpus val;
  Corpus test;
};

Splits make_splits(const std::vector<Corpus>& corpora, const SplitPlan& plan);

enum class RegimeKind { kStraight, kArc, kStopAndGo };

/// One synthetic motion pattern. Angles in radians, speeds in meters/step.
struct Regime {
  RegimeKind kind = RegimeKind::kStraight;
  double speed = 0.5;
  double heading = 0.0;
  /// Heading change per step once turning has started (arc regimes).
  double turn_rate = 0.0;
  /// Step index at which the turn begins.
  std::size_t turn_start = 0;
  std::size_t go_steps = 3;
  std::size_t stop_steps = 2;
  double weight = 1.0;
};

struct ScenarioSpec {
  std::vector<Regime> regimes;
  std::size_t t_obs = 8;
  std::size_t t_pred = 12;
  double position_noise = 0.0;
  double speed_jitter = 0.0;
  double heading_jitter = 0.0;
  double start_extent = 10.0;
  std::string name = "synthetic";
};

/// Labeled synthetic corpus; labels index into spec.regimes.
Corpus synth_corpus(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed);

/// Synthetic regimes rendered as whole trajectories (TrajNet export).
std::vector<Trajectory> synth_trajectories(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed,
                                           std::vector<int>* labels = nullptr);

void write_trajnet(const std::filesystem::path& path, const std::vector<Trajectory>& trajs,
                   int frame_step = 10);

}  // namespace trajprop
