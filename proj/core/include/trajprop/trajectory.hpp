#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trajprop {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

double norm(Vec2 v);

/// Evenly sampled 2D track of one agent. Positions in meters.
struct Trajectory {
  std::string agent_id;
  std::vector<Vec2> points;
  double dt = 0.4;
  std::string source_dataset;

  /// Throws if fewer than two points or dt <= 0.
  void validate() const;
};

/// Per-step finite differences of a trajectory.
///
/// A full series holds t_obs observed steps followed by t_pred future steps.
/// An observation-only series has t_pred == 0.
struct DisplacementSeries {
  std::vector<Vec2> deltas;
  std::size_t t_obs = 0;
  std::size_t t_pred = 0;
  Vec2 origin;

  std::size_t size() const { return deltas.size(); }
  bool is_full() const { return t_pred > 0; }
  /// Position of the last observed point, integrated from origin.
  Vec2 last_observed() const;
  void validate() const;
};

/// Interleaved x/y values: dx1, dy1, dx2, dy2, ...
struct FlatDisplacement {
  std::vector<double> values;
  std::size_t steps() const { return values.size() / 2; }
};

/// points.size() must equal t_obs + t_pred + 1.
DisplacementSeries to_displacements(const Trajectory& traj, std::size_t t_obs, std::size_t t_pred);

/// Cumulative positions after each delta, starting from `from` (which is not
/// included in the output).
std::vector<Vec2> integrate(std::span<const Vec2> deltas, Vec2 from);

/// Inverse of to_displacements: the trajectory including its origin.
Trajectory reconstruct(const DisplacementSeries& disp, double dt = 0.4);

FlatDisplacement flatten(std::span<const Vec2> deltas);
FlatDisplacement flatten(const DisplacementSeries& disp);
std::vector<Vec2> unflatten(std::span<const double> values);

/// Observed and future halves of a full series. The future half carries
/// t_obs = 0 and its origin at the last observed position.
std::pair<DisplacementSeries, DisplacementSeries> split(const DisplacementSeries& disp);

DisplacementSeries concat(const DisplacementSeries& observed, const DisplacementSeries& future);

/// Observed steps only (t_pred = 0).
DisplacementSeries observed_part(const DisplacementSeries& disp);
std::vector<Vec2> future_deltas(const DisplacementSeries& disp);

/// Optional per-axis standardization of displacement values. Identity by
/// default; fitted on training displacements and persisted with models.
struct Standardizer {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double std_x = 1.0;
  double std_y = 1.0;

  static Standardizer fit(std::span<const DisplacementSeries> samples);
  bool is_identity() const;

  Vec2 apply(Vec2 d) const;
  Vec2 invert(Vec2 d) const;
  std::vector<double> apply_flat(std::span<const double> flat) const;
  std::vector<double> invert_flat(std::span<const double> flat) const;
};

}  // namespace trajprop
