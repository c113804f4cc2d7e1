#include "trajprop/trajectory.hpp"

#include <cmath>

#include "trajprop/error.hpp"

namespace trajprop {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

void Trajectory::validate() const {
  require(points.size() >= 2, "trajectory '" + agent_id + "' needs at least 2 points, has " +
                                  std::to_string(points.size()));
  require(dt > 0.0, "trajectory '" + agent_id + "' has non-positive dt");
}

Vec2 DisplacementSeries::last_observed() const {
  Vec2 p = origin;
  for (std::size_t i = 0; i < t_obs && i < deltas.size(); ++i) p = p + deltas[i];
  return p;
}

void DisplacementSeries::validate() const {
  require(deltas.size() == t_obs + t_pred,
          "displacement series length " + std::to_string(deltas.size()) + " != t_obs + t_pred = " +
              std::to_string(t_obs + t_pred));
}

DisplacementSeries to_displacements(const Trajectory& traj, std::size_t t_obs, std::size_t t_pred) {
  require(t_obs >= 1, "to_displacements: t_obs must be >= 1");
  const std::size_t expected = t_obs + t_pred + 1;
  if (traj.points.size() != expected) {
    fail("to_displacements: expected " + std::to_string(expected) + " points (t_obs + t_pred + 1), got " +
         std::to_string(traj.points.size()));
  }
  DisplacementSeries out;
  out.t_obs = t_obs;
  out.t_pred = t_pred;
  out.origin = traj.points.front();
  out.deltas.reserve(expected - 1);
  for (std::size_t i = 0; i + 1 < traj.points.size(); ++i) {
    out.deltas.push_back(traj.points[i + 1] - traj.points[i]);
  }
  return out;
}

std::vector<Vec2> integrate(std::span<const Vec2> deltas, Vec2 from) {
  std::vector<Vec2> out;
  out.reserve(deltas.size());
  Vec2 p = from;
  for (const Vec2& d : deltas) {
    p = p + d;
    out.push_back(p);
  }
  return out;
}

Trajectory reconstruct(const DisplacementSeries& disp, double dt) {
  Trajectory t;
  t.dt = dt;
  t.points.reserve(disp.size() + 1);
  t.points.push_back(disp.origin);
  for (const Vec2& p : integrate(disp.deltas, disp.origin)) t.points.push_back(p);
  return t;
}

FlatDisplacement flatten(std::span<const Vec2> deltas) {
  FlatDisplacement f;
  f.values.reserve(2 * deltas.size());
  for (const Vec2& d : deltas) {
    f.values.push_back(d.x);
    f.values.push_back(d.y);
  }
  return f;
}

FlatDisplacement flatten(const DisplacementSeries& disp) { return flatten(disp.deltas); }

std::vector<Vec2> unflatten(std::span<const double> values) {
  require(values.size() % 2 == 0, "unflatten: odd number of values");
  std::vector<Vec2> out;
  out.reserve(values.size() / 2);
  for (std::size_t i = 0; i < values.size(); i += 2) out.push_back({values[i], values[i + 1]});
  return out;
}

std::pair<DisplacementSeries, DisplacementSeries> split(const DisplacementSeries& disp) {
  require(disp.t_pred >= 1, "split: series is observation-only (t_pred = 0)");
  disp.validate();
  DisplacementSeries obs;
  obs.t_obs = disp.t_obs;
  obs.t_pred = 0;
  obs.origin = disp.origin;
  obs.deltas.assign(disp.deltas.begin(), disp.deltas.begin() + static_cast<std::ptrdiff_t>(disp.t_obs));

  DisplacementSeries fut;
  fut.t_obs = 0;
  fut.t_pred = disp.t_pred;
  fut.origin = disp.last_observed();
  fut.deltas.assign(disp.deltas.begin() + static_cast<std::ptrdiff_t>(disp.t_obs), disp.deltas.end());
  return {std::move(obs), std::move(fut)};
}

DisplacementSeries concat(const DisplacementSeries& observed, const DisplacementSeries& future) {
  DisplacementSeries out;
  out.t_obs = observed.size();
  out.t_pred = future.size();
  out.origin = observed.origin;
  out.deltas = observed.deltas;
  out.deltas.insert(out.deltas.end(), future.deltas.begin(), future.deltas.end());
  return out;
}

DisplacementSeries observed_part(const DisplacementSeries& disp) {
  DisplacementSeries obs;
  obs.t_obs = disp.t_obs;
  obs.origin = disp.origin;
  obs.deltas.assign(disp.deltas.begin(), disp.deltas.begin() + static_cast<std::ptrdiff_t>(disp.t_obs));
  return obs;
}

std::vector<Vec2> future_deltas(const DisplacementSeries& disp) {
  return {disp.deltas.begin() + static_cast<std::ptrdiff_t>(disp.t_obs), disp.deltas.end()};
}

Standardizer Standardizer::fit(std::span<const DisplacementSeries> samples) {
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    for (const Vec2& d : s.deltas) {
      sx += d.x;
      sy += d.y;
      ++n;
    }
  }
  Standardizer st;
  if (n == 0) return st;
  st.mean_x = sx / static_cast<double>(n);
  st.mean_y = sy / static_cast<double>(n);
  for (const auto& s : samples) {
    for (const Vec2& d : s.deltas) {
      sxx += (d.x - st.mean_x) * (d.x - st.mean_x);
      syy += (d.y - st.mean_y) * (d.y - st.mean_y);
    }
  }
  st.std_x = std::sqrt(sxx / static_cast<double>(n));
  st.std_y = std::sqrt(syy / static_cast<double>(n));
  // constant axis: leave the scale alone
  if (st.std_x < 1e-12) st.std_x = 1.0;
  if (st.std_y < 1e-12) st.std_y = 1.0;
  return st;
}

bool Standardizer::is_identity() const {
  return mean_x == 0.0 && mean_y == 0.0 && std_x == 1.0 && std_y == 1.0;
}

Vec2 Standardizer::apply(Vec2 d) const { return {(d.x - mean_x) / std_x, (d.y - mean_y) / std_y}; }

Vec2 Standardizer::invert(Vec2 d) const { return {d.x * std_x + mean_x, d.y * std_y + mean_y}; }

std::vector<double> Standardizer::apply_flat(std::span<const double> flat) const {
  std::vector<double> out(flat.begin(), flat.end());
  for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
    out[i] = (out[i] - mean_x) / std_x;
    out[i + 1] = (out[i + 1] - mean_y) / std_y;
  }
  return out;
}

std::vector<double> Standardizer::invert_flat(std::span<const double> flat) const {
  std::vector<double> out(flat.begin(), flat.end());
  for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
    out[i] = out[i] * std_x + mean_x;
    out[i + 1] = out[i + 1] * std_y + mean_y;
  }
  return out;
}

}  // namespace trajprop
