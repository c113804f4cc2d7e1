#include "trajprop/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "trajprop/error.hpp"
#include "trajprop/rng.hpp"

namespace trajprop {

void Corpus::validate() const {
  for (const auto& s : samples) {
    require(s.t_obs == t_obs && s.t_pred == t_pred,
            "corpus '" + name + "': sample with mismatched (t_obs, t_pred)");
    s.validate();
  }
  require(labels.empty() || labels.size() == samples.size(),
          "corpus '" + name + "': label count differs from sample count");
}

namespace {

struct Record {
  double frame;
  Vec2 pos;
};

}  // namespace

std::vector<Trajectory> load_trajnet(const std::filesystem::path& path, double dt) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open trajectory file " + path.string());

  std::vector<std::string> order;
  std::map<std::string, std::vector<Record>> tracks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double frame = 0, x = 0, y = 0;
    std::string agent, extra;
    if (!(ss >> frame >> agent >> x >> y) || (ss >> extra)) {
      fail(path.string() + ":" + std::to_string(lineno) +
           ": expected 4 whitespace-separated fields `frame_id agent_id x y`");
    }
    try {
      (void)std::stod(agent);
    } catch (const std::exception&) {
      fail(path.string() + ":" + std::to_string(lineno) + ": agent_id is not numeric");
    }
    auto [it, inserted] = tracks.try_emplace(agent);
    if (inserted) order.push_back(agent);
    if (!it->second.empty() && frame <= it->second.back().frame) {
      fail(path.string() + ":" + std::to_string(lineno) + ": frames for agent " + agent +
           " are not strictly increasing");
    }
    it->second.push_back({frame, {x, y}});
  }

  double step = std::numeric_limits<double>::infinity();
  for (const auto& [agent, recs] : tracks) {
    for (std::size_t i = 1; i < recs.size(); ++i) step = std::min(step, recs[i].frame - recs[i - 1].frame);
  }

  const std::string label = path.stem().string();
  std::vector<Trajectory> out;
  for (const auto& agent : order) {
    const auto& recs = tracks[agent];
    Trajectory cur;
    auto flush = [&] {
      if (cur.points.size() >= 2) out.push_back(cur);
      cur.points.clear();
    };
    cur.agent_id = agent;
    cur.dt = dt;
    cur.source_dataset = label;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (i > 0 && recs[i].frame - recs[i - 1].frame > step * (1.0 + 1e-9)) flush();
      cur.points.push_back(recs[i].pos);
    }
    flush();
  }
  return out;
}

Corpus segment(const std::vector<Trajectory>& trajs, std::size_t t_obs, std::size_t t_pred, bool overlap,
               std::size_t stride, std::string name) {
  require(t_obs >= 1 && t_pred >= 1, "segment: t_obs and t_pred must be >= 1");
  require(stride >= 1, "segment: stride must be >= 1");
  Corpus c;
  c.t_obs = t_obs;
  c.t_pred = t_pred;
  c.name = name.empty() && !trajs.empty() ? trajs.front().source_dataset : std::move(name);
  const std::size_t window = t_obs + t_pred + 1;
  const std::size_t advance = overlap ? stride : window;
  for (const auto& t : trajs) {
    for (std::size_t start = 0; start + window <= t.points.size(); start += advance) {
      Trajectory w;
      w.agent_id = t.agent_id;
      w.dt = t.dt;
      w.points.assign(t.points.begin() + static_cast<std::ptrdiff_t>(start),
                      t.points.begin() + static_cast<std::ptrdiff_t>(start + window));
      c.samples.push_back(to_displacements(w, t_obs, t_pred));
    }
  }
  std::ostringstream prov;
  prov << "segment t_obs=" << t_obs << " t_pred=" << t_pred << " overlap=" << overlap
       << " stride=" << advance;
  c.provenance.push_back(prov.str());
  return c;
}

namespace {

void append(Corpus& dst, const Corpus& src, std::size_t i) {
  dst.samples.push_back(src.samples[i]);
  if (src.has_labels()) dst.labels.push_back(src.labels[i]);
}

Corpus empty_like(const Corpus& proto, std::string name) {
  Corpus c;
  c.name = std::move(name);
  c.t_obs = proto.t_obs;
  c.t_pred = proto.t_pred;
  c.provenance = proto.provenance;
  return c;
}

Corpus merge(const std::vector<const Corpus*>& parts, std::string name) {
  Corpus out = empty_like(*parts.front(), std::move(name));
  const bool labeled = std::all_of(parts.begin(), parts.end(), [](const Corpus* c) { return c->has_labels(); });
  for (const Corpus* p : parts) {
    require(p->t_obs == out.t_obs && p->t_pred == out.t_pred, "make_splits: corpora disagree on (t_obs, t_pred)");
    out.samples.insert(out.samples.end(), p->samples.begin(), p->samples.end());
    if (labeled) out.labels.insert(out.labels.end(), p->labels.begin(), p->labels.end());
  }
  return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

Splits make_splits(const std::vector<Corpus>& corpora, const SplitPlan& plan) {
  require(!corpora.empty(), "make_splits: no corpora");
  Splits out;
  if (plan.mode == SplitMode::kLeaveOneDatasetOut) {
    std::vector<const Corpus*> rest;
    const Corpus* held = nullptr;
    for (const auto& c : corpora) {
      if (c.name == plan.held_out) {
        held = &c;
      } else {
        rest.push_back(&c);
      }
    }
    if (held == nullptr) fail(ErrorKind::kConfig, "make_splits: unknown held-out dataset '" + plan.held_out + "'");
    require(!rest.empty(), "make_splits: leave-one-dataset-out needs at least two corpora");
    require(plan.lodo_val_fraction >= 0.0 && plan.lodo_val_fraction < 1.0, "make_splits: bad validation fraction");
    Corpus pool = merge(rest, "pool");
    out.test = *held;
    out.train = empty_like(pool, "train");
    out.val = empty_like(pool, "val");
    const auto idx = shuffled_indices(pool.size(), plan.seed);
    const auto n_val = static_cast<std::size_t>(std::llround(plan.lodo_val_fraction * static_cast<double>(pool.size())));
    for (std::size_t r = 0; r < idx.size(); ++r) append(r < n_val ? out.val : out.train, pool, idx[r]);
    return out;
  }

  const double total = plan.train_fraction + plan.val_fraction + plan.test_fraction;
  require(std::abs(total - 1.0) <= 1e-12, "make_splits: fractions must sum to 1");
  require(plan.train_fraction >= 0 && plan.val_fraction >= 0 && plan.test_fraction >= 0,
          "make_splits: negative fraction");
  std::vector<const Corpus*> all;
  for (const auto& c : corpora) all.push_back(&c);
  Corpus pool = merge(all, "pool");
  out.train = empty_like(pool, "train");
  out.val = empty_like(pool, "val");
  out.test = empty_like(pool, "test");
  const auto n = static_cast<double>(pool.size());
  const auto n_train = static_cast<std::size_t>(std::llround(plan.train_fraction * n));
  const auto n_val = std::min(pool.size() - n_train, static_cast<std::size_t>(std::llround(plan.val_fraction * n)));
  const auto idx = shuffled_indices(pool.size(), plan.seed);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    Corpus& dst = r < n_train ? out.train : (r < n_train + n_val ? out.val : out.test);
    append(dst, pool, idx[r]);
  }
  return out;
}

namespace {

std::vector<Vec2> render_regime(const Regime& g, const ScenarioSpec& spec, std::size_t steps, Rng& rng,
                                std::normal_distribution<double>& gauss) {
  std::uniform_real_distribution<double> uni(-spec.start_extent, spec.start_extent);
  Vec2 p{uni(rng), uni(rng)};
  double heading = g.heading + spec.heading_jitter * gauss(rng);
  const double speed = g.speed * (1.0 + spec.speed_jitter * gauss(rng));
  const std::size_t period = g.go_steps + g.stop_steps;
  const std::size_t phase = period > 0 ? static_cast<std::size_t>(rng() % period) : 0;

  std::vector<Vec2> pts;
  pts.reserve(steps + 1);
  pts.push_back(p);
  for (std::size_t k = 0; k < steps; ++k) {
    if (g.kind == RegimeKind::kArc && k >= g.turn_start) heading += g.turn_rate;
    double v = speed;
    if (g.kind == RegimeKind::kStopAndGo && period > 0 && ((k + phase) % period) >= g.go_steps) v = 0.0;
    Vec2 d{v * std::cos(heading), v * std::sin(heading)};
    if (spec.position_noise > 0.0) {
      d.x += spec.position_noise * gauss(rng);
      d.y += spec.position_noise * gauss(rng);
    }
    p = p + d;
    pts.push_back(p);
  }
  return pts;
}

std::vector<int> draw_regimes(const ScenarioSpec& spec, std::size_t n, Rng& rng) {
  std::vector<double> w;
  for (const auto& g : spec.regimes) w.push_back(g.weight);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::vector<int> out(n);
  for (auto& l : out) l = pick(rng);
  return out;
}

}  // namespace

std::vector<Trajectory> synth_trajectories(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed,
                                           std::vector<int>* labels) {
  require(!spec.regimes.empty() || n == 0, "synth_corpus: scenario has no regimes");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto regime_ids = n > 0 ? draw_regimes(spec, n, rng) : std::vector<int>{};
  std::vector<Trajectory> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Trajectory t;
    t.agent_id = std::to_string(i);
    t.source_dataset = spec.name;
    t.points = render_regime(spec.regimes[static_cast<std::size_t>(regime_ids[i])], spec, spec.t_obs + spec.t_pred,
                             rng, gauss);
    out.push_back(std::move(t));
  }
  if (labels != nullptr) *labels = regime_ids;
  return out;
}

Corpus synth_corpus(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed) {
  Corpus c;
  c.name = spec.name;
  c.t_obs = spec.t_obs;
  c.t_pred = spec.t_pred;
  const auto trajs = synth_trajectories(spec, n, seed, &c.labels);
  c.samples.reserve(n);
  for (const auto& t : trajs) c.samples.push_back(to_displacements(t, spec.t_obs, spec.t_pred));
  c.provenance.push_back("synthetic seed=" + std::to_string(seed) + " n=" + std::to_string(n));
  return c;
}

void write_trajnet(const std::filesystem::path& path, const std::vector<Trajectory>& trajs, int frame_step) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out.precision(17);
  // Agents get disjoint frame ranges so that every track survives a reload
  // intact.
  long frame0 = 0;
  for (std::size_t a = 0; a < trajs.size(); ++a) {
    const auto& t = trajs[a];
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      out << (frame0 + static_cast<long>(i) * frame_step) << ' ' << a << ' ' << t.points[i].x << ' '
          << t.points[i].y << '\n';
    }
    frame0 += static_cast<long>(t.points.size() + 1) * frame_step;
  }
}

}  // namespace trajprop
