#include "trajprop/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "trajprop/error.hpp"

namespace trajprop {

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorKind::kConfig, "config: " + what); }

nlohmann::json split_json(const SplitPlan& p) {
  return {{"mode", p.mode == SplitMode::kTrainTestSplit ? "train-test" : "leave-one-dataset-out"},
          {"held_out", p.held_out},
          {"fractions", {p.train_fraction, p.val_fraction, p.test_fraction}},
          {"lodo_val_fraction", p.lodo_val_fraction}};
}

SplitPlan split_from(const nlohmann::json& j) {
  SplitPlan p;
  const auto mode = j.value("mode", std::string("train-test"));
  if (mode == "train-test") {
    p.mode = SplitMode::kTrainTestSplit;
  } else if (mode == "leave-one-dataset-out") {
    p.mode = SplitMode::kLeaveOneDatasetOut;
  } else {
    bad("split.mode must be 'train-test' or 'leave-one-dataset-out'");
  }
  p.held_out = j.value("held_out", std::string());
  if (j.contains("fractions")) {
    const auto f = j.at("fractions").get<std::vector<double>>();
    if (f.size() != 3) bad("split.fractions needs three values");
    p.train_fraction = f[0];
    p.val_fraction = f[1];
    p.test_fraction = f[2];
  }
  p.lodo_val_fraction = j.value("lodo_val_fraction", p.lodo_val_fraction);
  return p;
}

std::string hash_of(const nlohmann::json& j) { return hex64(fnv1a(j.dump())); }

}  // namespace

void ExperimentConfig::validate(bool check_files) const {
  if (schema_version != kSchemaVersion) {
    bad("schema_version " + std::to_string(schema_version) + " unsupported (expected " +
        std::to_string(kSchemaVersion) + ")");
  }
  if (t_obs < 1 || t_pred < 1) bad("t_obs and t_pred must be >= 1");
  if (data.source == "synthetic") {
    scenario_preset(data.scenario, t_obs, t_pred);
    if (data.n < 10) bad("data.n must be >= 10");
  } else if (data.source == "trajnet") {
    if (data.files.empty()) bad("data.files is empty");
    if (check_files) {
      for (const auto& f : data.files) {
        if (!std::filesystem::exists(f)) bad("data file '" + f + "' does not exist");
      }
    }
    if (data.split.mode == SplitMode::kLeaveOneDatasetOut && data.split.held_out.empty()) {
      bad("leave-one-dataset-out needs split.held_out");
    }
  } else {
    bad("data.source must be 'synthetic' or 'trajnet'");
  }
  if (!(data.dt > 0.0)) bad("data.dt must be positive");
  if (data.stride < 1) bad("data.stride must be >= 1");
  const double total = data.split.train_fraction + data.split.val_fraction + data.split.test_fraction;
  if (std::abs(total - 1.0) > 1e-12) bad("split fractions must sum to 1");

  const auto& c = clustering;
  if (c.method != "kmeans" && c.method != "ts-kmeans" && c.method != "fp-scgan") {
    bad("clustering.method must be kmeans, ts-kmeans or fp-scgan");
  }
  if (c.k_grid.empty()) bad("clustering.k_grid is empty");
  for (int k : c.k_grid) {
    if (k < 2) bad("clustering.k_grid entries must be >= 2");
  }
  if (c.method == "fp-scgan" && c.k_grid.size() != 1) bad("fp-scgan needs a single k");
  if (!(c.gamma > 0.0)) bad("clustering.gamma must be positive");
  if (c.runs < 1) bad("clustering.runs must be >= 1");
  c.fp_scgan.validate();

  forecaster.validate();
  if (forecaster.t_obs != t_obs || forecaster.t_pred != t_pred) bad("forecaster window differs from t_obs/t_pred");
  ranking.validate();
  if (evaluation.runs < 1) bad("evaluation.runs must be >= 1");
  if (evaluation.top_k < 1) bad("evaluation.top_k must be >= 1");
  if (evaluation.n_z < 1) bad("evaluation.n_z must be >= 1");
  if (output_dir.empty()) bad("output_dir is empty");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"schema_version", schema_version},
          {"seed", seed},
          {"t_obs", t_obs},
          {"t_pred", t_pred},
          {"data",
           {{"source", data.source},
            {"scenario", data.scenario},
            {"n", data.n},
            {"files", data.files},
            {"dt", data.dt},
            {"overlap", data.overlap},
            {"stride", data.stride},
            {"split", split_json(data.split)}}},
          {"clustering",
           {{"method", clustering.method},
            {"k_grid", clustering.k_grid},
            {"gamma", clustering.gamma},
            {"runs", clustering.runs},
            {"standardize", clustering.standardize},
            {"fp_scgan", clustering.fp_scgan.to_json()}}},
          {"forecaster", forecaster.to_json()},
          {"ranking", ranking.to_json()},
          {"evaluation",
           {{"runs", evaluation.runs},
            {"top_k", evaluation.top_k},
            {"n_z", evaluation.n_z},
            {"plots", evaluation.plots}}},
          {"output_dir", output_dir}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    c.seed = j.value("seed", c.seed);
    c.t_obs = j.value("t_obs", c.t_obs);
    c.t_pred = j.value("t_pred", c.t_pred);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      c.data.source = d.value("source", c.data.source);
      c.data.scenario = d.value("scenario", c.data.scenario);
      c.data.n = d.value("n", c.data.n);
      c.data.files = d.value("files", c.data.files);
      c.data.dt = d.value("dt", c.data.dt);
      c.data.overlap = d.value("overlap", c.data.overlap);
      c.data.stride = d.value("stride", c.data.stride);
      if (d.contains("split")) c.data.split = split_from(d.at("split"));
    }
    if (j.contains("clustering")) {
      const auto& k = j.at("clustering");
      c.clustering.method = k.value("method", c.clustering.method);
      if (k.contains("k")) {
        c.clustering.k_grid = {k.at("k").get<int>()};
      } else {
        c.clustering.k_grid = k.value("k_grid", c.clustering.k_grid);
      }
      c.clustering.gamma = k.value("gamma", c.clustering.gamma);
      c.clustering.runs = k.value("runs", c.clustering.runs);
      c.clustering.standardize = k.value("standardize", c.clustering.standardize);
      if (k.contains("fp_scgan")) c.clustering.fp_scgan = FpScGanConfig::from_json(k.at("fp_scgan"));
    }
    nlohmann::json f = j.value("forecaster", nlohmann::json::object());
    f["t_obs"] = c.t_obs;
    f["t_pred"] = c.t_pred;
    c.forecaster = ForecasterConfig::from_json(f);
    if (j.contains("ranking")) c.ranking = RankerConfig::from_json(j.at("ranking"));
    if (j.contains("evaluation")) {
      const auto& e = j.at("evaluation");
      c.evaluation.runs = e.value("runs", c.evaluation.runs);
      c.evaluation.top_k = e.value("top_k", c.evaluation.top_k);
      c.evaluation.n_z = e.value("n_z", c.evaluation.n_z);
      c.evaluation.plots = e.value("plots", c.evaluation.plots);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    return c;
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
  auto cfg = ExperimentConfig::from_json(j);
  cfg.validate();
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) { return hash_of(cfg.to_json()); }

std::string stage_hash(const ExperimentConfig& cfg, const std::string& stage) {
  const auto full = cfg.to_json();
  nlohmann::json j = {{"schema_version", full["schema_version"]},
                      {"seed", full["seed"]},
                      {"t_obs", full["t_obs"]},
                      {"t_pred", full["t_pred"]},
                      {"data", full["data"]}};
  if (stage == "data") return hash_of(j);
  j["clustering"] = full["clustering"];
  if (stage == "cluster") return hash_of(j);
  j["forecaster"] = full["forecaster"];
  if (stage == "model") return hash_of(j);
  j["ranking"] = full["ranking"];
  if (stage == "rank") return hash_of(j);
  fail("stage_hash: unknown stage '" + stage + "'");
}

ScenarioSpec scenario_preset(const std::string& name, std::size_t t_obs, std::size_t t_pred) {
  using std::numbers::pi;
  ScenarioSpec s;
  s.name = name;
  s.t_obs = t_obs;
  s.t_pred = t_pred;
  if (name == "constant-velocity") {
    // Exactly linear motion: any averaging of past displacements is exact.
    s.regimes = {{RegimeKind::kStraight, 0.5, 0.3}};
  } else if (name == "two-regime") {
    s.regimes = {{RegimeKind::kStraight, 0.5, 0.0}, {RegimeKind::kStraight, 0.5, pi / 2}};
    s.position_noise = 0.02;
    s.speed_jitter = 0.05;
    s.heading_jitter = 0.05;
  } else if (name == "three-regime") {
    // Shared heading; the turn starts inside the observation window so the
    // mode is visible before it fully develops.
    const std::size_t onset = t_obs > 5 ? t_obs - 5 : 0;
    s.regimes = {{RegimeKind::kStraight, 0.5, 0.0},
                 {RegimeKind::kArc, 0.5, 0.0, 0.15, onset},
                 {RegimeKind::kArc, 0.5, 0.0, -0.15, onset}};
    s.position_noise = 0.01;
    s.speed_jitter = 0.05;
    s.heading_jitter = 0.05;
  } else {
    bad("unknown synthetic scenario '" + name + "'");
  }
  return s;
}

}  // namespace trajprop
