#include "trajprop/forecasters.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "batching.hpp"
#include "trajprop/error.hpp"
#include "trajprop/nn/losses.hpp"
#include "trajprop/nn/optim.hpp"

namespace trajprop {

std::string to_string(ForecasterKind k) {
  switch (k) {
    case ForecasterKind::kCvm:
      return "cvm";
    case ForecasterKind::kRed:
      return "red";
    case ForecasterKind::kCfGan:
      return "cf-gan";
    case ForecasterKind::kCfVae:
      return "cf-vae";
    case ForecasterKind::kGanOurs:
      return "gan-ours";
    case ForecasterKind::kVaeOurs:
      return "vae-ours";
  }
  return "unknown";
}

ForecasterKind forecaster_kind_from_string(const std::string& s) {
  for (auto k : {ForecasterKind::kCvm, ForecasterKind::kRed, ForecasterKind::kCfGan, ForecasterKind::kCfVae,
                 ForecasterKind::kGanOurs, ForecasterKind::kVaeOurs}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorKind::kConfig, "unknown forecaster kind '" + s + "'");
}

bool is_generative(ForecasterKind k) { return k != ForecasterKind::kCvm && k != ForecasterKind::kRed; }
bool is_conditioned(ForecasterKind k) { return k == ForecasterKind::kGanOurs || k == ForecasterKind::kVaeOurs; }
bool is_vae(ForecasterKind k) { return k == ForecasterKind::kCfVae || k == ForecasterKind::kVaeOurs; }

void ForecasterConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::kConfig, "forecaster config: " + what); };
  if (embed_dim < 1 || lstm_dim < 1 || decode_dim < 1 || red_hidden2 < 1) bad("dimensions must be positive");
  if (t_obs < 1 || t_pred < 1) bad("t_obs and t_pred must be positive");
  if (z_dim < 1 || k_variety < 1 || epochs < 0 || batch < 1) bad("counts must be positive");
  if (!(lr > 0.0)) bad("lr must be positive");
  if (lambda < 0.0 || lambda > 1.0) bad("lambda must lie in [0, 1]");
  if (beta < 0.0) bad("beta must be non-negative");
}

nlohmann::json ForecasterConfig::to_json() const {
  return {{"kind", to_string(kind)},   {"embed_dim", embed_dim}, {"lstm_dim", lstm_dim},
          {"decode_dim", decode_dim},  {"red_hidden2", red_hidden2}, {"t_obs", t_obs},
          {"t_pred", t_pred},          {"lambda", lambda},       {"beta", beta},
          {"z_dim", z_dim},            {"k_variety", k_variety}, {"epochs", epochs},
          {"batch", batch},            {"lr", lr},               {"seed", seed},
          {"cvm_sigma", cvm_sigma},    {"standardize", standardize}};
}

ForecasterConfig ForecasterConfig::from_json(const nlohmann::json& j) {
  ForecasterConfig c;
  c.kind = forecaster_kind_from_string(j.value("kind", to_string(c.kind)));
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.lstm_dim = j.value("lstm_dim", c.lstm_dim);
  c.decode_dim = j.value("decode_dim", c.decode_dim);
  c.red_hidden2 = j.value("red_hidden2", c.red_hidden2);
  c.t_obs = j.value("t_obs", c.t_obs);
  c.t_pred = j.value("t_pred", c.t_pred);
  c.lambda = j.value("lambda", c.lambda);
  c.beta = j.value("beta", c.beta);
  c.z_dim = j.value("z_dim", c.z_dim);
  c.k_variety = j.value("k_variety", c.k_variety);
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.seed = j.value("seed", c.seed);
  c.cvm_sigma = j.value("cvm_sigma", c.cvm_sigma);
  c.standardize = j.value("standardize", c.standardize);
  c.validate();
  return c;
}

void ProposalSet::validate(bool conditioned) const {
  if (conditioned) {
    std::set<int> ids;
    for (const auto& p : proposals) ids.insert(p.cluster);
    require(ids.size() == proposals.size(), "proposal set: duplicate cluster id");
    for (int c = 0; c < static_cast<int>(proposals.size()); ++c) {
      require(ids.count(c) == 1, "proposal set: missing cluster " + std::to_string(c));
    }
  }
  if (!probabilities.empty()) {
    require(probabilities.size() == proposals.size(), "proposal set: probability count differs from proposals");
    double s = 0.0;
    for (double p : probabilities) {
      require(p >= 0.0 && std::isfinite(p), "proposal set: invalid probability");
      s += p;
    }
    require(std::abs(s - 1.0) <= 1e-9, "proposal set: probabilities do not sum to 1");
  }
}

nn::Matrix cumsum_matrix(std::size_t steps) {
  const auto n = static_cast<Eigen::Index>(2 * steps);
  nn::Matrix c = nn::Matrix::Zero(n, n);
  // position column j accumulates delta rows i <= j of the same axis
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; j += 2) c(i, j) = 1.0;
  return c;
}

std::vector<Vec2> cvm_predict(const DisplacementSeries& obs, std::size_t t_pred, double sigma) {
  const std::size_t n = obs.t_obs > 0 ? std::min(obs.t_obs, obs.size()) : obs.size();
  require(n >= 1, "cvm_predict: observation needs at least one displacement");
  Vec2 v;
  if (sigma <= 0.0) {
    v = obs.deltas[n - 1];
  } else {
    double wsum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double lag = static_cast<double>(n - 1 - t);
      const double w = std::exp(-lag * lag / (2.0 * sigma * sigma));
      v = v + w * obs.deltas[t];
      wsum += w;
    }
    v = (1.0 / wsum) * v;
  }
  return std::vector<Vec2>(t_pred, v);
}

// ---------------------------------------------------------------------------
// RED

RedForecaster::RedForecaster(ForecasterConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  build();
}

void RedForecaster::build() {
  Rng rng(derive_seed(cfg_.seed, "red/init"));
  embed_ = nn::Dense(params_, "red.embed", 2, cfg_.embed_dim, rng);
  lstm_ = nn::LstmCell(params_, "red.lstm", cfg_.embed_dim, cfg_.lstm_dim, rng);
  h1_ = nn::Dense(params_, "red.mlp1", cfg_.lstm_dim, cfg_.decode_dim, rng);
  h2_ = nn::Dense(params_, "red.mlp2", cfg_.decode_dim, cfg_.red_hidden2, rng);
  out_ = nn::Linear(params_, "red.out", cfg_.red_hidden2, static_cast<int>(2 * cfg_.t_pred), rng);
}

namespace {

nn::Var red_forward(nn::Tape& t, const std::vector<nn::Matrix>& steps, const nn::Dense& embed,
                    const nn::LstmCell& lstm, const nn::Dense& h1, const nn::Dense& h2, const nn::Linear& out) {
  nn::LstmState s = lstm.zero_state(t, steps.front().rows());
  for (const auto& m : steps) s = lstm.step(t, embed(t, t.constant(m)), s);
  return out(t, h2(t, h1(t, s.h)));
}

}  // namespace

TrainLog RedForecaster::train(const Corpus& corpus) {
  require(!corpus.samples.empty(), "red_train: empty corpus");
  require(corpus.t_obs == cfg_.t_obs && corpus.t_pred == cfg_.t_pred, "red_train: corpus window differs from config");
  st_ = cfg_.standardize ? Standardizer::fit(corpus.samples) : Standardizer{};
  const auto pm = detail::position_map(cfg_.t_pred, st_, cumsum_matrix(cfg_.t_pred));
  const nn::Matrix raw_cumsum = cumsum_matrix(cfg_.t_pred);

  std::vector<std::vector<Vec2>> obs, fut;
  for (const auto& s : corpus.samples) {
    obs.push_back(observed_part(s).deltas);
    fut.push_back(future_deltas(s));
  }
  nn::Adam opt(params_.all(), {cfg_.lr});
  Rng rng(derive_seed(cfg_.seed, "red/train"));
  TrainLog log;
  const std::size_t n = corpus.size(), bs = static_cast<std::size_t>(cfg_.batch);
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    const auto perm = detail::permutation(n, rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t at = 0; at < n; at += bs) {
      std::vector<std::vector<Vec2>> bo, bf;
      for (std::size_t i = at; i < std::min(n, at + bs); ++i) {
        bo.push_back(obs[perm[i]]);
        bf.push_back(fut[perm[i]]);
      }
      std::vector<nn::Matrix> steps;
      for (std::size_t t = 0; t < cfg_.t_obs; ++t) steps.push_back(detail::step_matrix(bo, t, st_));
      nn::Tape tape;
      const nn::Var pred = red_forward(tape, steps, embed_, lstm_, h1_, h2_, out_);
      const nn::Var target = tape.constant(detail::flat_matrix(bf, nullptr) * raw_cumsum);
      const nn::Var loss = nn::loss_mse(detail::to_positions(tape, pred, pm), target);
      const double lv = loss.value()(0, 0);
      if (!std::isfinite(lv)) fail(ErrorKind::kDivergence, "red_train: non-finite loss at epoch " + std::to_string(epoch));
      tape.backward(loss);
      opt.step();
      total += lv;
      ++batches;
    }
    log.loss.push_back(total / static_cast<double>(batches));
  }
  trained_ = true;
  return log;
}

std::vector<std::vector<Vec2>> RedForecaster::predict_batch(const std::vector<DisplacementSeries>& obs) const {
  if (!trained_) fail("red_predict: model is not trained");
  if (obs.empty()) return {};
  std::vector<std::vector<Vec2>> bo;
  for (const auto& o : obs) {
    require(o.t_obs == cfg_.t_obs && o.size() >= cfg_.t_obs, "red_predict: observation length differs from t_obs");
    bo.push_back({o.deltas.begin(), o.deltas.begin() + static_cast<std::ptrdiff_t>(cfg_.t_obs)});
  }
  std::vector<nn::Matrix> steps;
  for (std::size_t t = 0; t < cfg_.t_obs; ++t) steps.push_back(detail::step_matrix(bo, t, st_));
  nn::Tape tape;
  const nn::Matrix out = red_forward(tape, steps, embed_, lstm_, h1_, h2_, out_).value();
  std::vector<std::vector<Vec2>> res;
  for (Eigen::Index r = 0; r < out.rows(); ++r) res.push_back(detail::row_to_series(out, r, st_));
  return res;
}

std::vector<Vec2> RedForecaster::predict(const DisplacementSeries& obs) const { return predict_batch({obs}).front(); }

nlohmann::json RedForecaster::to_json() const {
  return {{"format", "trajprop.forecaster"},
          {"version", 1},
          {"kind", "red"},
          {"config", cfg_.to_json()},
          {"trained", trained_},
          {"standardization", {st_.mean_x, st_.mean_y, st_.std_x, st_.std_y}},
          {"params", params_.to_json()}};
}

RedForecaster RedForecaster::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.forecaster" || j.value("kind", "") != "red") {
    fail(ErrorKind::kConfig, "not a RED model document");
  }
  RedForecaster m(ForecasterConfig::from_json(j.at("config")));
  const auto st = j.at("standardization").get<std::vector<double>>();
  m.st_ = {st.at(0), st.at(1), st.at(2), st.at(3)};
  m.params_.load_json(j.at("params"));
  m.trained_ = j.value("trained", false);
  return m;
}

}  // namespace trajprop
