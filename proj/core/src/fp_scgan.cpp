#include "trajprop/fp_scgan.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "batching.hpp"
#include "trajprop/error.hpp"
#include "trajprop/nn/losses.hpp"
#include "trajprop/nn/optim.hpp"

namespace trajprop {

void FpScGanConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::kConfig, "fp_scgan config: " + what); };
  if (z_dim < 1 || hidden < 1 || embed_dim < 1 || feature_dim < 1) bad("dimensions must be positive");
  if (epochs < 0 || batch < 1) bad("epochs/batch out of range");
  if (!(lr > 0.0)) bad("lr must be positive");
  if (lambda < 0.0 || lambda > 1.0) bad("lambda must lie in [0, 1]");
}

nlohmann::json FpScGanConfig::to_json() const {
  return {{"z_dim", z_dim},
          {"hidden", hidden},
          {"embed_dim", embed_dim},
          {"feature_dim", feature_dim},
          {"encoder", encoder == EncoderKind::kLstm ? "lstm" : "mlp"},
          {"lambda", lambda},
          {"epochs", epochs},
          {"batch", batch},
          {"lr", lr},
          {"recluster_period", recluster_period},
          {"standardize", standardize},
          {"seed", seed}};
}

FpScGanConfig FpScGanConfig::from_json(const nlohmann::json& j) {
  FpScGanConfig c;
  c.z_dim = j.value("z_dim", c.z_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  const auto enc = j.value("encoder", std::string("lstm"));
  if (enc != "lstm" && enc != "mlp") fail(ErrorKind::kConfig, "fp_scgan config: encoder must be 'lstm' or 'mlp'");
  c.encoder = enc == "lstm" ? EncoderKind::kLstm : EncoderKind::kMlp;
  c.lambda = j.value("lambda", c.lambda);
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.recluster_period = j.value("recluster_period", c.recluster_period);
  c.standardize = j.value("standardize", c.standardize);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

std::vector<int> draw_classes(std::span<const double> weights, std::size_t n, Rng& rng) {
  require(!weights.empty(), "draw_classes: no weights");
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<int> out(n);
  for (auto& c : out) c = pick(rng);
  return out;
}

FpScGan::FpScGan(FpScGanConfig cfg, int k, std::size_t t_obs, std::size_t t_pred)
    : cfg_(std::move(cfg)), k_(k), t_obs_(t_obs), t_pred_(t_pred) {
  cfg_.validate();
  require(k >= 2, "fp_scgan: k must be >= 2");
  require(t_obs >= 1 && t_pred >= 1, "fp_scgan: t_obs and t_pred must be >= 1");
  build();
}

void FpScGan::build() {
  Rng rng(derive_seed(cfg_.seed, "fpscgan/init"));
  const int flat = static_cast<int>(2 * steps());
  g1_ = nn::Dense(gen_, "g.fc1", cfg_.z_dim + k_, cfg_.hidden, rng);
  g2_ = nn::Dense(gen_, "g.fc2", cfg_.hidden, cfg_.hidden, rng);
  g_out_ = nn::Linear(gen_, "g.out", cfg_.hidden, flat, rng);
  if (cfg_.encoder == EncoderKind::kLstm) {
    e_embed_ = nn::Dense(disc_, "d.enc_embed", 2, cfg_.embed_dim, rng);
    e_lstm_ = nn::LstmCell(disc_, "d.enc_lstm", cfg_.embed_dim, cfg_.feature_dim, rng);
  } else {
    e1_ = nn::Dense(disc_, "d.enc_fc1", flat, cfg_.hidden, rng);
    e2_ = nn::Dense(disc_, "d.enc_fc2", cfg_.hidden, cfg_.feature_dim, rng);
  }
  c1_ = nn::Dense(disc_, "d.cls_fc1", cfg_.feature_dim, 32, rng);
  c_out_ = nn::Linear(disc_, "d.cls_out", 32, 1, rng);
}

nn::Var FpScGan::generate(nn::Tape& t, const nn::Matrix& z, const nn::Matrix& onehot) const {
  nn::Matrix in(z.rows(), z.cols() + onehot.cols());
  in << z, onehot;
  return g_out_(t, g2_(t, g1_(t, t.constant(in))));
}

nn::Var FpScGan::encode(nn::Tape& t, nn::Var flat) const {
  if (cfg_.encoder == EncoderKind::kMlp) return e2_(t, e1_(t, flat));
  nn::LstmState s = e_lstm_.zero_state(t, flat.rows());
  for (std::size_t step = 0; step < steps(); ++step) {
    s = e_lstm_.step(t, e_embed_(t, nn::slice_cols(flat, static_cast<Eigen::Index>(2 * step), 2)), s);
  }
  return s.h;
}

nn::Var FpScGan::score(nn::Tape& t, nn::Var flat) const { return c_out_(t, c1_(t, encode(t, flat))); }

void FpScGan::recluster(const PointSet& real_std) {
  nn::Matrix all(static_cast<Eigen::Index>(real_std.size()), static_cast<Eigen::Index>(2 * steps()));
  for (std::size_t i = 0; i < real_std.size(); ++i)
    for (std::size_t j = 0; j < real_std[i].size(); ++j) all(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = real_std[i][j];
  nn::Tape t;
  const nn::Matrix feats = encode(t, t.constant(all)).value();
  PointSet fp(real_std.size(), std::vector<double>(static_cast<std::size_t>(feats.cols())));
  for (std::size_t i = 0; i < fp.size(); ++i)
    for (std::size_t j = 0; j < fp[i].size(); ++j) fp[i][j] = feats(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  KMeansOptions ko;
  ko.seed = derive_seed(cfg_.seed, "fpscgan/recluster", reclusters_);
  const ClusterSpace fresh = kmeans(fp, k_, ko);
  const auto perm = align_labels(space_.assignments, fresh.assignments, k_);

  ClusterSpace next;
  next.k = k_;
  next.metric = Metric::kFeatureL2;
  next.standardizer = st_;
  next.id = space_.id;
  next.centroids.assign(static_cast<std::size_t>(k_), {});
  for (int c = 0; c < k_; ++c) next.centroids[static_cast<std::size_t>(perm[static_cast<std::size_t>(c)])] = fresh.centroids[static_cast<std::size_t>(c)];
  next.assignments.resize(fresh.assignments.size());
  for (std::size_t i = 0; i < fresh.assignments.size(); ++i) next.assignments[i] = perm[static_cast<std::size_t>(fresh.assignments[i])];
  next.objective_history = space_.objective_history;
  next.objective_history.push_back(fresh.objective_history.empty() ? 0.0 : fresh.objective_history.back());
  next.rebuild_index();
  next.validate();
  space_ = std::move(next);
  ++reclusters_;
}

const ClusterSpace& FpScGan::train(const Corpus& corpus) {
  require(corpus.size() >= static_cast<std::size_t>(k_), "train_fp_scgan: fewer samples than clusters");
  require(corpus.t_obs == t_obs_ && corpus.t_pred == t_pred_, "train_fp_scgan: corpus window differs from model");
  st_ = cfg_.standardize ? Standardizer::fit(corpus.samples) : Standardizer{};
  const PointSet real = corpus_points(corpus, st_);

  KMeansOptions ko;
  ko.seed = derive_seed(cfg_.seed, "fpscgan/initial-clustering");
  space_ = kmeans(real, k_, ko);
  space_.standardizer = st_;
  reclusters_ = 0;

  const nn::Matrix cumsum = cumsum_matrix(steps());
  const auto pm = detail::position_map(steps(), st_, cumsum);
  nn::Matrix real_mat(static_cast<Eigen::Index>(real.size()), static_cast<Eigen::Index>(2 * steps()));
  for (std::size_t i = 0; i < real.size(); ++i)
    for (std::size_t j = 0; j < real[i].size(); ++j) real_mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = real[i][j];
  const nn::Matrix real_pos = detail::flat_matrix([&] {
    std::vector<std::vector<Vec2>> raw;
    for (const auto& s : corpus.samples) raw.push_back(s.deltas);
    return raw;
  }(), nullptr) * cumsum;

  nn::Adam g_opt(gen_.all(), {cfg_.lr});
  nn::Adam d_opt(disc_.all(), {cfg_.lr});
  Rng rng(derive_seed(cfg_.seed, "fpscgan/train"));
  const std::size_t bs = static_cast<std::size_t>(cfg_.batch);
  const std::size_t per_epoch = (corpus.size() + bs - 1) / bs;
  const std::size_t period = cfg_.recluster_period > 0 ? cfg_.recluster_period : per_epoch;
  const std::size_t total = per_epoch * static_cast<std::size_t>(cfg_.epochs);
  const double lambda = cfg_.lambda;

  log_ = {};
  double epoch_g = 0.0, epoch_d = 0.0;
  for (std::size_t step = 1; step <= total; ++step) {
    // Conditioning classes follow the current cluster-size distribution; each
    // is paired with a random real member of that class.
    const auto classes = draw_classes(space_.weights, bs, rng);
    nn::Matrix rb(static_cast<Eigen::Index>(bs), real_mat.cols()), rp(static_cast<Eigen::Index>(bs), real_pos.cols());
    for (std::size_t b = 0; b < bs; ++b) {
      const auto& mem = space_.members[static_cast<std::size_t>(classes[b])];
      const std::size_t i = mem[static_cast<std::size_t>(rng() % mem.size())];
      rb.row(static_cast<Eigen::Index>(b)) = real_mat.row(static_cast<Eigen::Index>(i));
      rp.row(static_cast<Eigen::Index>(b)) = real_pos.row(static_cast<Eigen::Index>(i));
    }
    const nn::Matrix oh = detail::onehot(classes, k_);
    const nn::Matrix z = detail::gaussian(static_cast<Eigen::Index>(bs), cfg_.z_dim, rng);

    nn::Matrix fake;
    {
      nn::Tape t;
      fake = generate(t, z, oh).value();
    }
    double real_ls = 0.0;
    {
      nn::Tape t;
      const nn::Var sr = score(t, t.constant(rb));
      const nn::Var sf = score(t, t.constant(fake));
      const nn::Var dl = nn::add(nn::loss_bce(sr, 1.0), nn::loss_bce(sf, 0.0));
      if (!std::isfinite(dl.value()(0, 0))) {
        fail(ErrorKind::kDivergence, "train_fp_scgan: non-finite discriminator loss at step " + std::to_string(step));
      }
      real_ls = nn::loss_ls_real(sr).value()(0, 0);
      epoch_d += dl.value()(0, 0);
      t.backward(dl);
      d_opt.step();
    }
    {
      nn::Tape t;
      const nn::Var gen = generate(t, z, oh);
      const nn::Var mse = nn::loss_mse(detail::to_positions(t, gen, pm), t.constant(rp));
      const nn::Var adv = nn::add_scalar(nn::loss_ls_fake(score(t, gen)), real_ls);
      const nn::Var loss = nn::add(nn::scale(mse, lambda), nn::scale(adv, 1.0 - lambda));
      if (!std::isfinite(loss.value()(0, 0))) {
        fail(ErrorKind::kDivergence, "train_fp_scgan: non-finite generator loss at step " + std::to_string(step));
      }
      epoch_g += loss.value()(0, 0);
      t.backward(loss);
      g_opt.step();
      disc_.zero_grad();
    }
    if (step % per_epoch == 0) {
      log_.loss.push_back(epoch_g / static_cast<double>(per_epoch));
      log_.aux.push_back(epoch_d / static_cast<double>(per_epoch));
      epoch_g = epoch_d = 0.0;
    }
    if (step % period == 0) recluster(real);
  }
  trained_ = true;
  return space_;
}

PointSet FpScGan::embed_batch(const std::vector<DisplacementSeries>& full) const {
  if (full.empty()) return {};
  std::vector<std::vector<Vec2>> rows;
  for (const auto& s : full) {
    if (s.size() != steps()) {
      fail("embed: expected a full series of " + std::to_string(steps()) + " steps, got " + std::to_string(s.size()));
    }
    rows.push_back(s.deltas);
  }
  nn::Tape t;
  const nn::Matrix f = encode(t, t.constant(detail::flat_matrix(rows, &st_))).value();
  PointSet out(full.size(), std::vector<double>(static_cast<std::size_t>(f.cols())));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] = f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

std::vector<double> FpScGan::embed(const DisplacementSeries& full) const { return embed_batch({full}).front(); }

std::vector<DisplacementSeries> FpScGan::sample_displacements(int c, std::size_t n, std::uint64_t seed) const {
  if (!trained_) fail("sample_displacements: generator is not trained");
  if (c < 0 || c >= k_) fail("sample_displacements: cluster id " + std::to_string(c) + " out of range");
  if (n == 0) return {};
  Rng rng(seed);
  const nn::Matrix z = detail::gaussian(static_cast<Eigen::Index>(n), cfg_.z_dim, rng);
  const nn::Matrix oh = detail::onehot(std::vector<int>(n, c), k_);
  nn::Tape t;
  const nn::Matrix out = generate(t, z, oh).value();
  std::vector<DisplacementSeries> res;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    DisplacementSeries s;
    s.t_obs = t_obs_;
    s.t_pred = t_pred_;
    s.deltas = detail::row_to_series(out, r, st_);
    res.push_back(std::move(s));
  }
  return res;
}

nlohmann::json FpScGan::to_json() const {
  return {{"format", "trajprop.fp_scgan"},
          {"version", 1},
          {"config", cfg_.to_json()},
          {"k", k_},
          {"t_obs", t_obs_},
          {"t_pred", t_pred_},
          {"trained", trained_},
          {"reclusters", reclusters_},
          {"standardization", {st_.mean_x, st_.mean_y, st_.std_x, st_.std_y}},
          {"feature_space", space_.to_json()},
          {"generator", gen_.to_json()},
          {"discriminator", disc_.to_json()}};
}

FpScGan FpScGan::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.fp_scgan" || j.value("version", 0) != 1) {
    fail(ErrorKind::kConfig, "not a version-1 FP SC-GAN document");
  }
  FpScGan m(FpScGanConfig::from_json(j.at("config")), j.at("k").get<int>(), j.at("t_obs").get<std::size_t>(),
            j.at("t_pred").get<std::size_t>());
  const auto st = j.at("standardization").get<std::vector<double>>();
  m.st_ = {st.at(0), st.at(1), st.at(2), st.at(3)};
  m.space_ = ClusterSpace::from_json(j.at("feature_space"));
  m.gen_.load_json(j.at("generator"));
  m.disc_.load_json(j.at("discriminator"));
  m.trained_ = j.value("trained", false);
  m.reclusters_ = j.value("reclusters", std::size_t{0});
  return m;
}

}  // namespace trajprop
