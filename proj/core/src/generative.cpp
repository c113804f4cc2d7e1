#include <cmath>

#include <nlohmann/json.hpp>

#include "batching.hpp"
#include "trajprop/error.hpp"
#include "trajprop/forecasters.hpp"
#include "trajprop/nn/losses.hpp"
#include "trajprop/nn/optim.hpp"

namespace trajprop {

struct GenerativeForecaster::Batch {
  Eigen::Index size = 0;
  std::vector<nn::Matrix> obs_steps;
  nn::Matrix last_obs;
  nn::Matrix onehot;
  std::vector<nn::Matrix> fut_steps;
  nn::Matrix fut_flat;  // standardized
  nn::Matrix fut_pos;   // meters, relative to the last observed position
};

GenerativeForecaster::GenerativeForecaster(ForecasterConfig cfg, int num_classes) : cfg_(std::move(cfg)) {
  cfg_.validate();
  require(is_generative(cfg_.kind), "generative forecaster: kind '" + to_string(cfg_.kind) + "' is not generative");
  if (is_conditioned(cfg_.kind)) {
    require(num_classes >= 1, "generative forecaster: conditioned kinds need num_classes >= 1");
    k_ = num_classes;
  }
  build();
}

void GenerativeForecaster::build() {
  Rng rng(derive_seed(cfg_.seed, "generative/init"));
  const int e = cfg_.embed_dim, h = cfg_.lstm_dim, d = cfg_.decode_dim;
  enc_embed_ = nn::Dense(gen_, "g.enc_embed", 2, e, rng);
  enc_lstm_ = nn::LstmCell(gen_, "g.enc_lstm", e + k_, h, rng);
  join_ = nn::Dense(gen_, "g.join", h + cfg_.z_dim, h, rng);
  dec_embed_ = nn::Dense(gen_, "g.dec_embed", 2, e, rng);
  dec_lstm_ = nn::LstmCell(gen_, "g.dec_lstm", e + k_, h, rng);
  dec_head_ = nn::Dense(gen_, "g.dec_head", h, d, rng);
  dec_out_ = nn::Linear(gen_, "g.dec_out", d, 2, rng);
  if (is_vae(cfg_.kind)) {
    rec_embed_ = nn::Dense(gen_, "q.embed", 2, e, rng);
    rec_lstm_ = nn::LstmCell(gen_, "q.lstm", e + k_, h, rng);
    rec_mu_ = nn::Linear(gen_, "q.mu", h, cfg_.z_dim, rng);
    rec_logvar_ = nn::Linear(gen_, "q.logvar", h, cfg_.z_dim, rng);
  } else {
    d_embed_ = nn::Dense(disc_, "d.embed", 2, e, rng);
    d_lstm_ = nn::LstmCell(disc_, "d.lstm", e + k_, h, rng);
    d_head_ = nn::Dense(disc_, "d.head", h, d, rng);
    d_out_ = nn::Linear(disc_, "d.out", d, 1, rng);
  }
}

GenerativeForecaster::Batch GenerativeForecaster::make_batch(const std::vector<DisplacementSeries>& obs,
                                                             const std::vector<std::vector<Vec2>>* future,
                                                             const std::vector<int>& classes) const {
  Batch b;
  b.size = static_cast<Eigen::Index>(obs.size());
  std::vector<std::vector<Vec2>> o;
  for (const auto& s : obs) {
    require(s.t_obs == cfg_.t_obs && s.size() >= cfg_.t_obs, "generative forecaster: observation length differs from t_obs");
    o.push_back({s.deltas.begin(), s.deltas.begin() + static_cast<std::ptrdiff_t>(cfg_.t_obs)});
  }
  for (std::size_t t = 0; t < cfg_.t_obs; ++t) b.obs_steps.push_back(detail::step_matrix(o, t, st_));
  b.last_obs = b.obs_steps.back();
  if (k_ > 0) {
    for (int c : classes) {
      if (c < 0 || c >= k_) fail("generative forecaster: cluster id " + std::to_string(c) + " outside [0, " + std::to_string(k_) + ")");
    }
    b.onehot = detail::onehot(classes, k_);
  }
  if (future != nullptr) {
    for (std::size_t t = 0; t < cfg_.t_pred; ++t) b.fut_steps.push_back(detail::step_matrix(*future, t, st_));
    b.fut_flat = detail::flat_matrix(*future, &st_);
    b.fut_pos = detail::flat_matrix(*future, nullptr) * cumsum_matrix(cfg_.t_pred);
  }
  return b;
}

nn::Var GenerativeForecaster::encode_decode(nn::Tape& t, const Batch& b, nn::Var z) const {
  const bool cond = k_ > 0;
  const nn::Var oh = cond ? t.constant(b.onehot) : nn::Var{};
  auto with_class = [&](nn::Var x) { return cond ? nn::concat_cols({x, oh}) : x; };

  nn::LstmState s = enc_lstm_.zero_state(t, b.size);
  for (const auto& m : b.obs_steps) s = enc_lstm_.step(t, with_class(enc_embed_(t, t.constant(m))), s);

  nn::LstmState d{join_(t, nn::concat_cols({s.h, z})), s.c};
  nn::Var prev = t.constant(b.last_obs);
  std::vector<nn::Var> outs;
  outs.reserve(cfg_.t_pred);
  for (std::size_t step = 0; step < cfg_.t_pred; ++step) {
    d = dec_lstm_.step(t, with_class(dec_embed_(t, prev)), d);
    prev = dec_out_(t, dec_head_(t, d.h));
    outs.push_back(prev);
  }
  return nn::concat_cols(outs);
}

nn::Var GenerativeForecaster::discriminate(nn::Tape& t, nn::Var future_flat, const nn::Matrix& onehot) const {
  const bool cond = k_ > 0;
  const nn::Var oh = cond ? t.constant(onehot) : nn::Var{};
  nn::LstmState s = d_lstm_.zero_state(t, future_flat.rows());
  for (std::size_t step = 0; step < cfg_.t_pred; ++step) {
    nn::Var x = d_embed_(t, nn::slice_cols(future_flat, static_cast<Eigen::Index>(2 * step), 2));
    if (cond) x = nn::concat_cols({x, oh});
    s = d_lstm_.step(t, x, s);
  }
  return d_out_(t, d_head_(t, s.h));
}

void GenerativeForecaster::recognise(nn::Tape& t, const Batch& b, nn::Var* mu, nn::Var* logvar) const {
  const bool cond = k_ > 0;
  const nn::Var oh = cond ? t.constant(b.onehot) : nn::Var{};
  nn::LstmState s = rec_lstm_.zero_state(t, b.size);
  for (const auto& m : b.fut_steps) {
    nn::Var x = rec_embed_(t, t.constant(m));
    if (cond) x = nn::concat_cols({x, oh});
    s = rec_lstm_.step(t, x, s);
  }
  *mu = rec_mu_(t, s.h);
  *logvar = rec_logvar_(t, s.h);
}

TrainLog GenerativeForecaster::train(const Corpus& corpus, const ClusterSpace* space) {
  require(!corpus.samples.empty(), "generative train: empty corpus");
  require(corpus.t_obs == cfg_.t_obs && corpus.t_pred == cfg_.t_pred,
          "generative train: corpus window differs from config");
  std::vector<int> classes(corpus.size(), 0);
  if (k_ > 0) {
    require(space != nullptr, "generative train: conditioned model needs a cluster space");
    require(space->k == k_, "generative train: cluster space has k = " + std::to_string(space->k) + ", model expects " +
                                std::to_string(k_));
    require(space->assignments.size() == corpus.size(), "generative train: cluster assignments do not cover the corpus");
    classes = space->assignments;
    space_id_ = space->id;
  }
  st_ = cfg_.standardize ? Standardizer::fit(corpus.samples) : Standardizer{};
  const auto pm = detail::position_map(cfg_.t_pred, st_, cumsum_matrix(cfg_.t_pred));

  std::vector<DisplacementSeries> obs;
  std::vector<std::vector<Vec2>> fut;
  for (const auto& s : corpus.samples) {
    obs.push_back(observed_part(s));
    fut.push_back(future_deltas(s));
  }

  const bool vae = is_vae(cfg_.kind);
  const bool variety = !is_conditioned(cfg_.kind);
  const int draws = variety ? cfg_.k_variety : 1;
  const double lambda = cfg_.lambda;

  nn::Adam gen_opt(gen_.all(), {cfg_.lr});
  std::unique_ptr<nn::Adam> disc_opt;
  if (!vae) disc_opt = std::make_unique<nn::Adam>(disc_.all(), nn::AdamOptions{cfg_.lr});

  Rng rng(derive_seed(cfg_.seed, "generative/train"));
  TrainLog log;
  const std::size_t n = corpus.size(), bs = static_cast<std::size_t>(cfg_.batch);
  auto check = [](double v, const char* what, int epoch) {
    if (!std::isfinite(v)) {
      fail(ErrorKind::kDivergence, std::string("generative train: non-finite ") + what + " at epoch " + std::to_string(epoch));
    }
  };

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    const auto perm = detail::permutation(n, rng);
    double total = 0.0, aux_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t at = 0; at < n; at += bs) {
      std::vector<DisplacementSeries> bo;
      std::vector<std::vector<Vec2>> bf;
      std::vector<int> bc;
      for (std::size_t i = at; i < std::min(n, at + bs); ++i) {
        bo.push_back(obs[perm[i]]);
        bf.push_back(fut[perm[i]]);
        bc.push_back(classes[perm[i]]);
      }
      const Batch b = make_batch(bo, &bf, bc);

      if (!vae) {
        // Discriminator: BCE, real futures vs generated futures.
        nn::Matrix fake;
        {
          nn::Tape t;
          fake = encode_decode(t, b, t.constant(detail::gaussian(b.size, cfg_.z_dim, rng))).value();
        }
        double real_ls = 0.0;
        {
          nn::Tape t;
          const nn::Var sr = discriminate(t, t.constant(b.fut_flat), b.onehot);
          const nn::Var sf = discriminate(t, t.constant(fake), b.onehot);
          const nn::Var dl = nn::add(nn::loss_bce(sr, 1.0), nn::loss_bce(sf, 0.0));
          check(dl.value()(0, 0), "discriminator loss", epoch);
          aux_total += dl.value()(0, 0);
          real_ls = nn::loss_ls_real(sr).value()(0, 0);
          t.backward(dl);
          disc_opt->step();
        }
        // Generator: lambda * reconstruction + (1 - lambda) * least-squares terms.
        nn::Tape t;
        const nn::Var target = t.constant(b.fut_pos);
        std::vector<nn::Var> positions;
        nn::Var adv_fake;
        for (int j = 0; j < draws; ++j) {
          const nn::Var pred = encode_decode(t, b, t.constant(detail::gaussian(b.size, cfg_.z_dim, rng)));
          positions.push_back(detail::to_positions(t, pred, pm));
          const nn::Var lf = nn::loss_ls_fake(discriminate(t, pred, b.onehot));
          adv_fake = j == 0 ? lf : nn::add(adv_fake, lf);
        }
        adv_fake = nn::scale(adv_fake, 1.0 / draws);
        const nn::Var rec = variety ? nn::loss_k_variety(positions, target) : nn::loss_mse(positions.front(), target);
        nn::Var adv = nn::add_scalar(adv_fake, real_ls);
        const nn::Var loss = nn::add(nn::scale(rec, lambda), nn::scale(adv, 1.0 - lambda));
        check(loss.value()(0, 0), "generator loss", epoch);
        total += loss.value()(0, 0);
        t.backward(loss);
        gen_opt.step();
        disc_.zero_grad();
      } else {
        nn::Tape t;
        nn::Var mu, logvar;
        recognise(t, b, &mu, &logvar);
        const nn::Var std_dev = nn::exp(nn::scale(logvar, 0.5));
        const nn::Var target = t.constant(b.fut_pos);
        std::vector<nn::Var> positions;
        for (int j = 0; j < draws; ++j) {
          const nn::Var z = nn::add(mu, nn::mul(std_dev, t.constant(detail::gaussian(b.size, cfg_.z_dim, rng))));
          positions.push_back(detail::to_positions(t, encode_decode(t, b, z), pm));
        }
        const nn::Var rec = variety ? nn::loss_k_variety(positions, target) : nn::loss_mse(positions.front(), target);
        const nn::Var kl = nn::loss_kl_gaussian(mu, logvar);
        // The KL term is added as a penalty (ELBO convention).
        const nn::Var loss = nn::add(nn::scale(rec, lambda), nn::scale(kl, (1.0 - lambda) * cfg_.beta));
        check(loss.value()(0, 0), "VAE loss", epoch);
        total += loss.value()(0, 0);
        aux_total += kl.value()(0, 0);
        t.backward(loss);
        gen_opt.step();
      }
      ++batches;
    }
    log.loss.push_back(total / static_cast<double>(batches));
    log.aux.push_back(aux_total / static_cast<double>(batches));
  }
  trained_ = true;
  return log;
}

std::vector<std::vector<Vec2>> GenerativeForecaster::generate(const std::vector<DisplacementSeries>& obs,
                                                              const std::vector<int>& classes,
                                                              const nn::Matrix& z) const {
  if (!trained_) fail("generative forecaster: model is not trained");
  if (obs.empty()) return {};
  require(z.rows() == static_cast<Eigen::Index>(obs.size()) && z.cols() == cfg_.z_dim,
          "generative forecaster: noise matrix must be rows x z_dim");
  require(k_ == 0 || classes.size() == obs.size(), "generative forecaster: one class per row required");
  const Batch b = make_batch(obs, nullptr, classes);
  nn::Tape t;
  const nn::Matrix out = encode_decode(t, b, t.constant(z)).value();
  std::vector<std::vector<Vec2>> res;
  res.reserve(obs.size());
  for (Eigen::Index r = 0; r < out.rows(); ++r) res.push_back(detail::row_to_series(out, r, st_));
  return res;
}

std::vector<std::vector<Vec2>> GenerativeForecaster::sample(const DisplacementSeries& obs, std::size_t n,
                                                            std::uint64_t seed) const {
  if (!trained_) fail("cf_sample: model is not trained");
  require(n >= 1, "cf_sample: n must be >= 1");
  require(k_ == 0, "cf_sample: conditioned models produce proposals per cluster; use propose()");
  Rng rng(seed);
  const nn::Matrix z = detail::gaussian(static_cast<Eigen::Index>(n), cfg_.z_dim, rng);
  return generate(std::vector<DisplacementSeries>(n, obs), {}, z);
}

ProposalSet GenerativeForecaster::propose(const DisplacementSeries& obs, const ClusterSpace& space, std::size_t n_z,
                                          std::uint64_t seed) const {
  if (!trained_) fail("ours_propose: model is not trained");
  require(k_ > 0, "ours_propose: model is not cluster-conditioned");
  if (space.id != space_id_) {
    fail(ErrorKind::kLineage, "ours_propose: model was trained against cluster space '" + space_id_ + "' but got '" +
                                  space.id + "'");
  }
  require(space.k == k_, "ours_propose: cluster count differs from the model");
  require(n_z >= 1, "ours_propose: n_z must be >= 1");
  Rng rng(seed);
  const nn::Matrix zs = detail::gaussian(static_cast<Eigen::Index>(n_z), cfg_.z_dim, rng);
  const std::size_t rows = static_cast<std::size_t>(k_) * n_z;
  nn::Matrix z(static_cast<Eigen::Index>(rows), cfg_.z_dim);
  std::vector<int> classes(rows);
  for (int c = 0; c < k_; ++c) {
    for (std::size_t j = 0; j < n_z; ++j) {
      const auto r = static_cast<std::size_t>(c) * n_z + j;
      z.row(static_cast<Eigen::Index>(r)) = zs.row(static_cast<Eigen::Index>(j));
      classes[r] = c;
    }
  }
  const auto futures = generate(std::vector<DisplacementSeries>(rows, observed_part(obs)), classes, z);
  ProposalSet ps;
  ps.observed = observed_part(obs);
  ps.source = to_string(cfg_.kind);
  for (int c = 0; c < k_; ++c) {
    Proposal p;
    p.cluster = c;
    p.future.assign(cfg_.t_pred, Vec2{});
    for (std::size_t j = 0; j < n_z; ++j) {
      const auto& f = futures[static_cast<std::size_t>(c) * n_z + j];
      for (std::size_t t = 0; t < cfg_.t_pred; ++t) p.future[t] = p.future[t] + (1.0 / static_cast<double>(n_z)) * f[t];
    }
    ps.proposals.push_back(std::move(p));
  }
  return ps;
}

nlohmann::json GenerativeForecaster::to_json() const {
  return {{"format", "trajprop.forecaster"},
          {"version", 1},
          {"kind", to_string(cfg_.kind)},
          {"config", cfg_.to_json()},
          {"num_classes", k_},
          {"space_id", space_id_},
          {"trained", trained_},
          {"standardization", {st_.mean_x, st_.mean_y, st_.std_x, st_.std_y}},
          {"params", gen_.to_json()}};
}

GenerativeForecaster GenerativeForecaster::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.forecaster") fail(ErrorKind::kConfig, "not a forecaster document");
  const auto cfg = ForecasterConfig::from_json(j.at("config"));
  GenerativeForecaster m(cfg, j.value("num_classes", 0));
  const auto st = j.at("standardization").get<std::vector<double>>();
  m.st_ = {st.at(0), st.at(1), st.at(2), st.at(3)};
  m.space_id_ = j.value("space_id", "");
  m.gen_.load_json(j.at("params"));
  m.trained_ = j.value("trained", false);
  return m;
}

}  // namespace trajprop
