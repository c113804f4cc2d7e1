#include "trajprop/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "batching.hpp"
#include "trajprop/error.hpp"
#include "trajprop/nn/losses.hpp"
#include "trajprop/nn/optim.hpp"

namespace trajprop {

namespace {

double l2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail("ranking: operand of size " + std::to_string(a.size()) + " compared with " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> standardized_flat(std::span<const Vec2> deltas, const Standardizer& st) {
  std::vector<double> out;
  out.reserve(2 * deltas.size());
  for (const Vec2 d : deltas) {
    const Vec2 s = st.apply(d);
    out.push_back(s.x);
    out.push_back(s.y);
  }
  return out;
}

DisplacementSeries joined(const DisplacementSeries& obs, std::span<const Vec2> future) {
  DisplacementSeries fut;
  fut.deltas.assign(future.begin(), future.end());
  fut.t_pred = future.size();
  return concat(obs, fut);
}

std::size_t checked_cluster(const Proposal& p, const ClusterSpace& space) {
  if (p.cluster < 0 || p.cluster >= space.k) {
    fail("ranking: proposal cluster " + std::to_string(p.cluster) + " outside space with k=" + std::to_string(space.k));
  }
  return static_cast<std::size_t>(p.cluster);
}

}  // namespace

std::string to_string(RankMethod m) {
  switch (m) {
    case RankMethod::kCent: return "cent";
    case RankMethod::kNeighDs: return "neigh-ds";
    case RankMethod::kNeighFs: return "neigh-fs";
    case RankMethod::kAnet: return "anet";
  }
  return "?";
}

RankMethod rank_method_from_string(const std::string& s) {
  for (auto m : {RankMethod::kCent, RankMethod::kNeighDs, RankMethod::kNeighFs, RankMethod::kAnet}) {
    if (to_string(m) == s) return m;
  }
  fail(ErrorKind::kConfig, "unknown ranking method '" + s + "'");
}

void RankerConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) fail(ErrorKind::kConfig, "ranker: tau must be positive and finite");
  if (n_neig < 1) fail(ErrorKind::kConfig, "ranker: n_neig must be >= 1");
  if (anet.hidden < 1 || anet.layers < 1 || anet.samples_per_class < 1 || anet.epochs < 0 || anet.batch < 1 ||
      !(anet.lr > 0.0)) {
    fail(ErrorKind::kConfig, "ranker: invalid anet spec");
  }
}

nlohmann::json RankerConfig::to_json() const {
  return {{"method", to_string(method)},
          {"tau", tau},
          {"n_neig", n_neig},
          {"operand", operand == Operand::kFuture ? "future" : "full"},
          {"anet",
           {{"hidden", anet.hidden},
            {"layers", anet.layers},
            {"samples_per_class", anet.samples_per_class},
            {"epochs", anet.epochs},
            {"batch", anet.batch},
            {"lr", anet.lr}}}};
}

RankerConfig RankerConfig::from_json(const nlohmann::json& j) {
  RankerConfig c;
  c.method = rank_method_from_string(j.value("method", std::string("cent")));
  c.tau = j.value("tau", c.tau);
  c.n_neig = j.value("n_neig", c.n_neig);
  const auto op = j.value("operand", std::string("future"));
  if (op != "future" && op != "full") fail(ErrorKind::kConfig, "ranker: operand must be 'future' or 'full'");
  c.operand = op == "future" ? Operand::kFuture : Operand::kFull;
  if (j.contains("anet")) {
    const auto& a = j.at("anet");
    c.anet.hidden = a.value("hidden", c.anet.hidden);
    c.anet.layers = a.value("layers", c.anet.layers);
    c.anet.samples_per_class = a.value("samples_per_class", c.anet.samples_per_class);
    c.anet.epochs = a.value("epochs", c.anet.epochs);
    c.anet.batch = a.value("batch", c.anet.batch);
    c.anet.lr = a.value("lr", c.anet.lr);
  }
  c.validate();
  return c;
}

std::vector<double> inverse_distance_softmax(std::span<const double> m, double tau) {
  require(tau > 0.0, "inverse_distance_softmax: tau must be positive");
  require(!m.empty(), "inverse_distance_softmax: no distances");
  std::size_t zeros = 0;
  for (double d : m) {
    if (!(d >= 0.0)) fail("inverse_distance_softmax: distances must be non-negative");
    if (d == 0.0) ++zeros;
  }
  std::vector<double> p(m.size(), 0.0);
  if (zeros > 0) {
    for (std::size_t i = 0; i < m.size(); ++i) p[i] = m[i] == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
    return p;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i) {
    p[i] = 1.0 / (m[i] * tau);
    top = std::max(top, p[i]);
  }
  double z = 0.0;
  for (auto& v : p) z += (v = std::exp(v - top));
  for (auto& v : p) v /= z;
  return p;
}

std::vector<double> proposal_vector(const DisplacementSeries& obs, std::span<const Vec2> future,
                                    const ClusterSpace& space, Operand op, const FpScGan* embedder) {
  if (space.metric == Metric::kFeatureL2) {
    if (!embedder) fail("ranking: feature-space clustering needs an embedder");
    return embedder->embed(joined(obs, future));
  }
  if (op == Operand::kFuture) return standardized_flat(future, space.standardizer);
  return standardized_flat(joined(obs, future).deltas, space.standardizer);
}

std::vector<double> centroid_vector(const ClusterSpace& space, int c, Operand op, std::size_t future_steps) {
  require(c >= 0 && c < space.k, "centroid_vector: cluster id out of range");
  const auto& full = space.centroids[static_cast<std::size_t>(c)];
  if (space.metric == Metric::kFeatureL2 || op == Operand::kFull) return full;
  require(2 * future_steps <= full.size(), "centroid_vector: future longer than centroid");
  return {full.end() - static_cast<std::ptrdiff_t>(2 * future_steps), full.end()};
}

std::vector<double> centroid_distances(const ProposalSet& ps, const ClusterSpace& space, Operand op,
                                       const FpScGan* embedder) {
  std::vector<double> m;
  m.reserve(ps.size());
  for (const auto& p : ps.proposals) {
    checked_cluster(p, space);
    m.push_back(l2(proposal_vector(ps.observed, p.future, space, op, embedder),
                   centroid_vector(space, p.cluster, op, p.future.size())));
  }
  return m;
}

ProposalSet rank_centroids(ProposalSet ps, const ClusterSpace& space, double tau, Operand op,
                           const FpScGan* embedder) {
  ps.probabilities = inverse_distance_softmax(centroid_distances(ps, space, op, embedder), tau);
  return ps;
}

NeighborBank build_bank(const Corpus& corpus, const ClusterSpace& space, Operand op, const FpScGan* embedder) {
  if (space.assignments.size() != corpus.size()) {
    fail("build_bank: space has " + std::to_string(space.assignments.size()) + " assignments for " +
         std::to_string(corpus.size()) + " samples");
  }
  NeighborBank bank;
  bank.operand = op;
  bank.features = space.metric == Metric::kFeatureL2;
  bank.members.assign(static_cast<std::size_t>(space.k), {});
  PointSet vecs;
  if (bank.features) {
    if (!embedder) fail("build_bank: feature-space clustering needs an embedder");
    vecs = embedder->embed_batch(corpus.samples);
  } else {
    for (const auto& s : corpus.samples) {
      vecs.push_back(op == Operand::kFuture ? standardized_flat(future_deltas(s), space.standardizer)
                                            : standardized_flat(s.deltas, space.standardizer));
    }
  }
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    bank.members[static_cast<std::size_t>(space.assignments[i])].push_back(std::move(vecs[i]));
  }
  return bank;
}

std::vector<double> neighbor_distances(const ProposalSet& ps, const ClusterSpace& space, const NeighborBank& bank,
                                       std::size_t n_neig, const FpScGan* embedder) {
  require(n_neig >= 1, "neighbor_distances: n_neig must be >= 1");
  std::vector<double> m;
  m.reserve(ps.size());
  std::vector<double> d;
  for (const auto& p : ps.proposals) {
    const std::size_t c = checked_cluster(p, space);
    require(c < bank.members.size(), "neighbor_distances: bank does not cover cluster");
    const auto& mem = bank.members[c];
    if (mem.empty()) fail("neighbor_distances: cluster " + std::to_string(c) + " has no members");
    const auto v = proposal_vector(ps.observed, p.future, space, bank.operand, embedder);
    d.clear();
    for (const auto& x : mem) d.push_back(l2(v, x));
    const std::size_t n = std::min(n_neig, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n), d.end());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d[i];
    m.push_back(s / static_cast<double>(n));
  }
  return m;
}

ProposalSet rank_neighbors(ProposalSet ps, const ClusterSpace& space, const NeighborBank& bank, double tau,
                           std::size_t n_neig, const FpScGan* embedder) {
  ps.probabilities = inverse_distance_softmax(neighbor_distances(ps, space, bank, n_neig, embedder), tau);
  return ps;
}

// anet

void AnetClassifier::build(std::size_t future_steps, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "anet/init"));
  steps_ = future_steps;
  int in = static_cast<int>(2 * future_steps);
  for (int l = 0; l < spec_.layers; ++l) {
    hidden_.emplace_back(params_, "anet.fc" + std::to_string(l + 1), in, spec_.hidden, rng);
    in = spec_.hidden;
  }
  out_ = nn::Linear(params_, "anet.out", in, k_, rng);
}

nn::Matrix AnetClassifier::logits(const std::vector<std::vector<Vec2>>& futures) const {
  nn::Tape t;
  nn::Var x = t.constant(detail::flat_matrix(futures, &st_));
  for (const auto& h : hidden_) x = h(t, x);
  return out_(t, x).value();
}

AnetClassifier AnetClassifier::fit(const std::vector<std::vector<Vec2>>& futures, const std::vector<int>& labels,
                                   int k, const Standardizer& st, const AnetSpec& spec, std::uint64_t seed) {
  require(k >= 1, "anet: k must be >= 1");
  require(!futures.empty() && futures.size() == labels.size(), "anet: need one label per training future");
  AnetClassifier a;
  a.spec_ = spec;
  a.k_ = k;
  a.st_ = st;
  a.build(futures.front().size(), seed);
  for (const auto& f : futures) require(f.size() == a.steps_, "anet: futures differ in length");
  if (k > 1) {
    const nn::Matrix x_all = detail::flat_matrix(futures, &st);
    nn::Adam opt(a.params_.all(), {spec.lr});
    Rng rng(derive_seed(seed, "anet/train"));
    const std::size_t bs = static_cast<std::size_t>(spec.batch);
    for (int e = 0; e < spec.epochs; ++e) {
      const auto order = detail::permutation(futures.size(), rng);
      for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::size_t n = std::min(bs, order.size() - start);
        nn::Matrix xb(static_cast<Eigen::Index>(n), x_all.cols());
        std::vector<int> yb(n);
        for (std::size_t i = 0; i < n; ++i) {
          xb.row(static_cast<Eigen::Index>(i)) = x_all.row(static_cast<Eigen::Index>(order[start + i]));
          yb[i] = labels[order[start + i]];
        }
        nn::Tape t;
        nn::Var x = t.constant(xb);
        for (const auto& h : a.hidden_) x = h(t, x);
        const nn::Var loss = nn::loss_xent(a.out_(t, x), yb);
        if (!std::isfinite(loss.value()(0, 0))) fail(ErrorKind::kDivergence, "anet: non-finite training loss");
        t.backward(loss);
        opt.step();
      }
    }
  }
  a.trained_ = true;
  const auto probs = a.predict_proba_batch(futures);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto best = std::max_element(probs[i].begin(), probs[i].end()) - probs[i].begin();
    hit += best == labels[i] ? 1 : 0;
  }
  a.train_accuracy_ = 100.0 * static_cast<double>(hit) / static_cast<double>(probs.size());
  return a;
}

AnetClassifier AnetClassifier::train(const GenerativeForecaster& gen, const ClusterSpace& space,
                                     const Corpus& corpus, const AnetSpec& spec, std::uint64_t seed) {
  require(gen.trained(), "anet: generator is not trained");
  require(is_conditioned(gen.config().kind), "anet: generator must be cluster-conditioned");
  if (gen.space_id() != space.id) {
    fail(ErrorKind::kLineage, "anet: generator trained on space " + gen.space_id() + ", got " + space.id);
  }
  require(corpus.size() > 0, "anet: empty corpus");
  Rng rng(derive_seed(seed, "anet/data"));
  const std::size_t n = static_cast<std::size_t>(spec.samples_per_class) * static_cast<std::size_t>(space.k);
  const auto classes = draw_classes(space.weights, n, rng);
  std::vector<DisplacementSeries> obs;
  obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) obs.push_back(observed_part(corpus.samples[rng() % corpus.size()]));
  const nn::Matrix z = detail::gaussian(static_cast<Eigen::Index>(n), gen.config().z_dim, rng);
  return fit(gen.generate(obs, classes, z), classes, space.k, space.standardizer, spec, seed);
}

AnetClassifier AnetClassifier::train(const FpScGan& gan, const AnetSpec& spec, std::uint64_t seed) {
  require(gan.trained(), "anet: FP SC-GAN is not trained");
  const auto& space = gan.feature_space();
  Rng rng(derive_seed(seed, "anet/data"));
  const std::size_t n = static_cast<std::size_t>(spec.samples_per_class) * static_cast<std::size_t>(space.k);
  const auto classes = draw_classes(space.weights, n, rng);
  std::vector<std::size_t> count(static_cast<std::size_t>(space.k), 0);
  for (int c : classes) ++count[static_cast<std::size_t>(c)];
  std::vector<std::vector<Vec2>> futures;
  std::vector<int> labels;
  for (int c = 0; c < space.k; ++c) {
    for (const auto& s : gan.sample_displacements(c, count[static_cast<std::size_t>(c)],
                                                  derive_seed(seed, "anet/sample", static_cast<std::uint64_t>(c)))) {
      DisplacementSeries full = s;
      futures.push_back(future_deltas(full));
      labels.push_back(c);
    }
  }
  return fit(futures, labels, space.k, space.standardizer, spec, seed);
}

std::vector<std::vector<double>> AnetClassifier::predict_proba_batch(
    const std::vector<std::vector<Vec2>>& futures) const {
  if (!trained_) fail("anet: classifier is not trained");
  if (futures.empty()) return {};
  for (const auto& f : futures) {
    if (f.size() != steps_) {
      fail("anet: expected futures of " + std::to_string(steps_) + " steps, got " + std::to_string(f.size()));
    }
  }
  if (k_ == 1) return std::vector<std::vector<double>>(futures.size(), {1.0});
  const nn::Matrix p = nn::softmax_rows(logits(futures));
  std::vector<std::vector<double>> out(futures.size(), std::vector<double>(static_cast<std::size_t>(k_)));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c = 0; c < k_; ++c) out[i][static_cast<std::size_t>(c)] = p(static_cast<Eigen::Index>(i), c);
  return out;
}

std::vector<double> AnetClassifier::predict_proba(std::span<const Vec2> future) const {
  return predict_proba_batch({std::vector<Vec2>(future.begin(), future.end())}).front();
}

ProposalSet AnetClassifier::rank(ProposalSet ps) const {
  if (!trained_) fail("anet: classifier is not trained");
  std::vector<std::vector<Vec2>> futures;
  for (const auto& p : ps.proposals) {
    if (p.cluster < 0 || p.cluster >= k_) fail("anet: proposal cluster " + std::to_string(p.cluster) + " out of range");
    futures.push_back(p.future);
  }
  const auto probs = predict_proba_batch(futures);
  std::vector<double> p(ps.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += (p[i] = probs[i][static_cast<std::size_t>(ps.proposals[i].cluster)]);
  for (auto& v : p) v = z > 0.0 ? v / z : 1.0 / static_cast<double>(p.size());
  ps.probabilities = std::move(p);
  return ps;
}

nlohmann::json AnetClassifier::to_json() const {
  return {{"format", "trajprop.anet"},
          {"version", 1},
          {"k", k_},
          {"steps", steps_},
          {"hidden", spec_.hidden},
          {"layers", spec_.layers},
          {"trained", trained_},
          {"train_accuracy", train_accuracy_},
          {"standardization", {st_.mean_x, st_.mean_y, st_.std_x, st_.std_y}},
          {"params", params_.to_json()}};
}

AnetClassifier AnetClassifier::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.anet" || j.value("version", 0) != 1) {
    fail(ErrorKind::kConfig, "not a version-1 anet document");
  }
  AnetClassifier a;
  a.k_ = j.at("k").get<int>();
  a.spec_.hidden = j.at("hidden").get<int>();
  a.spec_.layers = j.at("layers").get<int>();
  a.build(j.at("steps").get<std::size_t>(), 0);
  a.params_.load_json(j.at("params"));
  const auto st = j.at("standardization").get<std::vector<double>>();
  a.st_ = {st.at(0), st.at(1), st.at(2), st.at(3)};
  a.trained_ = j.value("trained", false);
  a.train_accuracy_ = j.value("train_accuracy", 0.0);
  return a;
}

ProposalSet rank(ProposalSet ps, const RankerConfig& cfg, const RankResources& res) {
  cfg.validate();
  switch (cfg.method) {
    case RankMethod::kCent:
      if (!res.space) fail("rank: cent needs a cluster space");
      return rank_centroids(std::move(ps), *res.space, cfg.tau, cfg.operand, res.embedder);
    case RankMethod::kNeighDs:
    case RankMethod::kNeighFs:
      if (!res.space || !res.bank) fail("rank: neighbor ranking needs a space and a bank");
      if ((cfg.method == RankMethod::kNeighFs) != res.bank->features) {
        fail("rank: " + to_string(cfg.method) + " used with a " + (res.bank->features ? "feature" : "displacement") +
             " bank");
      }
      return rank_neighbors(std::move(ps), *res.space, *res.bank, cfg.tau, cfg.n_neig, res.embedder);
    case RankMethod::kAnet:
      if (!res.anet) fail("rank: anet needs a trained classifier");
      return res.anet->rank(std::move(ps));
  }
  return ps;
}

int top_cluster(const ProposalSet& ps) {
  if (!ps.has_probabilities()) fail("top_cluster: proposal set has no probabilities");
  int best = -1;
  double best_p = -1.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double p = ps.probabilities[i];
    const int c = ps.proposals[i].cluster;
    if (p > best_p || (p == best_p && c < best)) {
      best_p = p;
      best = c;
    }
  }
  return best;
}

double ranking_accuracy(std::span<const ProposalSet> ranked, std::span<const int> labels) {
  require(ranked.size() == labels.size(), "ranking_accuracy: one label per proposal set");
  if (ranked.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) hit += top_cluster(ranked[i]) == labels[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(ranked.size());
}

}  // namespace trajprop
