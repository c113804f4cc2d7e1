#include "trajprop/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <filesystem>

#include "trajprop/error.hpp"

namespace trajprop {

namespace {

void put(std::string& buf, double v) {
  char b[sizeof v];
  std::memcpy(b, &v, sizeof v);
  buf.append(b, sizeof v);
}

nlohmann::json series_json(std::span<const Vec2> s) {
  nlohmann::json a = nlohmann::json::array();
  for (const Vec2 v : s) a.push_back({v.x, v.y});
  return a;
}

std::vector<Vec2> series_from(const nlohmann::json& j) {
  std::vector<Vec2> out;
  for (const auto& v : j) out.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  return out;
}

void check_lineage(const std::string& what, const std::string& have, const std::string& want) {
  if (have != want) {
    fail(ErrorKind::kLineage, what + " lineage mismatch: artifact has '" + have + "', config expects '" + want + "'");
  }
}

ForecasterConfig seeded(const ExperimentConfig& cfg, std::uint64_t seed) {
  ForecasterConfig fc = cfg.forecaster;
  fc.seed = seed;
  return fc;
}

}  // namespace

std::string corpus_hash(const Corpus& c) {
  std::string buf = c.name + "|" + std::to_string(c.t_obs) + "|" + std::to_string(c.t_pred) + "|";
  for (const auto& s : c.samples) {
    put(buf, s.origin.x);
    put(buf, s.origin.y);
    for (const Vec2 d : s.deltas) {
      put(buf, d.x);
      put(buf, d.y);
    }
  }
  return hex64(fnv1a(buf));
}

DataBundle load_data(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Corpus> corpora;
  DataBundle out;
  if (cfg.data.source == "synthetic") {
    corpora.push_back(synth_corpus(scenario_preset(cfg.data.scenario, cfg.t_obs, cfg.t_pred), cfg.data.n,
                                   derive_seed(cfg.seed, "data")));
    out.name = cfg.data.scenario;
  } else {
    for (const auto& f : cfg.data.files) {
      const std::filesystem::path p(f);
      corpora.push_back(segment(load_trajnet(p, cfg.data.dt), cfg.t_obs, cfg.t_pred, cfg.data.overlap,
                                cfg.data.stride, p.stem().string()));
    }
    out.name = cfg.data.split.mode == SplitMode::kLeaveOneDatasetOut ? cfg.data.split.held_out : "pool";
  }
  SplitPlan plan = cfg.data.split;
  plan.seed = derive_seed(cfg.seed, "split");
  out.splits = make_splits(corpora, plan);
  if (out.splits.train.size() == 0 || out.splits.test.size() == 0) {
    fail(ErrorKind::kConfig, "data: split leaves the train or test set empty");
  }
  out.data_hash = hex64(fnv1a(corpus_hash(out.splits.train) + corpus_hash(out.splits.val) +
                              corpus_hash(out.splits.test)));
  return out;
}

// clustering

std::string ClusterArtifact::dbi_csv() const {
  std::string out = "k,mean_dbi,run_dbi\n";
  for (const auto& r : selection.table) {
    std::string runs;
    for (std::size_t i = 0; i < r.run_dbi.size(); ++i) runs += (i ? ";" : "") + nlohmann::json(r.run_dbi[i]).dump();
    // a fixed k is never scored
    const std::string mean = std::isfinite(r.mean_dbi) ? nlohmann::json(r.mean_dbi).dump() : "";
    out += std::to_string(r.k) + "," + mean + "," + runs + "\n";
  }
  return out;
}

nlohmann::json ClusterArtifact::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : selection.table) table.push_back({{"k", r.k}, {"mean_dbi", r.mean_dbi}, {"run_dbi", r.run_dbi}});
  return {{"format", "trajprop.clusters"},
          {"version", 1},
          {"method", method},
          {"stage_hash", stage_hash},
          {"data_hash", data_hash},
          {"seed", seed},
          {"selection", {{"k_best", selection.k_best}, {"table", table}}},
          {"space", space.to_json()},
          {"fp_scgan", fp ? fp->to_json() : nlohmann::json(nullptr)}};
}

ClusterArtifact ClusterArtifact::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.clusters" || j.value("version", 0) != 1) {
    fail(ErrorKind::kConfig, "not a version-1 cluster artifact");
  }
  ClusterArtifact a;
  a.method = j.at("method");
  a.stage_hash = j.at("stage_hash");
  a.data_hash = j.at("data_hash");
  a.seed = j.at("seed");
  a.selection.k_best = j.at("selection").at("k_best");
  for (const auto& r : j.at("selection").at("table")) {
    const auto& m = r.at("mean_dbi");
    a.selection.table.push_back({r.at("k").get<int>(),
                                 m.is_null() ? std::numeric_limits<double>::quiet_NaN() : m.get<double>(),
                                 r.at("run_dbi").get<std::vector<double>>()});
  }
  a.space = ClusterSpace::from_json(j.at("space"));
  if (!j.at("fp_scgan").is_null()) a.fp = FpScGan::from_json(j.at("fp_scgan"));
  return a;
}

ClusterArtifact run_clustering(const ExperimentConfig& cfg, const DataBundle& data, std::uint64_t seed) {
  const auto& cc = cfg.clustering;
  const Corpus& train = data.splits.train;
  ClusterArtifact a;
  a.method = cc.method;
  a.stage_hash = stage_hash(cfg, "cluster");
  a.data_hash = data.data_hash;
  a.seed = seed;
  if (cc.method == "fp-scgan") {
    FpScGanConfig fc = cc.fp_scgan;
    fc.seed = derive_seed(seed, "fp-scgan");
    fc.standardize = cc.standardize;
    FpScGan g(fc, cc.k_grid.front(), cfg.t_obs, cfg.t_pred);
    a.space = g.train(train);
    a.selection.k_best = cc.k_grid.front();
    a.fp.emplace(std::move(g));
  } else {
    const Standardizer st = cc.standardize ? Standardizer::fit(train.samples) : Standardizer{};
    const PointSet pts = corpus_points(train, st);
    SelectKOptions opts;
    opts.clusterer = cc.method == "kmeans" ? ClustererKind::kKMeans : ClustererKind::kTsKMeans;
    opts.runs = static_cast<std::size_t>(cc.runs);
    opts.seed = derive_seed(seed, "select-k");
    opts.ts.gamma = cc.gamma;
    a.selection = select_k(pts, cc.k_grid, opts);
    a.space = run_clusterer(pts, a.selection.k_best, opts, derive_seed(seed, "cluster"));
    a.space.standardizer = st;
  }
  a.space.id = "space-" + hex64(fnv1a(a.stage_hash + ":" + a.data_hash + ":" + hex64(seed)));
  if (a.fp) a.fp->set_space_id(a.space.id);
  return a;
}

// training

nlohmann::json ModelArtifact::to_json() const {
  nlohmann::json fj = nullptr;
  if (red) fj = red->to_json();
  if (gen) fj = gen->to_json();
  return {{"format", "trajprop.model"},
          {"version", 1},
          {"kind", trajprop::to_string(kind)},
          {"model_id", model_id},
          {"space_id", space_id},
          {"stage_hash", stage_hash},
          {"seed", seed},
          {"train_loss", log.loss},
          {"train_aux", log.aux},
          {"forecaster", fj},
          {"anet", anet ? anet->to_json() : nlohmann::json(nullptr)}};
}

ModelArtifact ModelArtifact::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.model" || j.value("version", 0) != 1) {
    fail(ErrorKind::kConfig, "not a version-1 model artifact");
  }
  ModelArtifact m;
  m.kind = forecaster_kind_from_string(j.at("kind"));
  m.model_id = j.at("model_id");
  m.space_id = j.at("space_id");
  m.stage_hash = j.at("stage_hash");
  m.seed = j.at("seed");
  m.log.loss = j.at("train_loss").get<std::vector<double>>();
  m.log.aux = j.at("train_aux").get<std::vector<double>>();
  if (m.kind == ForecasterKind::kRed) m.red = RedForecaster::from_json(j.at("forecaster"));
  if (is_generative(m.kind)) m.gen = GenerativeForecaster::from_json(j.at("forecaster"));
  if (!j.at("anet").is_null()) m.anet = AnetClassifier::from_json(j.at("anet"));
  return m;
}

ModelArtifact train_model(const ExperimentConfig& cfg, const DataBundle& data, const ClusterArtifact* clusters,
                          std::uint64_t seed) {
  ModelArtifact m;
  m.kind = cfg.forecaster.kind;
  m.stage_hash = stage_hash(cfg, "model");
  m.seed = seed;
  const Corpus& train = data.splits.train;
  const ForecasterConfig fc = seeded(cfg, derive_seed(seed, "forecaster"));
  if (is_conditioned(m.kind)) {
    if (!clusters) fail(ErrorKind::kConfig, to_string(m.kind) + " needs a cluster artifact");
    check_lineage("cluster", clusters->stage_hash, stage_hash(cfg, "cluster"));
    check_lineage("data", clusters->data_hash, data.data_hash);
    m.space_id = clusters->space.id;
  }
  switch (m.kind) {
    case ForecasterKind::kCvm:
      break;
    case ForecasterKind::kRed:
      m.red.emplace(fc);
      m.log = m.red->train(train);
      break;
    default:
      if (is_conditioned(m.kind)) {
        m.gen.emplace(fc, clusters->space.k);
        m.log = m.gen->train(train, &clusters->space);
        if (cfg.ranking.method == RankMethod::kAnet) {
          m.anet = AnetClassifier::train(*m.gen, clusters->space, train, cfg.ranking.anet, derive_seed(seed, "anet"));
        }
      } else {
        m.gen.emplace(fc);
        m.log = m.gen->train(train);
      }
  }
  m.model_id = "model-" + hex64(fnv1a(m.stage_hash + ":" + m.space_id + ":" + hex64(seed)));
  return m;
}

std::vector<ProposalSet> propose_all(const ExperimentConfig& cfg, const Corpus& test, const ClusterArtifact* clusters,
                                     const ModelArtifact& model, std::uint64_t seed) {
  std::vector<ProposalSet> out;
  out.reserve(test.size());
  std::vector<DisplacementSeries> obs;
  for (const auto& s : test.samples) obs.push_back(observed_part(s));
  std::vector<std::vector<Vec2>> red_pred;
  if (model.kind == ForecasterKind::kRed) red_pred = model.red->predict_batch(obs);
  for (std::size_t i = 0; i < test.size(); ++i) {
    ProposalSet ps;
    switch (model.kind) {
      case ForecasterKind::kCvm:
        ps.proposals.push_back({cvm_predict(obs[i], cfg.t_pred, cfg.forecaster.cvm_sigma), -1});
        break;
      case ForecasterKind::kRed:
        ps.proposals.push_back({red_pred[i], -1});
        break;
      default:
        if (is_conditioned(model.kind)) {
          if (!clusters) fail(ErrorKind::kConfig, "propose: conditioned model needs its cluster artifact");
          ps = model.gen->propose(obs[i], clusters->space, cfg.evaluation.n_z, derive_seed(seed, "propose", i));
        } else {
          for (auto& f : model.gen->sample(obs[i], cfg.evaluation.top_k, derive_seed(seed, "sample", i))) {
            ps.proposals.push_back({std::move(f), -1});
          }
        }
    }
    ps.observed = obs[i];
    ps.source = model.model_id;
    out.push_back(std::move(ps));
  }
  return out;
}

std::vector<ProposalSet> rank_all(const ExperimentConfig& cfg, std::vector<ProposalSet> sets, const Corpus& train,
                                  const ClusterArtifact* clusters, const ModelArtifact& model) {
  if (!is_conditioned(model.kind)) return sets;
  if (!clusters) fail(ErrorKind::kConfig, "rank: conditioned proposals need their cluster artifact");
  check_lineage("space", model.space_id, clusters->space.id);
  RankResources res;
  res.space = &clusters->space;
  res.embedder = clusters->embedder();
  std::optional<NeighborBank> bank;
  if (cfg.ranking.method == RankMethod::kNeighDs || cfg.ranking.method == RankMethod::kNeighFs) {
    bank = build_bank(train, clusters->space, cfg.ranking.operand, res.embedder);
    res.bank = &*bank;
  }
  if (cfg.ranking.method == RankMethod::kAnet) {
    if (!model.anet) fail(ErrorKind::kConfig, "rank: anet ranking needs a model trained with an anet classifier");
    res.anet = &*model.anet;
  }
  for (auto& ps : sets) ps = rank(std::move(ps), cfg.ranking, res);
  return sets;
}

std::vector<int> pseudo_labels(const Corpus& corpus, const ClusterArtifact& clusters) {
  const PointSet pts = clusters.space.metric == Metric::kFeatureL2
                           ? (clusters.fp ? clusters.fp->embed_batch(corpus.samples)
                                          : (fail("pseudo_labels: feature space without embedder"), PointSet{}))
                           : corpus_points(corpus, clusters.space.standardizer);
  std::vector<int> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(assign(clusters.space, p));
  return out;
}

std::vector<TauRow> tau_sweep(const ExperimentConfig& cfg, const std::vector<ProposalSet>& sets, const Corpus& train,
                              const ClusterArtifact& clusters, const ModelArtifact& model,
                              const std::vector<int>& labels, const std::vector<double>& taus) {
  if (taus.empty()) fail(ErrorKind::kConfig, "tau sweep: no temperatures given");
  if (labels.size() != sets.size()) fail("tau sweep: one label per proposal set required");
  std::vector<TauRow> out;
  for (double tau : taus) {
    ExperimentConfig c = cfg;
    c.ranking.tau = tau;
    c.ranking.validate();
    const auto ranked = rank_all(c, sets, train, &clusters, model);
    TauRow row;
    row.tau = tau;
    row.ranking_accuracy = ranking_accuracy(ranked, labels);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& ps = ranked[i];
      for (std::size_t j = 0; j < ps.size(); ++j) {
        const double p = ps.probabilities[j];
        if (ps.proposals[j].cluster == labels[i]) row.label_prob += p;
        if (p > 0.0) row.entropy -= p * std::log(p);
      }
    }
    row.label_prob /= static_cast<double>(ranked.size());
    row.entropy /= static_cast<double>(ranked.size());
    out.push_back(row);
  }
  return out;
}

std::string tau_sweep_csv(const std::vector<TauRow>& rows) {
  std::string out = "tau,ranking_accuracy,label_prob,entropy\n";
  char line[128];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%g,%.6f,%.6f,%.6f\n", r.tau, r.ranking_accuracy, r.label_prob, r.entropy);
    out += line;
  }
  return out;
}

RunMetrics score(const ExperimentConfig& cfg, const Corpus& test, const std::vector<ProposalSet>& ranked,
                 const std::vector<int>* labels, bool conditioned) {
  require(ranked.size() == test.size(), "score: one proposal set per test sample");
  RunMetrics m;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto truth = future_deltas(test.samples[i]);
    const auto& ps = ranked[i];
    AdeFde t1, tk;
    if (conditioned) {
      t1 = topk_by_likelihood(ps, truth, 1);
      tk = topk_by_likelihood(ps, truth, std::min(cfg.evaluation.top_k, ps.size()));
    } else {
      std::vector<std::vector<Vec2>> samples;
      for (const auto& p : ps.proposals) samples.push_back(p.future);
      t1 = topk_by_sampling(ps.observed, samples, truth, 1);
      tk = topk_by_sampling(ps.observed, samples, truth, std::min(cfg.evaluation.top_k, samples.size()));
    }
    m.top1_ade += t1.ade;
    m.top1_fde += t1.fde;
    m.top3_ade += tk.ade;
    m.top3_fde += tk.fde;
  }
  const double n = static_cast<double>(test.size());
  m.top1_ade /= n;
  m.top1_fde /= n;
  m.top3_ade /= n;
  m.top3_fde /= n;
  if (conditioned && labels) {
    m.ranked = true;
    m.ranking_accuracy = ranking_accuracy(ranked, *labels);
  }
  return m;
}

nlohmann::json proposal_set_to_json(const ProposalSet& ps, std::size_t sample, const std::vector<Vec2>* truth,
                                    int label) {
  nlohmann::json clusters = nlohmann::json::array(), futures = nlohmann::json::array();
  nlohmann::json ades = nlohmann::json::array(), fdes = nlohmann::json::array();
  for (const auto& p : ps.proposals) {
    clusters.push_back(p.cluster);
    futures.push_back(series_json(p.future));
    if (truth) {
      const auto e = future_errors(ps.observed, p.future, *truth);
      ades.push_back(e.ade);
      fdes.push_back(e.fde);
    }
  }
  nlohmann::json j = {{"sample", sample},
                      {"source", ps.source},
                      {"origin", {ps.observed.origin.x, ps.observed.origin.y}},
                      {"observed", series_json(ps.observed.deltas)},
                      {"clusters", clusters},
                      {"proposals", futures},
                      {"probabilities", ps.has_probabilities() ? nlohmann::json(ps.probabilities) : nlohmann::json()}};
  if (truth) {
    j["truth"] = series_json(*truth);
    j["ade"] = ades;
    j["fde"] = fdes;
  }
  if (label >= 0) j["label"] = label;
  return j;
}

ProposalSet proposal_set_from_json(const nlohmann::json& j) {
  ProposalSet ps;
  ps.source = j.at("source");
  ps.observed.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
  ps.observed.deltas = series_from(j.at("observed"));
  ps.observed.t_obs = ps.observed.deltas.size();
  const auto& cl = j.at("clusters");
  const auto& fu = j.at("proposals");
  require(cl.size() == fu.size(), "proposal set: clusters and proposals differ in count");
  for (std::size_t i = 0; i < cl.size(); ++i) ps.proposals.push_back({series_from(fu[i]), cl[i].get<int>()});
  if (!j.at("probabilities").is_null()) ps.probabilities = j.at("probabilities").get<std::vector<double>>();
  return ps;
}

RunArtifacts run_once(const ExperimentConfig& cfg, const DataBundle& data, std::uint64_t seed) {
  RunArtifacts r;
  const bool cond = is_conditioned(cfg.forecaster.kind);
  if (cond) r.clusters = run_clustering(cfg, data, seed);
  const ClusterArtifact* ca = r.clusters ? &*r.clusters : nullptr;
  r.model = train_model(cfg, data, ca, seed);
  auto sets = propose_all(cfg, data.splits.test, ca, r.model, seed);
  r.ranked = rank_all(cfg, std::move(sets), data.splits.train, ca, r.model);
  if (cond) r.labels = pseudo_labels(data.splits.test, *r.clusters);
  r.metrics = score(cfg, data.splits.test, r.ranked, cond ? &r.labels : nullptr, cond);
  r.metrics.seed = seed;
  return r;
}

Evaluation evaluate(const ExperimentConfig& cfg, const DataBundle& data, int runs_override) {
  const bool cvm = cfg.forecaster.kind == ForecasterKind::kCvm;
  const int runs = runs_override > 0 ? runs_override : (cvm ? 1 : cfg.evaluation.runs);
  Evaluation ev;
  std::vector<RunMetrics> metrics;
  for (int r = 0; r < runs; ++r) {
    auto art = run_once(cfg, data, derive_seed(cfg.seed, "run", static_cast<std::uint64_t>(r)));
    metrics.push_back(art.metrics);
    if (r == 0) ev.first = std::move(art);
  }
  EvalRow row = EvalRow::aggregate(metrics);
  const bool cond = is_conditioned(cfg.forecaster.kind);
  row.dataset = data.name;
  row.model_id = ev.first.model.model_id;
  row.forecaster = to_string(cfg.forecaster.kind);
  row.ranking = cond ? to_string(cfg.ranking.method) : "none";
  row.clustering = cond ? cfg.clustering.method : "none";
  row.config_hash = config_hash(cfg);
  ev.report.rows.push_back(std::move(row));
  ev.report.validate();
  return ev;
}

std::string ranked_jsonl(const Corpus& test, const std::vector<ProposalSet>& ranked, const std::vector<int>& labels) {
  std::string out;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto truth = future_deltas(test.samples[i]);
    out += proposal_set_to_json(ranked[i], i, &truth, labels.empty() ? -1 : labels[i]).dump() + "\n";
  }
  return out;
}

}  // namespace trajprop
