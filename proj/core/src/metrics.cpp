#include "trajprop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "trajprop/error.hpp"

namespace trajprop {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* who) {
  if (a != b) fail(std::string(who) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  if (a == 0) fail(std::string(who) + ": empty sequences");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

nlohmann::json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }
Stat stat_from(const nlohmann::json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

}  // namespace

double ade(std::span<const Vec2> pred, std::span<const Vec2> truth) {
  check_lengths(pred.size(), truth.size(), "ade");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += norm(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

double fde(std::span<const Vec2> pred, std::span<const Vec2> truth) {
  check_lengths(pred.size(), truth.size(), "fde");
  return norm(pred.back() - truth.back());
}

AdeFde future_errors(const DisplacementSeries& obs, std::span<const Vec2> pred, std::span<const Vec2> truth) {
  check_lengths(pred.size(), truth.size(), "future_errors");
  const Vec2 from = obs.last_observed();
  const auto p = integrate(pred, from);
  const auto t = integrate(truth, from);
  return {ade(p, t), fde(p, t)};
}

AdeFde topk_by_likelihood(const ProposalSet& ranked, std::span<const Vec2> truth, std::size_t k) {
  if (!ranked.has_probabilities()) fail("topk_by_likelihood: proposals carry no probabilities");
  if (k == 0 || k > ranked.size()) {
    fail("topk_by_likelihood: k=" + std::to_string(k) + " with " + std::to_string(ranked.size()) + " proposals");
  }
  std::vector<std::size_t> order(ranked.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double pa = ranked.probabilities[a], pb = ranked.probabilities[b];
    if (pa != pb) return pa > pb;
    return ranked.proposals[a].cluster < ranked.proposals[b].cluster;
  });
  AdeFde best{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i < k; ++i) {
    const auto e = future_errors(ranked.observed, ranked.proposals[order[i]].future, truth);
    if (e.ade < best.ade) best = e;
  }
  return best;
}

AdeFde topk_by_sampling(const DisplacementSeries& obs, const std::vector<std::vector<Vec2>>& samples,
                        std::span<const Vec2> truth, std::size_t k) {
  if (k == 0 || samples.size() < k) {
    fail("topk_by_sampling: k=" + std::to_string(k) + " with " + std::to_string(samples.size()) + " samples");
  }
  AdeFde best{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i < k; ++i) {
    const auto e = future_errors(obs, samples[i], truth);
    if (e.ade < best.ade) best = e;
  }
  return best;
}

Stat summarize(std::span<const double> v) {
  require(!v.empty(), "summarize: no values");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

EvalRow EvalRow::aggregate(std::span<const RunMetrics> runs) {
  require(!runs.empty(), "EvalRow::aggregate: no runs");
  auto col = [&](double RunMetrics::*f) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.*f);
    return summarize(v);
  };
  EvalRow row;
  row.top1_ade = col(&RunMetrics::top1_ade);
  row.top1_fde = col(&RunMetrics::top1_fde);
  row.top3_ade = col(&RunMetrics::top3_ade);
  row.top3_fde = col(&RunMetrics::top3_fde);
  row.ranked = runs.front().ranked;
  if (row.ranked) row.ranking_accuracy = col(&RunMetrics::ranking_accuracy);
  for (const auto& r : runs) row.seeds.push_back(r.seed);
  return row;
}

void EvalReport::validate() const {
  if (rows.empty()) fail("report: no rows");
  for (const auto& r : rows) {
    if (r.seeds.empty()) fail("report: row '" + r.model_id + "' has no runs");
    for (const Stat& s : {r.top1_ade, r.top1_fde, r.top3_ade, r.top3_fde, r.ranking_accuracy}) {
      if (!std::isfinite(s.mean) || !std::isfinite(s.std) || s.mean < 0.0 || s.std < 0.0) {
        fail("report: row '" + r.model_id + "' has a negative or non-finite value");
      }
    }
  }
}

std::string EvalReport::to_csv() const {
  std::string out =
      "dataset,model_id,forecaster,ranking,clustering,top1_ade,top1_ade_std,top1_fde,top1_fde_std,top3_ade,"
      "top3_ade_std,top3_fde,top3_fde_std,ranking_accuracy,ranking_accuracy_std,runs,seeds,config_hash\n";
  for (const auto& r : rows) {
    std::string seeds;
    for (std::size_t i = 0; i < r.seeds.size(); ++i) seeds += (i ? ";" : "") + std::to_string(r.seeds[i]);
    out += r.dataset + "," + r.model_id + "," + r.forecaster + "," + r.ranking + "," + r.clustering + ",";
    for (const Stat& s : {r.top1_ade, r.top1_fde, r.top3_ade, r.top3_fde}) out += num(s.mean) + "," + num(s.std) + ",";
    out += r.ranked ? num(r.ranking_accuracy.mean) + "," + num(r.ranking_accuracy.std) + "," : ",,";
    out += std::to_string(r.seeds.size()) + "," + seeds + "," + r.config_hash + "\n";
  }
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"dataset", r.dataset},
                   {"model_id", r.model_id},
                   {"forecaster", r.forecaster},
                   {"ranking", r.ranking},
                   {"clustering", r.clustering},
                   {"top1_ade", stat_json(r.top1_ade)},
                   {"top1_fde", stat_json(r.top1_fde)},
                   {"top3_ade", stat_json(r.top3_ade)},
                   {"top3_fde", stat_json(r.top3_fde)},
                   {"ranking_accuracy", r.ranked ? stat_json(r.ranking_accuracy) : nlohmann::json(nullptr)},
                   {"seeds", r.seeds},
                   {"config_hash", r.config_hash}});
  }
  return {{"format", "trajprop.eval_report"}, {"version", 1}, {"rows", arr}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "trajprop.eval_report" || j.value("version", 0) != 1) {
    fail(ErrorKind::kConfig, "not a version-1 evaluation report");
  }
  EvalReport rep;
  for (const auto& r : j.at("rows")) {
    EvalRow row;
    row.dataset = r.at("dataset");
    row.model_id = r.at("model_id");
    row.forecaster = r.at("forecaster");
    row.ranking = r.at("ranking");
    row.clustering = r.at("clustering");
    row.top1_ade = stat_from(r.at("top1_ade"));
    row.top1_fde = stat_from(r.at("top1_fde"));
    row.top3_ade = stat_from(r.at("top3_ade"));
    row.top3_fde = stat_from(r.at("top3_fde"));
    row.ranked = !r.at("ranking_accuracy").is_null();
    if (row.ranked) row.ranking_accuracy = stat_from(r.at("ranking_accuracy"));
    row.seeds = r.at("seeds").get<std::vector<std::uint64_t>>();
    row.config_hash = r.at("config_hash");
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace trajprop
