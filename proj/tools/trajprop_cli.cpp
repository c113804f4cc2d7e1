// trajprop command line: cluster -> train -> propose -> rank -> evaluate -> report.
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "trajprop/error.hpp"
#include "trajprop/pipeline.hpp"
#include "trajprop/svg.hpp"

namespace fs = std::filesystem;
using namespace trajprop;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int runs = 0;
};

ExperimentConfig load(const Common& c) {
  if (c.config.empty()) fail(ErrorKind::kConfig, "--config is required");
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed_set) cfg.seed = c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.runs > 0) cfg.evaluation.runs = c.runs;
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  return cfg;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, "cannot write " + p.string());
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, "cannot read " + p.string() + " (run the upstream command first)");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, p.string() + ": " + e.what());
  }
}

// Timestamps live here only, never inside artifacts.
void log_line(const fs::path& dir, const std::string& msg) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", std::gmtime(&now));
  std::ofstream(dir / "run.log", std::ios::app) << stamp << " " << msg << "\n";
}

std::uint64_t run_seed(const ExperimentConfig& cfg) { return derive_seed(cfg.seed, "run", 0); }

std::optional<ClusterArtifact> read_clusters(const ExperimentConfig& cfg, const DataBundle& data) {
  if (!is_conditioned(cfg.forecaster.kind)) return std::nullopt;
  auto ca = ClusterArtifact::from_json(read_json(fs::path(cfg.output_dir) / "clusters.json"));
  if (ca.stage_hash != stage_hash(cfg, "cluster") || ca.data_hash != data.data_hash) {
    fail(ErrorKind::kLineage, "clusters.json was produced by a different config or data (stage " + ca.stage_hash +
                                  ", expected " + stage_hash(cfg, "cluster") + ")");
  }
  return ca;
}

ModelArtifact read_model(const ExperimentConfig& cfg, const std::optional<ClusterArtifact>& ca) {
  auto m = ModelArtifact::from_json(read_json(fs::path(cfg.output_dir) / "model.json"));
  if (m.stage_hash != stage_hash(cfg, "model")) {
    fail(ErrorKind::kLineage, "model.json was trained under stage " + m.stage_hash + ", config expects " +
                                  stage_hash(cfg, "model"));
  }
  if (ca && m.space_id != ca->space.id) {
    fail(ErrorKind::kLineage, "model trained against space " + m.space_id + " but clusters.json holds " + ca->space.id);
  }
  return m;
}

std::vector<ProposalSet> read_sets(const fs::path& p) {
  std::vector<ProposalSet> out;
  std::istringstream in(read_file(p));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(proposal_set_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

void write_plots(const fs::path& dir, const Corpus& test, const std::vector<ProposalSet>& sets, std::size_t count,
                 std::size_t k) {
  if (count == 0) return;
  fs::create_directories(dir / "plots");
  for (std::size_t i = 0; i < std::min(count, sets.size()); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%04zu.svg", i);
    write_file(dir / "plots" / name,
               render_topk_svg(sets[i], future_deltas(test.samples[i]), k, "test sample " + std::to_string(i)));
  }
}

int cmd_synth(const std::string& scenario, std::size_t n, std::uint64_t seed, const std::string& out) {
  const auto spec = scenario_preset(scenario);
  fs::create_directories(out);
  std::vector<int> labels;
  const auto trajs = synth_trajectories(spec, n, seed, &labels);
  const fs::path p = fs::path(out) / (scenario + ".txt");
  write_trajnet(p, trajs);
  std::string lab;
  for (int l : labels) lab += std::to_string(l) + "\n";
  write_file(fs::path(out) / (scenario + ".labels"), lab);
  std::cout << "wrote " << trajs.size() << " trajectories to " << p.string() << "\n";
  return 0;
}

int cmd_cluster(const Common& c) {
  const auto cfg = load(c);
  const auto data = load_data(cfg);
  const auto ca = run_clustering(cfg, data, run_seed(cfg));
  const fs::path dir = cfg.output_dir;
  write_file(dir / "clusters.json", ca.to_json().dump(1) + "\n");
  write_file(dir / "dbi.csv", ca.dbi_csv());
  log_line(dir, "cluster " + ca.space.id + " k=" + std::to_string(ca.space.k));
  std::cout << ca.dbi_csv() << "k_best=" << ca.space.k << " space=" << ca.space.id << "\n";
  return 0;
}

int cmd_train(const Common& c) {
  const auto cfg = load(c);
  const auto data = load_data(cfg);
  const auto ca = read_clusters(cfg, data);
  const auto m = train_model(cfg, data, ca ? &*ca : nullptr, run_seed(cfg));
  const fs::path dir = cfg.output_dir;
  write_file(dir / "model.json", m.to_json().dump(1) + "\n");
  log_line(dir, "train " + m.model_id);
  std::cout << "model=" << m.model_id << (m.log.loss.empty() ? "" : " final_loss=" + std::to_string(m.log.loss.back()))
            << "\n";
  return 0;
}

int cmd_propose(const Common& c) {
  const auto cfg = load(c);
  const auto data = load_data(cfg);
  const auto ca = read_clusters(cfg, data);
  const auto m = read_model(cfg, ca);
  const auto sets = propose_all(cfg, data.splits.test, ca ? &*ca : nullptr, m, run_seed(cfg));
  std::string out;
  for (std::size_t i = 0; i < sets.size(); ++i) out += proposal_set_to_json(sets[i], i, nullptr).dump() + "\n";
  write_file(fs::path(cfg.output_dir) / "proposals.jsonl", out);
  log_line(cfg.output_dir, "propose " + std::to_string(sets.size()) + " sets");
  std::cout << "proposals for " << sets.size() << " test samples\n";
  return 0;
}

int cmd_rank(const Common& c, const std::vector<double>& taus) {
  const auto cfg = load(c);
  const auto data = load_data(cfg);
  const auto ca = read_clusters(cfg, data);
  const auto m = read_model(cfg, ca);
  auto sets = read_sets(fs::path(cfg.output_dir) / "proposals.jsonl");
  if (sets.size() != data.splits.test.size()) fail(ErrorKind::kLineage, "proposals.jsonl does not match the test split");
  for (const auto& s : sets) {
    if (s.source != m.model_id) fail(ErrorKind::kLineage, "proposals from " + s.source + ", model is " + m.model_id);
  }
  const auto sets_copy = taus.empty() ? std::vector<ProposalSet>{} : sets;
  const auto ranked = rank_all(cfg, std::move(sets), data.splits.train, ca ? &*ca : nullptr, m);
  const auto labels = ca ? pseudo_labels(data.splits.test, *ca) : std::vector<int>{};
  write_file(fs::path(cfg.output_dir) / "ranked.jsonl", ranked_jsonl(data.splits.test, ranked, labels));
  log_line(cfg.output_dir, "rank " + to_string(cfg.ranking.method));
  if (ca) std::cout << "ranking accuracy " << ranking_accuracy(ranked, labels) << "%\n";
  if (!taus.empty()) {
    if (!ca) fail(ErrorKind::kConfig, "--tau-sweep needs a conditioned model");
    const auto csv = tau_sweep_csv(tau_sweep(cfg, sets_copy, data.splits.train, *ca, m, labels, taus));
    write_file(fs::path(cfg.output_dir) / "tau_sweep.csv", csv);
    std::cout << csv;
  }
  return 0;
}

int cmd_evaluate(const Common& c) {
  const auto cfg = load(c);
  const auto data = load_data(cfg);
  const auto ev = evaluate(cfg, data);
  const fs::path dir = cfg.output_dir;
  write_file(dir / "report.json", ev.report.to_json().dump(1) + "\n");
  write_file(dir / "report.csv", ev.report.to_csv());
  write_file(dir / "ranked.jsonl", ranked_jsonl(data.splits.test, ev.first.ranked, ev.first.labels));
  write_plots(dir, data.splits.test, ev.first.ranked, cfg.evaluation.plots, cfg.evaluation.top_k);
  log_line(dir, "evaluate " + ev.report.rows.front().model_id + " runs=" +
                    std::to_string(ev.report.rows.front().seeds.size()));
  std::cout << ev.report.to_csv();
  return 0;
}

int cmd_report(const Common& c, const std::vector<std::string>& inputs) {
  EvalReport merged;
  std::vector<std::string> files = inputs;
  if (files.empty() && !c.out.empty() && fs::exists(fs::path(c.out) / "report.json")) {
    files.push_back((fs::path(c.out) / "report.json").string());
  }
  for (const auto& f : files) {
    for (auto& r : EvalReport::from_json(read_json(f)).rows) merged.rows.push_back(std::move(r));
  }
  if (merged.rows.empty()) fail(ErrorKind::kConfig, "report: no evaluation rows to report");
  merged.validate();
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  write_file(dir / "summary.csv", merged.to_csv());
  if (!c.config.empty() && fs::exists(dir / "ranked.jsonl")) {
    const auto cfg = load(c);
    const auto data = load_data(cfg);
    write_plots(dir, data.splits.test, read_sets(dir / "ranked.jsonl"), cfg.evaluation.plots, cfg.evaluation.top_k);
  }
  log_line(dir, "report rows=" + std::to_string(merged.rows.size()));
  std::cout << merged.to_csv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajprop: clustered trajectory proposals with ranking"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool runs) {
    sub->add_option("--config", common.config, "experiment config (JSON)");
    sub->add_option("--out", common.out, "output directory (overrides config)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { common.seed = s, common.seed_set = true; }, "global seed");
    if (runs) sub->add_option("--runs", common.runs, "evaluation runs")->check(CLI::PositiveNumber);
  };
  auto* cluster = app.add_subcommand("cluster", "cluster the training split and select k by DBI");
  auto* train = app.add_subcommand("train", "train the configured forecaster");
  auto* propose = app.add_subcommand("propose", "generate proposals for the test split");
  auto* rank = app.add_subcommand("rank", "assign probabilities to proposals");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "run the full pipeline over seeded runs");
  auto* report = app.add_subcommand("report", "merge evaluation reports and render plots");
  auto* synth = app.add_subcommand("synth", "write a synthetic scenario as a TrajNet file");
  for (auto* s : {cluster, train, propose, rank}) add_common(s, false);
  add_common(evaluate_cmd, true);
  add_common(report, false);
  std::vector<double> taus;
  rank->add_option("--tau-sweep", taus, "also re-rank at these temperatures and write tau_sweep.csv")
      ->check(CLI::PositiveNumber);
  std::vector<std::string> report_inputs;
  report->add_option("reports", report_inputs, "report.json files");

  std::string scenario = "three-regime";
  std::size_t n = 600;
  std::uint64_t synth_seed = 0;
  std::string synth_out = "data";
  synth->add_option("--scenario", scenario, "constant-velocity, two-regime or three-regime");
  synth->add_option("--n", n, "trajectories");
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("--out", synth_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*cluster) return cmd_cluster(common);
    if (*train) return cmd_train(common);
    if (*propose) return cmd_propose(common);
    if (*rank) return cmd_rank(common, taus);
    if (*evaluate_cmd) return cmd_evaluate(common);
    if (*report) return cmd_report(common, report_inputs);
    if (*synth) return cmd_synth(scenario, n, synth_seed, synth_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
