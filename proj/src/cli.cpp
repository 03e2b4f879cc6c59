#include "dualad/cli.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "dualad/encoder.hpp"
#include "dualad/error.hpp"
#include "dualad/frame.hpp"

namespace dualad {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const char* mode_suffix(SimMode m) { return m == SimMode::reactive ? "r" : "nr"; }

void write_file(const fs::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << bytes;
  if (!out) throw IoError("failed writing " + path.string());
}

fs::path replay_path_for(const RunConfig& cfg, const std::string& id, SimMode mode) {
  if (fs::is_directory(cfg.replay_file)) {
    return cfg.replay_file / ("replay_" + id + "_" + mode_suffix(mode) + ".jsonl");
  }
  return cfg.replay_file;
}

ojson card_json(const ScoreCard& c) {
  return {{"scenario_id", c.scenario_id},
          {"score", c.score},
          {"collision", c.collision},
          {"progress_ratio", c.progress_ratio},
          {"speed_compliance", c.speed_compliance},
          {"comfort", c.comfort},
          {"min_ttc", c.min_ttc},
          {"drivable_deviation", c.drivable_deviation},
          {"reasoner_failures", c.reasoner_failures},
          {"failed", c.failed}};
}

}  // namespace

std::unique_ptr<ReasonerBackend> make_backend(const RunConfig& cfg, const std::string& scenario_id, SimMode mode,
                                              const fs::path& record_dir) {
  switch (cfg.reasoner) {
    case ReasonerKind::none: return nullptr;
    case ReasonerKind::mock: return std::make_unique<MockBackend>(cfg.sim.vehicle);
    case ReasonerKind::remote: {
      const fs::path rec = record_dir / ("replay_" + scenario_id + "_" + mode_suffix(mode) + ".jsonl");
      std::error_code ec;
      fs::create_directories(record_dir, ec);
      return std::make_unique<RecordingBackend>(std::make_unique<RemoteBackend>(cfg.sim.reasoner), rec.string());
    }
    case ReasonerKind::replay:
      return std::make_unique<ReplayBackend>(load_replay(replay_path_for(cfg, scenario_id, mode).string()));
  }
  return nullptr;
}

RunOutcome simulate(const Scenario& scenario, const RunConfig& cfg, SimMode mode, const fs::path& record_dir) {
  SimConfig sim = cfg.sim;
  sim.mode = mode;
  sim.seed = cfg.seed;
  const auto planner = make_planner(cfg.planner, cfg.planning);
  auto backend = make_backend(cfg, scenario.id, mode, record_dir);
  RunOutcome r;
  r.trace = run(scenario, *planner, backend.get(), sim, to_string(cfg.reasoner));
  r.card = score_trace(r.trace, scenario, cfg.weights, cfg.metrics);
  return r;
}

std::vector<RunOutcome> simulate_all(const std::vector<Scenario>& scenarios, const RunConfig& cfg, SimMode mode,
                                     const fs::path& record_dir, std::size_t workers) {
  std::vector<std::optional<RunOutcome>> slots(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        slots[i] = simulate(scenarios[i], cfg, mode, record_dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, scenarios.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunOutcome> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

int cmd_run(const RunConfig& cfg, std::ostream& out) {
  if (cfg.scenario.empty()) throw ConfigError("scenario", "--scenario is required");
  cfg.validate();
  const Scenario sc = load_scenario(cfg.scenario);
  const RunOutcome r = simulate(sc, cfg, cfg.mode, cfg.out);
  const std::string stem = sc.id + "_" + mode_suffix(cfg.mode);
  write_file(cfg.out / (stem + ".trace.jsonl"), r.trace.serialize());
  ojson card = card_json(r.card);
  card["planner"] = to_string(cfg.planner);
  card["reasoner"] = to_string(cfg.reasoner);
  card["mode"] = to_string(cfg.mode);
  card["trace_hash"] = r.trace.hash();
  write_file(cfg.out / (stem + ".score.json"), card.dump(2) + "\n");
  out << sc.id << " score=" << format_fixed(r.card.score, 2) << " collision=" << (r.card.collision ? 1 : 0)
      << " progress=" << format_fixed(r.card.progress_ratio, 3) << " trace=" << r.trace.hash() << "\n";
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  if (cfg.corpus.empty()) throw ConfigError("corpus", "--corpus is required");
  cfg.validate();
  const std::vector<Scenario> corpus = load_corpus(cfg.corpus);
  if (corpus.empty()) throw EmptyBenchmark("corpus " + cfg.corpus.string() + " has no scenarios");
  if (cfg.k > corpus.size()) throw ConfigError("k", "exceeds the corpus size");

  ojson summary;
  summary["tag"] = cfg.tag;
  summary["planner"] = to_string(cfg.planner);
  summary["reasoner"] = to_string(cfg.reasoner);
  summary["scenarios"] = corpus.size();
  for (SimMode mode : {SimMode::non_reactive, SimMode::reactive}) {
    const auto outcomes = simulate_all(corpus, cfg, mode, cfg.out / "replays", cfg.workers);
    std::vector<ScoreCard> cards;
    ojson hashes = ojson::object();
    for (const auto& o : outcomes) {
      cards.push_back(o.card);
      hashes[o.trace.scenario_id] = o.trace.hash();
      write_file(cfg.out / "traces" / mode_suffix(mode) / (o.trace.scenario_id + ".jsonl"), o.trace.serialize());
    }
    const BenchmarkReport rep = score_benchmark(cards);
    write_file(cfg.out / (cfg.tag + "_" + mode_suffix(mode) + ".csv"), rep.to_csv());
    summary[mode_suffix(mode)] = {{"mean_score", rep.mean_score},
                                  {"collisions", rep.collisions},
                                  {"failures", rep.failures},
                                  {"failure_proportion", rep.failure_proportion},
                                  {"trace_hashes", hashes}};
    out << cfg.tag << " " << to_string(mode) << ": mean=" << format_fixed(rep.mean_score, 2)
        << " collisions=" << rep.collisions << " failed=" << format_fixed(rep.failure_proportion, 3) << "\n";
    if (cfg.k > 0) {
      std::vector<std::pair<std::string, double>> results;
      for (const auto& c : rep.cards) results.emplace_back(c.scenario_id, c.score);
      const SelectionMetric metric = mode == SimMode::reactive ? SelectionMetric::r_cls : SelectionMetric::nr_cls;
      const BenchmarkSet set = select_worst_k(results, cfg.k, metric, cfg.tag + "_worst" + std::to_string(cfg.k));
      write_file(cfg.out / (cfg.tag + "_worst" + std::to_string(cfg.k) + "_" + mode_suffix(mode) + ".json"),
                 benchmark_set_to_json(set).dump(2) + "\n");
    }
  }
  write_file(cfg.out / (cfg.tag + "_summary.json"), summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_encode(const RunConfig& cfg, double t, std::ostream& out) {
  if (cfg.scenario.empty()) throw ConfigError("scenario", "--scenario is required");
  cfg.sim.encoder.validate();
  const Scenario sc = load_scenario(cfg.scenario);
  if (!std::isfinite(t) || t < 0.0 || t > sc.duration + 1e-9) {
    throw ConfigError("time", "must lie within [0, " + format_fixed(sc.duration, 1) + "]");
  }
  const auto step = static_cast<std::size_t>(std::llround(t / kGridStep));
  const WorldFrame frame = frame_from_scenario(sc, step);
  out << join_descriptions(encode_scene(frame, sc.centerline, cfg.sim.encoder));
  return kExitOk;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop driving simulator with a speed-supervising reasoner", "dualad"};
  app.require_subcommand(1);

  std::optional<std::string> scenario, corpus, planner, reasoner, mode, outdir, config, tag, replay;
  std::optional<std::size_t> k, workers;
  std::optional<std::uint64_t> seed;
  double time = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "TOML-style config file; flags override it");
    sub->add_option("--scenario", scenario, "Scenario JSON file");
    sub->add_option("--planner", planner, "idm | lattice | sampling");
    sub->add_option("--reasoner", reasoner, "none | mock | remote | replay");
    sub->add_option("--mode", mode, "non_reactive | reactive");
    sub->add_option("--out", outdir, "Output directory");
    sub->add_option("--seed", seed, "Seed recorded in traces");
    sub->add_option("--replay", replay, "Replay file or directory for --reasoner replay");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one scenario");
  add_common(run_cmd);
  CLI::App* bench_cmd = app.add_subcommand("bench", "Simulate a corpus in both modes and report scores");
  add_common(bench_cmd);
  bench_cmd->add_option("--corpus", corpus, "Directory of scenario files");
  bench_cmd->add_option("--k", k, "Emit the worst-k benchmark set");
  bench_cmd->add_option("--workers", workers, "Worker threads (default: CPU count)");
  bench_cmd->add_option("--tag", tag, "Report file prefix");
  CLI::App* encode_cmd = app.add_subcommand("encode", "Print the scene description at a time");
  add_common(encode_cmd);
  encode_cmd->add_option("--time,-t", time, "Seconds from scenario start");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = config ? load_run_config(*config) : RunConfig{};
    if (scenario) cfg.scenario = *scenario;
    if (corpus) cfg.corpus = *corpus;
    if (planner) cfg.planner = planner_kind_from_string(*planner);
    if (reasoner) cfg.reasoner = reasoner_kind_from_string(*reasoner);
    if (mode) cfg.mode = sim_mode_from_string(*mode);
    if (outdir) cfg.out = *outdir;
    if (seed) cfg.seed = *seed;
    if (k) cfg.k = *k;
    if (workers) cfg.workers = *workers;
    if (tag) cfg.tag = *tag;
    if (replay) cfg.replay_file = *replay;

    if (run_cmd->parsed()) return cmd_run(cfg, out);
    if (bench_cmd->parsed()) return cmd_bench(cfg, out);
    return cmd_encode(cfg, time, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace dualad
