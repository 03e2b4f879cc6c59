#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dualad/metrics.hpp"
#include "dualad/planners.hpp"
#include "dualad/sim.hpp"

namespace dualad {

/// One `key = value` entry of a TOML-style file; `key` is "section.name".
struct ConfigValue {
  std::string raw;
  int line = 0;
};

/// Parses `[section]` headers and `key = value` lines. Values are numbers,
/// booleans, double-quoted strings or flat arrays of numbers; `#` starts a
/// comment. Throws ConfigError naming the line on malformed input.
std::map<std::string, ConfigValue> parse_kv(const std::string& text);

enum class ReasonerKind { none, mock, remote, replay };
const char* to_string(ReasonerKind k);
ReasonerKind reasoner_kind_from_string(const std::string& s);

struct RunConfig {
  std::filesystem::path scenario;
  std::filesystem::path corpus;
  std::filesystem::path out = "out";
  PlannerKind planner = PlannerKind::idm;
  ReasonerKind reasoner = ReasonerKind::none;
  SimMode mode = SimMode::non_reactive;
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0: hardware concurrency
  std::size_t k = 0;
  std::string tag = "bench";
  std::filesystem::path replay_file;

  PlannerConfig planning;
  SimConfig sim;
  MetricWeights weights;
  MetricsConfig metrics;

  void validate() const;
};

/// Applies parsed entries onto `cfg`. Unknown keys and ill-typed values throw
/// ConfigError naming the key.
void apply_config(RunConfig& cfg, const std::map<std::string, ConfigValue>& kv);

/// Reads a config file; throws IoError when it cannot be opened.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace dualad
