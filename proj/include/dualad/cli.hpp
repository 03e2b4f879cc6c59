#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dualad/config.hpp"
#include "dualad/metrics.hpp"
#include "dualad/scenario.hpp"
#include "dualad/sim.hpp"

namespace dualad {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitIo = 3 };

/// Backend for one simulation; null for ReasonerKind::none. Remote backends
/// record their replies under `record_dir`.
std::unique_ptr<ReasonerBackend> make_backend(const RunConfig& cfg, const std::string& scenario_id, SimMode mode,
                                              const std::filesystem::path& record_dir);

struct RunOutcome {
  SimTrace trace;
  ScoreCard card;
};

RunOutcome simulate(const Scenario& scenario, const RunConfig& cfg, SimMode mode,
                    const std::filesystem::path& record_dir);

/// Simulates every scenario with a pool of `workers` threads; results come
/// back in input order.
std::vector<RunOutcome> simulate_all(const std::vector<Scenario>& scenarios, const RunConfig& cfg, SimMode mode,
                                     const std::filesystem::path& record_dir, std::size_t workers);

int cmd_run(const RunConfig& cfg, std::ostream& out);
int cmd_bench(const RunConfig& cfg, std::ostream& out);
int cmd_encode(const RunConfig& cfg, double t, std::ostream& out);

/// Parses arguments, dispatches, and maps errors to exit codes.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dualad
