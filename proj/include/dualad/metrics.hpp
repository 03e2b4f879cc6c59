#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dualad/scenario.hpp"
#include "dualad/sim.hpp"

namespace dualad {

struct MetricWeights {
  double progress = 0.5;
  double speed = 0.2;
  double comfort = 0.2;
  double ttc = 0.1;

  /// Each weight >= 0 and the sum is 1 within 1e-9.
  void validate() const;
};

struct MetricsConfig {
  double comfort_max_accel = 3.0;  // m/s^2
  double comfort_max_jerk = 5.0;   // m/s^3
  double ttc_norm = 3.0;           // s; min_ttc at or above this scores 1
  double ttc_horizon = 5.0;        // s; look-ahead of the TTC search
  /// Free-road progress reference acceleration when no logged ego exists.
  double reference_accel = 1.5;
  /// Runs with more reasoner failures than this count as failed.
  std::size_t failure_threshold = 0;
};

struct ScoreCard {
  std::string scenario_id;
  double score = 0.0;
  bool collision = false;
  double progress_ratio = 0.0;
  double speed_compliance = 0.0;
  double comfort = 0.0;
  double min_ttc = 0.0;
  double drivable_deviation = 0.0;
  std::size_t reasoner_failures = 0;
  bool failed = false;
};

/// 100 * sum(w * m) over the four sub-metrics, or 0 on collision.
double combine_score(const ScoreCard& sub, const MetricWeights& w, const MetricsConfig& cfg = {});

/// Throws IncompleteTrace when the trace does not span the scenario duration.
ScoreCard score_trace(const SimTrace& trace, const Scenario& scenario, const MetricWeights& weights = {},
                      const MetricsConfig& cfg = {});

struct BenchmarkReport {
  std::vector<ScoreCard> cards;  // sorted by scenario id
  double mean_score = 0.0;
  std::size_t collisions = 0;
  std::size_t failures = 0;
  double failure_proportion = 0.0;

  std::string to_csv() const;
};

/// Throws EmptyBenchmark on no cards.
BenchmarkReport score_benchmark(std::vector<ScoreCard> cards);

}  // namespace dualad
