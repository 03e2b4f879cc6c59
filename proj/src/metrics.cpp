#include "dualad/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dualad/encoder.hpp"
#include "dualad/error.hpp"
#include "dualad/reasoner.hpp"

namespace dualad {

void MetricWeights::validate() const {
  const double w[] = {progress, speed, comfort, ttc};
  const char* names[] = {"metrics.w_progress", "metrics.w_speed", "metrics.w_comfort", "metrics.w_ttc"};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (!(w[i] >= 0.0)) throw ConfigError(names[i], "must be >= 0");
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("metrics.weights", "must sum to 1");
}

double combine_score(const ScoreCard& sub, const MetricWeights& w, const MetricsConfig& cfg) {
  if (sub.collision) return 0.0;
  const double ttc_term = std::min(1.0, sub.min_ttc / cfg.ttc_norm);
  const double s = w.progress * sub.progress_ratio + w.speed * sub.speed_compliance + w.comfort * sub.comfort +
                   w.ttc * ttc_term;
  return std::clamp(100.0 * s, 0.0, 100.0);
}

namespace {

// Distance covered from v0 accelerating at `a` toward `v_max` over `T`.
double free_road_distance(double v0, double v_max, double a, double T) {
  if (v0 >= v_max) return v0 * T;
  const double t_acc = std::min(T, (v_max - v0) / a);
  const double d_acc = v0 * t_acc + 0.5 * a * t_acc * t_acc;
  return d_acc + std::min(v0 + a * t_acc, v_max) * (T - t_acc);
}

double reference_progress(const Scenario& sc, double s0, double T, const MetricsConfig& cfg) {
  if (sc.ego_log && !sc.ego_log->empty()) {
    const auto& log = *sc.ego_log;
    auto it = std::find_if(log.rbegin(), log.rend(), [&](const AgentState& st) { return st.t <= T + 1e-9; });
    const auto& last = it == log.rend() ? log.front() : *it;
    const double a = to_frenet(sc.centerline, {log.front().x, log.front().y, log.front().theta}).s;
    const double b = to_frenet(sc.centerline, {last.x, last.y, last.theta}).s;
    return b - a;
  }
  const double route_left = std::max(0.0, sc.centerline.length() - s0 - 0.5 - 0.5 * VehicleParams{}.length);
  return std::min(free_road_distance(sc.ego_init.speed, sc.speed_limit, cfg.reference_accel, T), route_left);
}

}  // namespace

ScoreCard score_trace(const SimTrace& trace, const Scenario& scenario, const MetricWeights& weights,
                      const MetricsConfig& cfg) {
  weights.validate();
  const std::size_t need = scenario.num_steps() + 1;
  if (trace.records.size() < need) {
    throw IncompleteTrace("trace for " + scenario.id + " has " + std::to_string(trace.records.size()) +
                          " records, need " + std::to_string(need));
  }
  const auto& recs = trace.records;
  const double dt = recs.size() > 1 ? recs[1].t - recs[0].t : kGridStep;
  const double T = recs.back().t - recs.front().t;

  ScoreCard card;
  card.scenario_id = trace.scenario_id;
  card.collision = trace.collided();
  card.reasoner_failures = trace.reasoner_failures();
  card.failed = card.reasoner_failures > cfg.failure_threshold;

  const double progress = recs.back().ego_s - recs.front().ego_s;
  const double ref = reference_progress(scenario, recs.front().ego_s, T, cfg);
  card.progress_ratio = ref <= 1e-6 ? 1.0 : std::clamp(progress / ref, 0.0, 1.0);

  double over = 0.0;
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    if (recs[k].ego.v > scenario.speed_limit + 1e-6) over += dt;
  }
  card.speed_compliance = T > 0.0 ? std::clamp(1.0 - over / T, 0.0, 1.0) : 1.0;

  std::size_t comfy = 0;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const double jerk = k == 0 ? 0.0 : (recs[k].accel - recs[k - 1].accel) / dt;
    if (std::abs(recs[k].accel) <= cfg.comfort_max_accel + 1e-9 && std::abs(jerk) <= cfg.comfort_max_jerk + 1e-9) {
      ++comfy;
    }
  }
  card.comfort = static_cast<double>(comfy) / static_cast<double>(recs.size());

  double min_ttc = cfg.ttc_horizon;
  for (const auto& r : recs) {
    WorldFrame f;
    f.ego.pose = {r.ego.x, r.ego.y, r.ego.theta};
    f.ego.speed = r.ego.v;
    for (std::size_t i = 0; i < r.agents.size() && i < scenario.agents.size(); ++i) {
      const auto& a = r.agents[i];
      const auto& rec = scenario.agents[i];
      f.agents.push_back({a.id, rec.kind, rec.width, rec.length, {a.x, a.y, a.theta}, a.speed, i});
    }
    min_ttc = std::min(min_ttc, min_time_to_collision(f, VehicleParams{}, cfg.ttc_horizon));
  }
  card.min_ttc = min_ttc;

  double dev = 0.0;
  for (const auto& r : recs) dev = std::max(dev, std::abs(r.ego_d));
  card.drivable_deviation = dev;

  card.score = combine_score(card, weights, cfg);
  return card;
}

BenchmarkReport score_benchmark(std::vector<ScoreCard> cards) {
  if (cards.empty()) throw EmptyBenchmark("benchmark has no scenarios");
  std::sort(cards.begin(), cards.end(),
            [](const ScoreCard& a, const ScoreCard& b) { return a.scenario_id < b.scenario_id; });
  BenchmarkReport rep;
  double sum = 0.0;
  for (const auto& c : cards) {
    sum += c.score;
    rep.collisions += c.collision ? 1 : 0;
    rep.failures += c.failed ? 1 : 0;
  }
  rep.mean_score = sum / static_cast<double>(cards.size());
  rep.failure_proportion = static_cast<double>(rep.failures) / static_cast<double>(cards.size());
  rep.cards = std::move(cards);
  return rep;
}

std::string BenchmarkReport::to_csv() const {
  std::string out = "scenario_id,score,collision,progress,speed_compliance,comfort,min_ttc,failed\n";
  for (const auto& c : cards) {
    out += c.scenario_id + "," + format_fixed(c.score, 6) + "," + (c.collision ? "1" : "0") + "," +
           format_fixed(c.progress_ratio, 6) + "," + format_fixed(c.speed_compliance, 6) + "," +
           format_fixed(c.comfort, 6) + "," + format_fixed(c.min_ttc, 6) + "," + (c.failed ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace dualad
