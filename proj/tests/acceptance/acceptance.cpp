// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "dualad/cli.hpp"
#include "dualad/config.hpp"
#include "dualad/encoder.hpp"
#include "dualad/error.hpp"
#include "dualad/geom.hpp"
#include "dualad/metrics.hpp"
#include "dualad/planners.hpp"
#include "dualad/reasoner.hpp"
#include "dualad/scenario.hpp"
#include "dualad/sim.hpp"
#include "../unit/test_support.hpp"

namespace fs = std::filesystem;
using namespace dualad;
using dualad::testing::ego_frame;
using dualad::testing::snapshot;
using dualad::testing::source_dir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Encoder goldens and branch fuzz

Outcome encoder_suite() {
  const auto t0 = Clock::now();
  const fs::path golden = source_dir() / "tests" / "golden" / "encoder";
  const auto doc = nlohmann::json::parse(read_file(golden / "frames.json"));
  EncoderConfig cfg;
  cfg.alpha = doc["alpha"];
  cfg.beta = doc["beta"];
  cfg.gamma = doc["gamma"];

  std::size_t frames = 0, mismatches = 0;
  for (const auto& f : doc["frames"]) {
    const std::string text =
        render_agent(f["id"], {f["s"], f["d"], f["theta"]}, f["width"], f["length"], f["speed"], cfg) + "\n";
    mismatches += text != read_file(golden / "expected" / (f["name"].get<std::string>() + ".txt"));
    ++frames;
  }
  for (const auto& s : doc["scenes"]) {
    const Scenario sc = load_scenario(source_dir() / s["scenario"].get<std::string>());
    const auto step = static_cast<std::size_t>(std::llround(s["time"].get<double>() / kGridStep));
    const std::string got = join_descriptions(encode_scene(frame_from_scenario(sc, step), sc.centerline));
    mismatches += got != read_file(golden / "expected" / (s["name"].get<std::string>() + ".txt"));
  }
  std::string table;
  for (const auto& c : doc["orientation"]) table += describe_orientation(c["o_norm"], c["d"], c["speed"], cfg) + "\n";
  mismatches += table != read_file(golden / "expected" / "orientation.txt");

  // Fuzz: half uniform draws, half drawn from the exact boundaries and their neighbours.
  const double a = cfg.alpha, b = cfg.beta, g = cfg.gamma;
  std::vector<double> lon_pool, or_pool, d_pool;
  for (double v : {-1.0, 1.0, 0.0}) {
    lon_pool.insert(lon_pool.end(), {v, std::nextafter(v, -5.0), std::nextafter(v, 5.0)});
  }
  for (double v : {a, -a, b, -b, 0.0}) {
    or_pool.insert(or_pool.end(), {v, std::nextafter(v, -5.0), std::nextafter(v, 5.0)});
  }
  d_pool = lon_pool;
  for (double v : {g, -g}) d_pool.insert(d_pool.end(), {v, std::nextafter(v, -5.0), std::nextafter(v, 5.0)});

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> us(-4.0, 4.0), uo(-kPi, kPi), uw(-4.0 * kPi, 4.0 * kPi), uv(0.0, 0.03);
  std::bernoulli_distribution coin(0.5);
  auto pick = [&](const std::vector<double>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  const char* or_tails[4] = {"in the same direction as the ego vehicle", "in the opposite direction of the ego vehicle",
                             "towards the ego vehicle's planned trajectory",
                             "away from the ego vehicle's planned trajectory"};
  std::size_t bad = 0;
  constexpr int kFuzz = 1000000;
  for (int i = 0; i < kFuzz; ++i) {
    const double s = coin(rng) ? pick(lon_pool) : us(rng);
    const double d = coin(rng) ? pick(d_pool) : us(rng);
    double o;
    if (coin(rng)) {
      o = pick(or_pool);
    } else {
      o = normalize_orientation(uw(rng));
      if (!(o >= -kPi && o < kPi)) ++bad;
    }
    const double v = coin(rng) ? pick({0.0, 0.01, std::nextafter(0.01, 0.0), 0.02}) : uv(rng);

    const bool ahead = s > 1.0, behind = s < -1.0, par = s >= -1.0 && s <= 1.0;
    const bool left = d > 1.0, right = d < -1.0, inline_ = d >= -1.0 && d <= 1.0;
    const bool same = std::abs(o) <= a;
    const bool opposite = std::abs(o) >= b;
    const bool towards_l = d >= g && o > -b && o < -a;
    const bool towards_r = d <= -g && o > a && o < b;
    const bool away = std::abs(o) > a && std::abs(o) < b &&
                      ((d > -g && d < g) || (d >= g && o > a) || (d <= -g && o < -a));
    const bool moving = v >= 0.01, facing = v < 0.01;

    if (ahead + behind + par != 1 || left + right + inline_ != 1 || moving + facing != 1 ||
        same + opposite + towards_l + towards_r + away != 1) {
      ++bad;
      continue;
    }
    const std::string lon = describe_longitudinal(s, cfg), lat = describe_lateral(d, cfg);
    if (ahead && !ends_with(lon, " meters ahead")) ++bad;
    if (behind && !ends_with(lon, " meters behind")) ++bad;
    if (par && lon != "parallel with the ego") ++bad;
    if (left && !ends_with(lat, " meters left")) ++bad;
    if (right && !ends_with(lat, " meters right")) ++bad;
    if (inline_ && lat != "directly in line with the ego") ++bad;
    const int expected = same ? 0 : opposite ? 1 : (towards_l || towards_r) ? 2 : 3;
    const std::string phrase = describe_orientation(o, d, v, cfg);
    if (phrase != std::string(moving ? "moving " : "facing ") + or_tails[expected]) ++bad;
  }
  const double elapsed = seconds_since(t0);
  Outcome r;
  r.pass = frames >= 25 && mismatches == 0 && bad == 0 && elapsed < 10.0;
  r.detail = std::to_string(frames) + " frames, " + std::to_string(mismatches) + " golden mismatches, " +
             std::to_string(bad) + "/" + std::to_string(kFuzz) + " fuzz violations, " + fmt("%.2f s", elapsed);
  return r;
}

// ---------------------------------------------------------------------------
// 2. Frenet round trip

Outcome frenet_round_trip() {
  struct Case {
    std::string name;
    ReferencePath path;
    double half_width;
  };
  const std::vector<Case> cases{
      {"straight", ReferencePath(dualad::testing::straight_points(300.0, 0.0)), 5.0},
      {"circle", ReferencePath(dualad::testing::arc_points(30.0, kPi, 400)), 4.0},
      {"s_curve", ReferencePath(dualad::testing::s_curve_points()), 4.0},
  };
  std::mt19937_64 rng(7);
  double worst_pos = 0.0, worst_ang = 0.0;
  std::size_t n = 0;
  for (const auto& c : cases) {
    const double len = c.path.length();
    std::uniform_real_distribution<double> us(5.0, len - 5.0), ud(-c.half_width, c.half_width), ut(-kPi, kPi);
    for (int i = 0; i < 10000; ++i, ++n) {
      const FrenetPose fp{us(rng), ud(rng), ut(rng)};
      const CartesianPose cp = to_cartesian(c.path, fp);
      const FrenetPose back = to_frenet(c.path, cp);
      const CartesianPose again = to_cartesian(c.path, back);
      worst_pos = std::max({worst_pos, std::abs(back.s - fp.s), std::abs(back.d - fp.d),
                            std::hypot(again.x - cp.x, again.y - cp.y)});
      worst_ang = std::max({worst_ang, std::abs(wrap_angle(back.theta - fp.theta)),
                            std::abs(wrap_angle(again.theta - cp.theta))});
    }
  }
  Outcome r;
  r.pass = worst_pos <= 1e-6 && worst_ang <= 1e-6;
  r.detail = std::to_string(n) + " poses, max position error " + fmt("%.3g m", worst_pos) + ", max angle error " +
             fmt("%.3g rad", worst_ang);
  return r;
}

// ---------------------------------------------------------------------------
// 3. IDM

// 1 ms Heun integration of the car-following law behind a stationary obstacle
// whose bumper gap is `gap0` at t = 0; one sample per 0.1 s.
std::vector<double> idm_oracle(double v_init, double gap0, double horizon, const IdmParams& p) {
  auto accel = [&](double s, double v) {
    const double gap = std::max(gap0 - s, p.min_gap_floor);
    const double raw = p.a * (1.0 - std::pow(std::max(v, 0.0) / p.v0, p.delta) - std::pow(p.s_star / gap, 2.0));
    const double acc = std::clamp(raw, -p.max_brake, p.a);
    return v <= 0.0 && acc < 0.0 ? 0.0 : acc;
  };
  const double h = 1e-3;
  double s = 0.0, v = v_init;
  std::vector<double> out{v};
  const int steps = static_cast<int>(std::llround(horizon / 0.1));
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < 100; ++i) {
      const double a1 = accel(s, v);
      const double a2 = accel(s + h * v, std::max(0.0, v + h * a1));
      const double v_new = std::max(0.0, v + 0.5 * h * (a1 + a2));
      s += 0.5 * h * (v + v_new);
      v = v_new;
    }
    out.push_back(v);
  }
  return out;
}

Outcome idm_properties() {
  const IdmParams p;
  PlanningParams pp;
  pp.horizon = 15.0;
  const double road = 2000.0;
  const ReferencePath path(dualad::testing::straight_points(road));
  const double half_len = pp.vehicle.length / 2.0;

  // Free road from rest; the route end still acts as a distant stationary leader.
  const Trajectory free = idm_plan(ego_frame(0.0), path, 15.0, p, pp);
  const double v15 = free.states.back().speed;
  const bool converged = std::abs(v15 - p.v0) <= 0.1;
  const auto free_ref = idm_oracle(0.0, road - 0.5 - 20.0 - half_len, 15.0, p);

  // Stationary leader 30 m ahead of an ego at rest, closed loop in both modes.
  dualad::testing::ScenarioDoc doc("stationary_leader", 0.0);
  doc.agent("lead", "vehicle", 30.0, 0.0, 0.0, 0.0);
  const Scenario sc = doc.build();
  const auto planner = make_planner(PlannerKind::idm, PlannerConfig{});
  bool leader_ok = true;
  double min_final_gap = 1e9;
  for (SimMode m : {SimMode::non_reactive, SimMode::reactive}) {
    SimConfig cfg;
    cfg.mode = m;
    const SimTrace t = run(sc, *planner, nullptr, cfg);
    const auto& last = t.records.back();
    const OrientedBox e = ego_box({last.ego.x, last.ego.y, last.ego.theta}, cfg.vehicle);
    const auto& ag = last.agents.at(0);
    const double gap = box_distance(e, {{ag.x, ag.y, ag.theta}, 2.0, 4.7});
    min_final_gap = std::min(min_final_gap, gap);
    leader_ok = leader_ok && !t.collided() && gap > 0.0;
  }

  // Plan against the oracle: free road and a stationary leader.
  double worst = 0.0;
  for (std::size_t k = 0; k < free.states.size(); ++k) worst = std::max(worst, std::abs(free.states[k].speed - free_ref[k]));
  const Trajectory lead = idm_plan(ego_frame(0.0, {snapshot("lead", 30, 0, 0, 0)}), path, 15.0, p, pp);
  const auto lead_ref = idm_oracle(0.0, 30.0 - 4.7, 15.0, p);
  for (std::size_t k = 0; k < lead.states.size(); ++k) worst = std::max(worst, std::abs(lead.states[k].speed - lead_ref[k]));
  const Trajectory moving = idm_plan(ego_frame(9.0, {snapshot("lead", 60, 0, 0, 0)}), path, 15.0, p, pp);
  const auto moving_ref = idm_oracle(9.0, 60.0 - 4.7, 15.0, p);
  for (std::size_t k = 0; k < moving.states.size(); ++k) {
    worst = std::max(worst, std::abs(moving.states[k].speed - moving_ref[k]));
  }
  const bool oracle_ok = worst <= 1e-3;

  Outcome r;
  r.pass = converged && leader_ok && oracle_ok;
  r.detail = "v(15 s) from rest " + fmt("%.4f", v15) + " (need >= " + fmt("%.1f", p.v0 - 0.1) + ", ODE gives " +
             fmt("%.4f", free_ref.back()) + ") " + (converged ? "ok" : "FAIL") + "; stationary leader min final gap " +
             fmt("%.2f m", min_final_gap) + (leader_ok ? " ok" : " FAIL") + "; oracle max error " +
             fmt("%.2e m/s", worst) + (oracle_ok ? " ok" : " FAIL");
  return r;
}

// ---------------------------------------------------------------------------
// 4. Arbiter

Outcome arbiter_property() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uv(0.0, 20.0), us(-10.0, 30.0);
  std::size_t bad = 0;
  constexpr int kPairs = 100000;
  for (int i = 0; i < kPairs; ++i) {
    const double v_rule = i % 10 == 0 ? 15.0 : uv(rng);
    ReasonerDecision d;
    d.suggested_speed = i % 7 == 0 ? std::round(us(rng)) : us(rng);
    const double out = arbitrate(v_rule, d);
    const double clamped = d.suggested_speed < 0.0 ? 0.0 : d.suggested_speed > 15.0 ? 15.0 : d.suggested_speed;
    const double expected = v_rule < clamped ? v_rule : clamped;
    if (out != expected || out > v_rule) ++bad;
  }
  return {bad == 0, std::to_string(bad) + "/" + std::to_string(kPairs) + " violations"};
}

// ---------------------------------------------------------------------------
// 5. Critical suite

struct SuiteStats {
  double mean = 0.0;
  std::size_t collisions = 0;
};

SuiteStats suite(const std::vector<Scenario>& scs, PlannerKind planner, ReasonerKind reasoner, SimMode mode,
                 const fs::path& tmp) {
  RunConfig cfg;
  cfg.planner = planner;
  cfg.reasoner = reasoner;
  cfg.mode = mode;
  cfg.sim.mode = mode;
  const auto outcomes = simulate_all(scs, cfg, mode, tmp, 0);
  SuiteStats s;
  for (const auto& o : outcomes) {
    s.mean += o.card.score;
    s.collisions += o.card.collision;
  }
  s.mean /= static_cast<double>(outcomes.size());
  return s;
}

Outcome critical_suite(const fs::path& tmp) {
  const auto t0 = Clock::now();
  const auto scs = load_corpus(source_dir() / "data" / "critical");
  bool pass = scs.size() == 10;
  std::string detail;
  for (PlannerKind pk : {PlannerKind::idm, PlannerKind::lattice}) {
    for (SimMode m : {SimMode::reactive, SimMode::non_reactive}) {
      const SuiteStats bare = suite(scs, pk, ReasonerKind::none, m, tmp);
      const SuiteStats dual = suite(scs, pk, ReasonerKind::mock, m, tmp);
      const bool ok = dual.mean > bare.mean && dual.collisions < bare.collisions;
      pass = pass && ok;
      detail += std::string(to_string(pk)) + (m == SimMode::reactive ? " R" : " NR") + ": " +
                fmt("%.1f", bare.mean) + "/" + std::to_string(bare.collisions) + "c -> " + fmt("%.1f", dual.mean) +
                "/" + std::to_string(dual.collisions) + "c; ";
    }
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 300.0;
  return {pass, detail + fmt("%.1f s", elapsed)};
}

// ---------------------------------------------------------------------------
// 6. Crossing pedestrian

Outcome crossing_pedestrian() {
  const Scenario sc = load_scenario(source_dir() / "data" / "critical" / "crit_ped_a.json");
  const auto planner = make_planner(PlannerKind::idm, PlannerConfig{});
  SimConfig cfg;
  const SimTrace bare = run(sc, *planner, nullptr, cfg);
  MockBackend mock;
  const SimTrace dual = run(sc, *planner, &mock, cfg, "mock");
  const auto t_col = bare.first_collision_time();
  std::optional<double> t_drop;
  for (const auto& r : dual.records) {
    if (r.cap < r.v_rule) {
      t_drop = r.t;
      break;
    }
  }
  Outcome out;
  out.pass = t_col && t_drop && !dual.collided() && *t_col - *t_drop >= 2.0;
  out.detail = "bare collision at " + (t_col ? fmt("%.1f s", *t_col) : std::string("none")) + ", cap drops at " +
               (t_drop ? fmt("%.1f s", *t_drop) : std::string("never")) + ", capped run " +
               (dual.collided() ? "collides" : "collision-free");
  return out;
}

// ---------------------------------------------------------------------------
// 7. Determinism

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
  }
  return files;
}

Outcome determinism(const fs::path& tmp) {
  std::map<std::string, std::string> runs[2];
  for (int i = 0; i < 2; ++i) {
    RunConfig cfg;
    cfg.corpus = source_dir() / "data" / "corpus";
    cfg.out = tmp / ("bench" + std::to_string(i));
    cfg.planner = PlannerKind::lattice;
    cfg.reasoner = ReasonerKind::mock;
    cfg.k = 5;
    cfg.tag = "det";
    cfg.workers = i == 0 ? 1 : 3;
    std::ostringstream sink;
    if (cmd_bench(cfg, sink) != kExitOk) return {false, "cmd_bench failed: " + sink.str()};
    runs[i] = snapshot_dir(cfg.out);
  }
  std::size_t differing = 0;
  for (const auto& [name, body] : runs[0]) {
    auto it = runs[1].find(name);
    differing += it == runs[1].end() || it->second != body;
  }
  differing += runs[1].size() > runs[0].size() ? runs[1].size() - runs[0].size() : 0;
  const auto summary = nlohmann::json::parse(runs[0].at("det_summary.json"));
  std::size_t hashes = 0;
  for (const char* mode : {"nr", "r"}) hashes += summary.at(mode).at("trace_hashes").size();
  return {differing == 0 && hashes > 0, std::to_string(runs[0].size()) + " files, " + std::to_string(hashes) +
                                             " trace hashes, " + std::to_string(differing) + " differing"};
}

// ---------------------------------------------------------------------------
// 8. Sampling planner

Outcome sampling_planner() {
  const ReferencePath road(dualad::testing::straight_points(600.0));
  const SamplingPlannerConfig base;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ux(6, 70), uy(-6, 6), ut(-kPi, kPi), uv(0, 8), ue(0, 14);
  std::uniform_int_distribution<int> un(0, 5);
  std::size_t scale_bad = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<AgentSnapshot> agents;
    const int n = un(rng);
    for (int j = 0; j < n; ++j) agents.push_back(snapshot("a" + std::to_string(j), ux(rng), uy(rng), ut(rng), uv(rng)));
    const WorldFrame f = ego_frame(ue(rng), agents);
    int ref = -2;
    try {
      ref = sampling_plan(f, road, 15.0, base).candidate;
    } catch (const NoFeasibleTrajectory&) {
      ref = -3;
    }
    for (double lambda : {0.01, 0.5, 2.0, 37.0, 1e4}) {
      SamplingPlannerConfig s = base;
      s.cost_weights = base.cost_weights.scaled(lambda);
      int got = -2;
      try {
        got = sampling_plan(f, road, 15.0, s).candidate;
      } catch (const NoFeasibleTrajectory&) {
        got = -3;
      }
      scale_bad += got != ref;
    }
  }

  // Replan from the closed-loop states of every corpus scenario and check what gets selected.
  std::vector<Scenario> all = load_corpus(source_dir() / "data" / "corpus");
  for (auto& sc : load_corpus(source_dir() / "data" / "critical")) all.push_back(std::move(sc));
  PlannerConfig pc;
  const auto planner = make_planner(PlannerKind::sampling, pc);
  const PlanningParams& pp = pc.planning;
  const KinematicLimits& lim = pc.sampling.limits;
  std::size_t plans = 0, fallbacks = 0, limit_bad = 0, margin_bad = 0;
  for (const auto& sc : all) {
    SimConfig cfg;
    const SimTrace trace = run(sc, *planner, nullptr, cfg);
    for (std::size_t k = 0; k < trace.records.size(); k += 3) {
      const auto& rec = trace.records[k];
      WorldFrame f = frame_from_scenario(sc, k);
      f.ego.pose = {rec.ego.x, rec.ego.y, rec.ego.theta};
      f.ego.speed = rec.ego.v;
      f.ego.accel = rec.accel;
      f.ego.curvature = std::tan(rec.ego.steering) / cfg.vehicle.wheelbase;
      const double cap = planner->desired_speed(f);
      Trajectory t;
      try {
        t = sampling_plan(f, sc.centerline, cap, pc.sampling, pc.idm, pp);
      } catch (const NoFeasibleTrajectory&) {
        continue;
      }
      if (t.fallback) {
        ++fallbacks;
        continue;
      }
      ++plans;
      for (const auto& s : t.states) {
        if (s.speed < -1e-9 || s.speed > cap + 1e-6 || std::abs(s.accel) > lim.max_accel + 1e-9 ||
            std::abs(s.curvature) > lim.max_curvature + 1e-9 ||
            s.speed * s.speed * std::abs(s.curvature) > lim.max_lat_accel + 1e-9) {
          ++limit_bad;
          break;
        }
      }
      const auto obstacles = predict_obstacles(f, sc.centerline, pp);
      bool clash = false;
      for (std::size_t j = 1; j < t.states.size() && !clash; ++j) {
        const OrientedBox e = ego_box(t.states[j].pose, pp.vehicle);
        for (const auto& track : obstacles) {
          if (boxes_collide(e, track[std::min(j, track.size() - 1)].inflated(pp.safety_margin))) {
            clash = true;
            break;
          }
        }
      }
      margin_bad += clash;
    }
  }
  Outcome r;
  r.pass = scale_bad == 0 && limit_bad == 0 && margin_bad == 0 && plans > 0;
  r.detail = std::to_string(scale_bad) + "/500 scaling mismatches; " + std::to_string(plans) + " corpus plans (" +
             std::to_string(fallbacks) + " fallbacks skipped), " + std::to_string(limit_bad) + " limit and " +
             std::to_string(margin_bad) + " clearance violations";
  return r;
}

// ---------------------------------------------------------------------------
// 9. Worst-K

Outcome worst_k() {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> score(0, 400);
  std::vector<std::pair<std::string, double>> table;
  for (int i = 0; i < 2000; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "scn_%04d", i);
    table.emplace_back(id, score(rng) * 0.25);  // coarse grid forces ties
  }
  std::shuffle(table.begin(), table.end(), rng);

  // Oracle: ids in lexical order, then a stable sort by score.
  auto oracle = table;
  std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::stable_sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

  bool pass = true;
  std::string detail;
  for (std::size_t k : {24u, 55u}) {
    const BenchmarkSet set = select_worst_k(table, k);
    std::vector<std::string> want;
    for (std::size_t i = 0; i < k; ++i) want.push_back(oracle[i].first);
    const bool ok = set.scenario_ids == want && set.k == k;
    pass = pass && ok;
    detail += "k=" + std::to_string(k) + (ok ? " match; " : " MISMATCH; ");
  }
  bool threw = false;
  try {
    select_worst_k(table, 2001);
  } catch (const InsufficientResults&) {
    threw = true;
  }
  pass = pass && threw;
  return {pass, detail + (threw ? "k=2001 rejected" : "k=2001 accepted")};
}

// ---------------------------------------------------------------------------
// 10. Remote reasoner against a local stub

Outcome remote_reasoner() {
  httplib::Server server;
  server.Post("/valid", [](const httplib::Request& req, httplib::Response& res) {
    const auto in = nlohmann::json::parse(req.body);
    nlohmann::json msg;
    msg["content"] = in.contains("messages") ? R"(Sure. {"speed": 4.5, "rationale": "stub"})" : "{}";
    nlohmann::json j;
    j["choices"] = nlohmann::json::array({nlohmann::json{{"message", msg}}});
    res.set_content(j.dump(), "application/json");
  });
  server.Post("/malformed", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": [{"message": {"content": "no speed here"}}]})", "application/json");
  });
  server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content("{}", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  ReasonerRequest req;
  req.system = system_instructions();
  req.user = build_user_message({}, 3.0, 15.0);
  ReasonerBackendConfig cfg;
  cfg.max_retries = 0;
  cfg.timeout = 0.5;

  cfg.endpoint_url = base + "/valid";
  RemoteBackend valid(cfg);
  const auto dv = valid.decide(req);
  const bool valid_ok = dv.source == DecisionSource::remote_llm && dv.suggested_speed == 4.5 && valid.failure_count() == 0;

  cfg.endpoint_url = base + "/malformed";
  RemoteBackend malformed(cfg);
  const auto dm = malformed.decide(req);
  const bool malformed_ok = dm.source == DecisionSource::fallback && malformed.failure_count() == 1;

  cfg.endpoint_url = base + "/slow";
  RemoteBackend slow(cfg);
  const auto t0 = Clock::now();
  const auto ds = slow.decide(req);
  const double waited = seconds_since(t0);
  const bool timeout_ok = ds.source == DecisionSource::fallback && slow.failure_count() == 1 && waited < 1.4;

  server.stop();
  th.join();
  return {valid_ok && malformed_ok && timeout_ok,
          std::string("valid ") + (valid_ok ? "ok" : "FAIL") + ", malformed " + (malformed_ok ? "ok" : "FAIL") +
              ", timeout " + (timeout_ok ? "ok" : "FAIL") + fmt(" (%.2f s)", waited)};
}

}  // namespace

int main() {
  const fs::path tmp = fs::temp_directory_path() / ("dualad_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(tmp);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"encoder goldens and branch fuzz", encoder_suite},
      {"frenet round trip", frenet_round_trip},
      {"idm properties", idm_properties},
      {"arbiter property", arbiter_property},
      {"critical suite improvement", [&] { return critical_suite(tmp); }},
      {"crossing pedestrian", crossing_pedestrian},
      {"bench determinism", [&] { return determinism(tmp); }},
      {"sampling planner", sampling_planner},
      {"worst-k selection", worst_k},
      {"remote reasoner stub", remote_reasoner},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " AC" << i + 1 << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::error_code ec;
  fs::remove_all(tmp, ec);
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
