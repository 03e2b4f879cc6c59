#include "dualad/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "json.hpp"

#include "dualad/error.hpp"
#include "dualad/hash.hpp"

namespace dualad {

const char* to_string(SimMode m) { return m == SimMode::reactive ? "reactive" : "non_reactive"; }

SimMode sim_mode_from_string(const std::string& s) {
  if (s == "non_reactive") return SimMode::non_reactive;
  if (s == "reactive") return SimMode::reactive;
  throw ConfigError("mode", "unknown mode '" + s + "'");
}

const char* to_string(ControllerKind c) { return c == ControllerKind::lqr ? "lqr" : "perfect_tracking"; }

ControllerKind controller_kind_from_string(const std::string& s) {
  if (s == "lqr") return ControllerKind::lqr;
  if (s == "perfect_tracking") return ControllerKind::perfect_tracking;
  throw ConfigError("sim.controller", "unknown controller '" + s + "'");
}

namespace {

std::size_t ratio_steps(double period, double step, const char* field) {
  const double r = period / step;
  const auto n = static_cast<long long>(std::llround(r));
  if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-6) {
    throw ConfigError(field, "must be a positive multiple of the step");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

void SimConfig::validate() const {
  if (!(step > 0.0)) throw ConfigError("sim.step", "must be > 0");
  if (!(duration > 0.0)) throw ConfigError("sim.duration", "must be > 0");
  ratio_steps(duration, step, "sim.duration");
  ratio_steps(plan_period, step, "sim.plan_period");
  if (!(max_accel > 0.0)) throw ConfigError("sim.max_accel", "must be > 0");
  if (!(hard_brake_decel > 0.0)) throw ConfigError("sim.hard_brake_decel", "must be > 0");
  if (!(lqr.q_lateral >= 0 && lqr.q_heading >= 0 && lqr.q_steering >= 0 && lqr.r_steering_rate > 0)) {
    throw ConfigError("sim.lqr", "need Q >= 0 and R > 0");
  }
  background_idm.validate();
  encoder.validate();
  reasoner.validate(step);
}

std::size_t SimConfig::num_steps() const { return ratio_steps(duration, step, "sim.duration"); }

// ---------------------------------------------------------------------------
// Background traffic

Background::Background(const Scenario& scenario, SimMode mode, const IdmParams& idm, double step)
    : scenario_(&scenario), mode_(mode), idm_(idm), step_(step) {
  for (const auto& rec : scenario.agents) {
    const auto& st0 = rec.states.front();
    BackgroundAgent a;
    a.id = rec.id;
    a.kind = rec.kind;
    a.width = rec.width;
    a.length = rec.length;
    a.pose = {st0.x, st0.y, st0.theta};
    a.speed = st0.speed;
    std::optional<ReferencePath> path;
    if (mode == SimMode::reactive && rec.kind == AgentKind::vehicle) {
      std::vector<Point2> pts;
      for (const auto& s : rec.states) {
        if (pts.empty() || std::hypot(s.x - pts.back().x, s.y - pts.back().y) >= 0.05) pts.push_back({s.x, s.y});
      }
      if (pts.size() >= 2) {
        path.emplace(std::move(pts));
        a.reactive = true;
        a.s = to_frenet(*path, a.pose).s;
      }
    }
    agents_.push_back(std::move(a));
    paths_.push_back(std::move(path));
  }
}

void Background::advance(std::size_t k, const OrientedBox& ego, double ego_speed) {
  const std::size_t next = k + 1;
  std::vector<BackgroundAgent> updated = agents_;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto& rec = scenario_->agents[i];
    auto& out = updated[i];
    if (!agents_[i].reactive) {
      const auto& st = rec.states[std::min(next, rec.states.size() - 1)];
      out.pose = {st.x, st.y, st.theta};
      out.speed = st.speed;
      continue;
    }
    const auto& self = agents_[i];
    const ReferencePath& path = *paths_[i];

    struct Other {
      OrientedBox box;
      double speed;
    };
    std::vector<Other> others;
    others.push_back({ego, ego_speed});
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j != i) others.push_back({{agents_[j].pose, agents_[j].width, agents_[j].length}, agents_[j].speed});
    }

    double gap = std::numeric_limits<double>::infinity();
    double closing = 0.0;
    for (const auto& o : others) {
      const double dist = std::hypot(o.box.center.x - self.pose.x, o.box.center.y - self.pose.y);
      if (dist > 80.0) continue;
      const FrenetPose fp = to_frenet(path, o.box.center, self.s);
      if (fp.s <= 0.0 || std::abs(fp.d) > 1.5) continue;
      const double g = fp.s - 0.5 * (self.length + o.box.length);
      if (g < gap) {
        gap = g;
        closing = self.speed - o.speed * std::cos(fp.theta);
      }
    }
    IdmParams p = idm_;
    p.v0 = rec.states[std::min(k, rec.states.size() - 1)].speed;
    const double acc = idm_accel(self.speed, std::max(gap, p.min_gap_floor), p, closing);
    const double v_new = std::max(0.0, self.speed + acc * step_);
    const double advance = std::max(0.0, 0.5 * (self.speed + v_new) * step_);
    const double s_new = std::min(self.s + advance, path.length());
    const Point2 pos = path.position_at(s_new);
    const CartesianPose pose{pos.x, pos.y, wrap_angle(path.heading_at(s_new))};
    const OrientedBox moved{pose, self.width, self.length};
    bool blocked = false;
    for (const auto& o : others) {
      if (boxes_collide(moved, o.box)) {
        blocked = true;
        break;
      }
    }
    if (blocked) {
      out.speed = 0.0;
      continue;
    }
    out.s = s_new;
    out.pose = pose;
    out.speed = s_new >= path.length() ? 0.0 : v_new;
  }
  agents_ = std::move(updated);
}

// ---------------------------------------------------------------------------
// Trace

std::size_t SimTrace::reasoner_failures() const {
  return records.empty() ? 0 : records.back().reasoner_failures;
}

bool SimTrace::collided() const {
  return std::any_of(records.begin(), records.end(), [](const TraceRecord& r) { return !r.collisions.empty(); });
}

std::optional<double> SimTrace::first_collision_time() const {
  for (const auto& r : records) {
    if (!r.collisions.empty()) return r.t;
  }
  return std::nullopt;
}

std::string SimTrace::serialize() const {
  using oj = nlohmann::ordered_json;
  std::string out;
  for (const auto& r : records) {
    oj j;
    j["schema"] = kTraceSchema;
    j["scenario_id"] = scenario_id;
    j["planner"] = planner;
    j["reasoner"] = reasoner;
    j["mode"] = to_string(mode);
    j["seed"] = seed;
    j["step"] = r.step;
    j["t"] = r.t;
    j["ego"] = {{"x", r.ego.x},         {"y", r.ego.y},   {"theta", r.ego.theta}, {"v", r.ego.v},
                {"steering", r.ego.steering}, {"a", r.accel}, {"s", r.ego_s},         {"d", r.ego_d}};
    j["v_rule"] = r.v_rule;
    j["cap"] = r.cap;
    j["trajectory"] = {{"planned", r.planned},
                       {"candidate", r.candidate},
                       {"fallback", r.fallback},
                       {"emergency_brake", r.emergency_brake},
                       {"hard_brake", r.hard_brake}};
    if (r.decision) {
      j["reasoner_decision"] = {{"called", r.reasoner_called},
                                {"speed", r.decision->suggested_speed},
                                {"source", to_string(r.decision->source)},
                                {"clamped", r.decision->clamped},
                                {"rationale", r.decision->rationale}};
    } else {
      j["reasoner_decision"] = nullptr;
    }
    oj agents = oj::array();
    for (const auto& a : r.agents) {
      agents.push_back({{"id", a.id}, {"x", a.x}, {"y", a.y}, {"theta", a.theta}, {"v", a.speed}});
    }
    j["agents"] = std::move(agents);
    j["collisions"] = r.collisions;
    j["reasoner_failures"] = r.reasoner_failures;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string SimTrace::hash() const { return fnv1a_hex(serialize()); }

// ---------------------------------------------------------------------------
// Closed loop

namespace {

WorldFrame make_frame(const Scenario& sc, std::size_t k, double t, const EgoDynamicsState& ego, double accel,
                      double wheelbase, const Background& bg) {
  WorldFrame f;
  f.time = t;
  f.step = k;
  f.ego.pose = {ego.x, ego.y, ego.theta};
  f.ego.speed = ego.v;
  f.ego.accel = accel;
  f.ego.curvature = std::tan(ego.steering) / wheelbase;
  f.speed_limit = sc.speed_limit;
  f.red_stop_lines = sc.red_stop_lines(t);
  f.scenario = &sc;
  const auto& agents = bg.agents();
  f.agents.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    f.agents.push_back({a.id, a.kind, a.width, a.length, a.pose, a.speed, i});
  }
  return f;
}

ReasonerRequest make_request(const WorldFrame& frame, const Scenario& sc, const SimConfig& cfg, bool with_prompt) {
  ReasonerRequest req;
  req.step = frame.step;
  req.frame = &frame;
  if (with_prompt) {
    req.system = system_instructions();
    req.user = build_user_message(encode_scene(frame, sc.centerline, cfg.encoder), frame.ego.speed, frame.speed_limit,
                                  cfg.reasoner.prompt_max_length);
  }
  return req;
}

}  // namespace

SimTrace run(const Scenario& scenario, const Planner& planner, ReasonerBackend* backend, const SimConfig& cfg,
             const std::string& reasoner_name) {
  cfg.validate();
  const std::size_t n = cfg.num_steps();
  const std::size_t plan_every = ratio_steps(cfg.plan_period, cfg.step, "sim.plan_period");
  const std::size_t call_every = ratio_steps(cfg.reasoner.call_period, cfg.step, "reasoner.call_period");
  const bool async = backend != nullptr && cfg.reasoner.async_mode && backend->remote();

  const EgoController controller(cfg);
  Background bg(scenario, cfg.mode, cfg.background_idm, cfg.step);
  EgoDynamicsState ego{scenario.ego_init.x, scenario.ego_init.y, scenario.ego_init.theta, scenario.ego_init.speed, 0.0};
  double accel = 0.0;

  SimTrace trace;
  trace.scenario_id = scenario.id;
  trace.planner = to_string(planner.kind());
  trace.reasoner = reasoner_name;
  trace.mode = cfg.mode;
  trace.seed = cfg.seed;
  trace.records.reserve(n + 1);

  std::optional<ReasonerDecision> decision;
  std::future<ReasonerDecision> pending;
  Trajectory traj;
  std::size_t plan_step = 0;
  bool emergency = false;
  bool hard = false;

  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * cfg.step;
    const WorldFrame frame = make_frame(scenario, k, t, ego, accel, cfg.vehicle.wheelbase, bg);
    TraceRecord rec;
    rec.step = k;
    rec.t = t;
    rec.ego = ego;
    rec.accel = accel;
    const FrenetPose efp = to_frenet(scenario.centerline, frame.ego.pose);
    rec.ego_s = efp.s;
    rec.ego_d = efp.d;

    const double v_rule = planner.desired_speed(frame);
    if (backend != nullptr) {
      if (pending.valid() && pending.wait_for(std::chrono::seconds(0)) == std::future_status::ready) {
        decision = pending.get();
      }
      if (k % call_every == 0) {
        if (async) {
          if (!pending.valid()) {
            ReasonerRequest req = make_request(frame, scenario, cfg, true);
            req.frame = nullptr;
            pending = std::async(std::launch::async, [backend, req] { return backend->decide(req); });
          }
        } else {
          decision = backend->decide(make_request(frame, scenario, cfg, backend->uses_prompt()));
          rec.reasoner_called = true;
        }
      }
    }
    const double cap = decision ? arbitrate(v_rule, *decision) : v_rule;
    const bool hard_now = decision && requests_hard_brake(*decision);

    const bool replan = k % plan_every == 0 || traj.states.empty() || hard_now != hard;
    if (replan) {
      emergency = false;
      try {
        traj = planner.plan(frame, scenario.centerline, cap);
      } catch (const NoFeasibleTrajectory&) {
        traj = emergency_brake(frame.ego, cfg.hard_brake_decel, 8.0, cfg.step);
        emergency = true;
      }
      hard = hard_now;
      if (hard) traj = hard_brake(traj, cfg.hard_brake_decel);
      plan_step = k;
    }
    rec.v_rule = v_rule;
    rec.cap = cap;
    rec.planned = replan;
    rec.candidate = traj.candidate;
    rec.fallback = traj.fallback;
    rec.emergency_brake = emergency;
    rec.hard_brake = hard;
    rec.decision = decision;

    const OrientedBox eb = ego_box(frame.ego.pose, cfg.vehicle);
    for (const auto& a : frame.agents) {
      rec.agents.push_back({a.id, a.pose.x, a.pose.y, a.pose.theta, a.speed});
      if (boxes_collide(eb, agent_box(a))) rec.collisions.push_back(a.id);
    }
    if (backend != nullptr && !pending.valid()) rec.reasoner_failures = backend->failure_count();
    if (backend != nullptr && pending.valid() && !trace.records.empty()) {
      rec.reasoner_failures = trace.records.back().reasoner_failures;
    }
    trace.records.push_back(std::move(rec));
    if (k == n) break;

    const double t_off = static_cast<double>(k - plan_step) * cfg.step;
    accel = controller.accel_command(ego, traj, t_off);
    ego = controller.step(ego, traj, t_off);
    bg.advance(k, eb, frame.ego.speed);
  }
  if (pending.valid()) pending.wait();
  if (backend != nullptr && !trace.records.empty()) trace.records.back().reasoner_failures = backend->failure_count();
  return trace;
}

}  // namespace dualad
