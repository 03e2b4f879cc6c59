#include <algorithm>
#include <cmath>
#include <limits>

#include "dualad/error.hpp"
#include "dualad/planners.hpp"

namespace dualad {

namespace {

struct Leader {
  double s;      // absolute centerline arc length of the leader centre (or stop line)
  double speed;  // longitudinal speed along the centerline, may be negative
  double half_length;
};

std::size_t step_count(double horizon, double step) {
  return static_cast<std::size_t>(std::llround(horizon / step));
}

}  // namespace

void IdmParams::validate() const {
  if (!(a > 0.0)) throw ConfigError("idm.a", "must be > 0");
  if (!(v0 > 0.0)) throw ConfigError("idm.v0", "must be > 0");
  if (!(s_star > 0.0)) throw ConfigError("idm.s_star", "must be > 0");
  if (!(delta > 0.0)) throw ConfigError("idm.delta", "must be > 0");
  if (!(min_gap_floor > 0.0)) throw ConfigError("idm.min_gap_floor", "must be > 0");
  if (!(max_brake > 0.0)) throw ConfigError("idm.max_brake", "must be > 0");
}

double idm_accel(double v, double gap, const IdmParams& p, double closing_speed) {
  if (!(gap > 0.0)) throw NonPositiveGap("IDM gap must be positive, got " + std::to_string(gap));
  double free_term;
  if (p.v0 > 1e-9) {
    free_term = std::pow(std::max(v, 0.0) / p.v0, p.delta);
  } else {
    // Zero target speed: brake while moving, hold once stopped.
    free_term = v > 1e-9 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  double desired_gap = p.s_star;
  if (p.dynamic_gap) {
    desired_gap = p.s0 + std::max(0.0, v * p.time_headway + v * closing_speed / (2.0 * std::sqrt(p.a * p.comfortable_decel)));
  }
  const double ratio = desired_gap / gap;
  const double acc = p.a * (1.0 - free_term - ratio * ratio);
  return std::clamp(acc, -p.max_brake, p.a);
}

double Trajectory::max_speed() const {
  double m = 0.0;
  for (const auto& s : states) m = std::max(m, s.speed);
  return m;
}

double desired_speed(const WorldFrame& frame, const PlanningParams& params) {
  return params.desired_speed.value_or(frame.speed_limit);
}

std::vector<std::vector<OrientedBox>> predict_agents(const WorldFrame& frame, double horizon, double step,
                                                     PredictionMode mode) {
  const std::size_t n = step_count(horizon, step);
  std::vector<std::vector<OrientedBox>> out;
  out.reserve(frame.agents.size());
  for (const auto& a : frame.agents) {
    std::vector<OrientedBox> boxes;
    boxes.reserve(n + 1);
    const bool replay = mode == PredictionMode::log_replay && frame.scenario != nullptr &&
                        a.track < frame.scenario->agents.size();
    for (std::size_t k = 0; k <= n; ++k) {
      if (replay) {
        const auto& states = frame.scenario->agents[a.track].states;
        const auto& st = states[std::min(frame.step + k, states.size() - 1)];
        boxes.push_back({{st.x, st.y, st.theta}, a.width, a.length});
      } else {
        const double t = static_cast<double>(k) * step;
        const double dist = a.speed * t;
        boxes.push_back({{a.pose.x + dist * std::cos(a.pose.theta), a.pose.y + dist * std::sin(a.pose.theta),
                          a.pose.theta},
                         a.width,
                         a.length});
      }
    }
    out.push_back(std::move(boxes));
  }
  return out;
}

std::vector<std::vector<OrientedBox>> predict_obstacles(const WorldFrame& frame, const ReferencePath& path,
                                                        const PlanningParams& params) {
  auto out = predict_agents(frame, params.horizon, params.step, params.prediction);
  if (frame.red_stop_lines.empty()) return out;
  const double ego_s = to_frenet(path, frame.ego.pose).s;
  const std::size_t n = step_count(params.horizon, params.step);
  for (double stop_s : frame.red_stop_lines) {
    if (stop_s < ego_s + 0.5 * params.vehicle.length || stop_s > path.length()) continue;
    constexpr double kDepth = 0.5;
    const double centre = std::min(stop_s + 0.5 * kDepth, path.length());
    const OrientedBox wall{to_cartesian(path, {centre, 0.0, 0.0}), 8.0, kDepth};
    out.emplace_back(n + 1, wall);
  }
  return out;
}

Trajectory idm_plan(const WorldFrame& frame, const ReferencePath& path, double cap, const IdmParams& idm,
                    const PlanningParams& params) {
  const double ego_s = to_frenet(path, frame.ego.pose).s;
  const double ego_half = 0.5 * params.vehicle.length;
  IdmParams p = idm;
  p.v0 = std::max(0.0, std::min(desired_speed(frame, params), cap));

  std::vector<Leader> leaders;
  for (const auto& a : frame.agents) {
    const FrenetPose fp = to_frenet(path, a.pose, ego_s);
    if (std::abs(fp.d) <= params.half_lane_width && fp.s > 0.0) {
      leaders.push_back({ego_s + fp.s, a.speed * std::cos(fp.theta), 0.5 * a.length});
    }
  }
  for (double stop_s : frame.red_stop_lines) {
    if (stop_s >= ego_s + ego_half) leaders.push_back({stop_s, 0.0, 0.0});
  }
  // End of route acts as a stationary obstacle.
  leaders.push_back({path.length() - 0.5, 0.0, 0.0});

  auto accel = [&](double t, double s, double v) {
    double gap = std::numeric_limits<double>::infinity();
    double closing = 0.0;
    for (const auto& l : leaders) {
      const double g = l.s + l.speed * t - l.half_length - s - ego_half;
      if (g < gap) {
        gap = g;
        closing = v - l.speed;
      }
    }
    const double vv = std::max(v, 0.0);
    double acc = idm_accel(vv, std::max(gap, p.min_gap_floor), p, closing);
    if (vv <= 0.0 && acc < 0.0) acc = 0.0;
    return acc;
  };

  const std::size_t n = step_count(params.horizon, params.step);
  const double h = params.step;
  Trajectory traj;
  traj.horizon = params.horizon;
  traj.states.reserve(n + 1);
  double s = ego_s;
  double v = frame.ego.speed;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * h;
    const double acc = accel(t, s, v);
    const double s_clamped = std::clamp(s, 0.0, path.length());
    traj.states.push_back(
        {t, to_cartesian(path, {s_clamped, 0.0, 0.0}), v, acc, path.curvature_at(s_clamped)});
    if (k == n) break;
    // Classical RK4 on (s, v), 10 substeps per output step; speed never drops below zero.
    constexpr int kSub = 10;
    const double hs = h / kSub;
    for (int i = 0; i < kSub; ++i) {
      const double ts = t + i * hs;
      const double k1s = std::max(v, 0.0), k1v = accel(ts, s, v);
      const double v2 = v + 0.5 * hs * k1v;
      const double k2s = std::max(v2, 0.0), k2v = accel(ts + 0.5 * hs, s + 0.5 * hs * k1s, v2);
      const double v3 = v + 0.5 * hs * k2v;
      const double k3s = std::max(v3, 0.0), k3v = accel(ts + 0.5 * hs, s + 0.5 * hs * k2s, v3);
      const double v4 = v + hs * k3v;
      const double k4s = std::max(v4, 0.0), k4v = accel(ts + hs, s + hs * k3s, v4);
      s += hs / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
      v += hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      v = std::max(v, 0.0);
    }
  }
  return traj;
}

Trajectory hard_brake(const Trajectory& traj, double decel) {
  Trajectory out;
  out.horizon = traj.horizon;
  out.fallback = traj.fallback;
  out.candidate = traj.candidate;
  if (traj.states.empty()) return out;
  std::vector<double> cum(traj.states.size(), 0.0);
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    const auto& a = traj.states[i - 1].pose;
    const auto& b = traj.states[i].pose;
    cum[i] = cum[i - 1] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double v0 = traj.states.front().speed;
  const double t_stop = decel > 0.0 ? v0 / decel : 0.0;
  for (const auto& st : traj.states) {
    const double t = std::min(st.t, t_stop);
    const double dist = v0 * t - 0.5 * decel * t * t;
    const double v = std::max(0.0, v0 - decel * st.t);
    auto it = std::upper_bound(cum.begin(), cum.end(), dist);
    CartesianPose pose;
    double curvature = 0.0;
    if (it == cum.end()) {
      pose = traj.states.back().pose;
      curvature = traj.states.back().curvature;
    } else if (it == cum.begin()) {
      pose = traj.states.front().pose;
      curvature = traj.states.front().curvature;
    } else {
      const std::size_t i = static_cast<std::size_t>(it - cum.begin());
      const double seg = cum[i] - cum[i - 1];
      const double w = seg > 0.0 ? (dist - cum[i - 1]) / seg : 0.0;
      const auto& a = traj.states[i - 1];
      const auto& b = traj.states[i];
      pose = {a.pose.x + w * (b.pose.x - a.pose.x), a.pose.y + w * (b.pose.y - a.pose.y),
              a.pose.theta + w * wrap_angle(b.pose.theta - a.pose.theta)};
      curvature = a.curvature + w * (b.curvature - a.curvature);
    }
    out.states.push_back({st.t, pose, v, v > 0.0 ? -decel : 0.0, curvature});
  }
  return out;
}

Trajectory emergency_brake(const EgoSnapshot& ego, double decel, double horizon, double step) {
  const std::size_t n = step_count(horizon, step);
  Trajectory out;
  out.horizon = horizon;
  out.fallback = true;
  const double v0 = ego.speed;
  const double t_stop = decel > 0.0 ? v0 / decel : 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * step;
    const double tc = std::min(t, t_stop);
    const double dist = v0 * tc - 0.5 * decel * tc * tc;
    const double v = std::max(0.0, v0 - decel * t);
    out.states.push_back({t,
                          {ego.pose.x + dist * std::cos(ego.pose.theta), ego.pose.y + dist * std::sin(ego.pose.theta),
                           ego.pose.theta},
                          v,
                          v > 0.0 ? -decel : 0.0,
                          0.0});
  }
  return out;
}

double min_clearance(const Trajectory& traj, const std::vector<std::vector<OrientedBox>>& obstacles,
                     const VehicleParams& vehicle) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const OrientedBox ego = ego_box(traj.states[k].pose, vehicle);
    for (const auto& track : obstacles) {
      if (track.empty()) continue;
      best = std::min(best, box_distance(ego, track[std::min(k, track.size() - 1)]));
    }
  }
  return best;
}

}  // namespace dualad
