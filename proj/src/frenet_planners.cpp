// Lattice and sampling planners. Both enumerate Frenet candidates made of a
// quintic lateral and a quartic longitudinal polynomial, reject the ones that
// break kinematic limits or hit predicted agents, and pick the cheapest.

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualad/error.hpp"
#include "dualad/planners.hpp"

namespace dualad {

namespace {

struct Quintic {
  double c[6];
  Quintic(double x0, double v0, double a0, double x1, double v1, double a1, double T) {
    const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
    const double dx = x1 - (x0 + v0 * T + 0.5 * a0 * T2);
    const double dv = v1 - (v0 + a0 * T);
    const double da = a1 - a0;
    c[0] = x0;
    c[1] = v0;
    c[2] = 0.5 * a0;
    c[3] = (10.0 * dx - 4.0 * dv * T + 0.5 * da * T2) / T3;
    c[4] = (-15.0 * dx + 7.0 * dv * T - da * T2) / T4;
    c[5] = (6.0 * dx - 3.0 * dv * T + 0.5 * da * T2) / T5;
  }
  double x(double t) const { return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5])))); }
  double dx(double t) const { return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5]))); }
  double ddx(double t) const { return 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5])); }
  double dddx(double t) const { return 6 * c[3] + t * (24 * c[4] + t * 60 * c[5]); }
};

struct Quartic {
  double c[5];
  Quartic(double x0, double v0, double a0, double v1, double a1, double T) {
    const double dv = v1 - v0 - a0 * T;
    const double da = a1 - a0;
    c[0] = x0;
    c[1] = v0;
    c[2] = 0.5 * a0;
    c[3] = (3.0 * dv - da * T) / (3.0 * T * T);
    c[4] = (da * T - 2.0 * dv) / (4.0 * T * T * T);
  }
  double x(double t) const { return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4]))); }
  double dx(double t) const { return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * 4 * c[4])); }
  double ddx(double t) const { return 2 * c[2] + t * (6 * c[3] + t * 12 * c[4]); }
  double dddx(double t) const { return 6 * c[3] + t * 24 * c[4]; }
};

struct Start {
  double ego_s;
  double s_d, s_dd;
  double d, d_d, d_dd;
  double speed;
};

Start start_state(const WorldFrame& frame, const ReferencePath& path) {
  const FrenetPose fp = to_frenet(path, frame.ego.pose);
  const double th = wrap_angle(fp.theta);
  const double v = frame.ego.speed;
  const double a = frame.ego.accel;
  // Lateral acceleration relative to the path from the steering curvature.
  const double lat = v * v * (frame.ego.curvature - path.curvature_at(fp.s));
  return {fp.s,
          v * std::cos(th),
          a * std::cos(th) - lat * std::sin(th),
          fp.d,
          v * std::sin(th),
          a * std::sin(th) + lat * std::cos(th),
          v};
}

struct Sample {
  double s, s_d, s_dd, s_ddd;
  double d, d_d, d_dd, d_ddd;
};

struct Candidate {
  CandidateReport report;
  std::vector<Sample> samples;
  Trajectory traj;
};

// Frenet samples plus kinematic screening; Cartesian conversion only for
// candidates that pass.
void build_candidate(Candidate& c, const Start& st, const ReferencePath& path, const PlanningParams& params,
                     const KinematicLimits& limits, double speed_ceiling) {
  const double T = c.report.maneuver_time;
  const Quintic lat(st.d, st.d_d, st.d_dd, c.report.end_offset, 0.0, 0.0, T);
  const Quartic lon(0.0, st.s_d, st.s_dd, c.report.end_speed, 0.0, T);
  const auto n = static_cast<std::size_t>(std::llround(params.horizon / params.step));
  const double s_T = lon.x(T);
  c.samples.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * params.step;
    Sample sm{};
    if (t <= T) {
      sm = {lon.x(t), lon.dx(t), lon.ddx(t), lon.dddx(t), lat.x(t), lat.dx(t), lat.ddx(t), lat.dddx(t)};
    } else {
      sm = {s_T + c.report.end_speed * (t - T), c.report.end_speed, 0.0, 0.0, c.report.end_offset, 0.0, 0.0, 0.0};
    }
    c.samples.push_back(sm);
  }

  auto reject = [&](const char* why) {
    c.report.feasible = false;
    c.report.reject_reason = why;
  };
  c.report.feasible = true;
  c.traj.horizon = params.horizon;
  c.traj.states.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const Sample& sm = c.samples[k];
    const double s_abs = st.ego_s + sm.s;
    if (sm.s_d < -0.05) return reject("reverse");
    if (s_abs > path.length()) return reject("route_end");
    const double s_d = std::max(sm.s_d, 0.0);
    const double speed = std::hypot(s_d, sm.d_d);
    if (speed > speed_ceiling + 1e-6) return reject("speed");
    if (std::abs(sm.s_dd) > limits.max_accel + 1e-9) return reject("accel");
    double kappa = path.curvature_at(s_abs);
    if (s_d >= 0.5) {
      kappa += (sm.d_dd * s_d - sm.d_d * sm.s_dd) / (s_d * s_d * s_d);
    } else if (std::abs(sm.d_d) > 0.2) {
      return reject("lateral_slip");
    }
    if (std::abs(kappa) > limits.max_curvature) return reject("curvature");
    if (speed * speed * std::abs(kappa) > limits.max_lat_accel) return reject("lat_accel");
    const double theta_f = std::atan2(sm.d_d, std::max(s_d, 0.5));
    c.traj.states.push_back(
        {static_cast<double>(k) * params.step, to_cartesian(path, {s_abs, sm.d, theta_f}), speed, sm.s_dd, kappa});
  }
}

bool collides(const Trajectory& traj, const std::vector<std::vector<OrientedBox>>& obstacles,
              const VehicleParams& vehicle, double margin) {
  const double ego_r = 0.5 * std::hypot(vehicle.width, vehicle.length);
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const OrientedBox ego = ego_box(traj.states[k].pose, vehicle);
    for (const auto& track : obstacles) {
      const OrientedBox& ob = track[std::min(k, track.size() - 1)];
      const double centre = std::hypot(ob.center.x - ego.center.x, ob.center.y - ego.center.y);
      if (centre > ego_r + ob.radius() + 2.0 * margin) continue;
      if (boxes_collide(ego, ob.inflated(margin))) return true;
    }
  }
  return false;
}

double risk_sum(const Trajectory& traj, const std::vector<std::vector<OrientedBox>>& obstacles,
                const VehicleParams& vehicle, double sigma) {
  const double ego_r = 0.5 * std::hypot(vehicle.width, vehicle.length);
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const OrientedBox ego = ego_box(traj.states[k].pose, vehicle);
    for (const auto& track : obstacles) {
      const OrientedBox& ob = track[std::min(k, track.size() - 1)];
      const double centre = std::hypot(ob.center.x - ego.center.x, ob.center.y - ego.center.y);
      if (centre - ego_r - ob.radius() > 4.0 * sigma) continue;
      const double dist = box_distance(ego, ob);
      sum += std::exp(-(dist * dist) / (sigma * sigma));
    }
  }
  return sum;
}

template <typename CostFn>
PlanResult select_candidate(const WorldFrame& frame, const ReferencePath& path, double cap,
                            const std::vector<double>& offsets, const std::vector<double>& times,
                            const std::vector<double>& speeds, const KinematicLimits& limits,
                            const IdmParams& fallback, const PlanningParams& params, CostFn&& cost) {
  const Start st = start_state(frame, path);
  const double ceiling = std::max(cap, st.speed);
  const auto obstacles = predict_obstacles(frame, path, params);

  PlanResult result;
  std::vector<Candidate> cands;
  for (double off : offsets) {
    for (double T : times) {
      for (double v : speeds) {
        if (v > cap + 1e-9) continue;
        Candidate c;
        c.report.end_offset = off;
        c.report.maneuver_time = T;
        c.report.end_speed = v;
        cands.push_back(std::move(c));
      }
    }
  }

  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    Candidate& c = cands[i];
    build_candidate(c, st, path, params, limits, ceiling);
    if (c.report.feasible && collides(c.traj, obstacles, params.vehicle, params.safety_margin)) {
      c.report.feasible = false;
      c.report.reject_reason = "collision";
    }
    if (c.report.feasible) {
      c.report.cost = cost(c, obstacles);
      // Costs within a relative 1e-9 are ties; enumeration order decides.
      if (best < 0 || c.report.cost < best_cost - 1e-9 * std::abs(best_cost)) {
        best = static_cast<int>(i);
        best_cost = c.report.cost;
      }
    }
    result.candidates.push_back(c.report);
  }

  if (best >= 0) {
    result.trajectory = std::move(cands[static_cast<std::size_t>(best)].traj);
    result.trajectory.candidate = best;
    for (auto& s : result.trajectory.states) s.speed = std::max(s.speed, 0.0);
    return result;
  }

  Trajectory fb = idm_plan(frame, path, cap, fallback, params);
  fb.fallback = true;
  const OrientedBox ego0 = ego_box(frame.ego.pose, params.vehicle);
  for (const auto& track : obstacles) {
    if (!track.empty() && boxes_collide(ego0, track.front())) {
      throw NoFeasibleTrajectory("ego already overlaps an obstacle; no trajectory can avoid it");
    }
  }
  result.trajectory = std::move(fb);
  return result;
}

double integrate(const std::vector<Sample>& samples, double step, double (*f)(const Sample&, double), double arg) {
  double sum = 0.0;
  for (const auto& s : samples) sum += f(s, arg) * step;
  return sum;
}

void require_positive_list(const std::vector<double>& v, const char* field, bool allow_zero) {
  if (v.empty()) throw ConfigError(field, "must not be empty");
  for (double x : v) {
    if (!std::isfinite(x) || (allow_zero ? x < 0.0 : x <= 0.0)) throw ConfigError(field, "invalid entry");
  }
}

void validate_limits(const KinematicLimits& l, const std::string& prefix) {
  if (!(l.max_curvature > 0.0)) throw ConfigError(prefix + ".max_curvature", "must be > 0");
  if (!(l.max_accel > 0.0)) throw ConfigError(prefix + ".max_accel", "must be > 0");
  if (!(l.max_lat_accel > 0.0)) throw ConfigError(prefix + ".max_lat_accel", "must be > 0");
}

}  // namespace

void LatticeConfig::validate() const {
  if (terminal_lateral_offsets.empty()) throw ConfigError("lattice.terminal_lateral_offsets", "must not be empty");
  require_positive_list(terminal_times, "lattice.terminal_times", false);
  require_positive_list(terminal_speeds, "lattice.terminal_speeds", true);
  const auto& w = transition_cost_weights;
  if (w.smoothness < 0 || w.offset < 0 || w.obstacle < 0 || w.speed < 0) {
    throw ConfigError("lattice.weights", "weights must be >= 0");
  }
  validate_limits(constraint_limits, "lattice");
}

SamplingCostWeights SamplingCostWeights::scaled(double lambda) const {
  return {lateral_accel * lambda, longitudinal_accel * lambda, velocity_deviation * lambda, route_distance * lambda,
          collision_risk * lambda};
}

void SamplingPlannerConfig::validate() const {
  const auto& w = cost_weights;
  const double ws[] = {w.lateral_accel, w.longitudinal_accel, w.velocity_deviation, w.route_distance,
                       w.collision_risk};
  bool any = false;
  for (double x : ws) {
    if (!(x >= 0.0)) throw ConfigError("sampling.weights", "weights must be >= 0");
    any = any || x > 0.0;
  }
  if (!any) throw ConfigError("sampling.weights", "at least one weight must be > 0");
  if (lateral_end_offsets.empty()) throw ConfigError("sampling.lateral_end_offsets", "must not be empty");
  require_positive_list(horizon_set, "sampling.horizon_set", false);
  require_positive_list(end_speed_set, "sampling.end_speed_set", true);
  if (!(risk_sigma > 0.0)) throw ConfigError("sampling.risk_sigma", "must be > 0");
  validate_limits(limits, "sampling");
}

PlanResult lattice_plan_detailed(const WorldFrame& frame, const ReferencePath& path, double cap,
                                 const LatticeConfig& cfg, const IdmParams& fallback, const PlanningParams& params) {
  const double v_target = std::max(0.0, std::min(desired_speed(frame, params), cap));
  const auto& w = cfg.transition_cost_weights;
  const double step = params.step;
  auto cost = [&](const Candidate& c, const std::vector<std::vector<OrientedBox>>& obstacles) {
    double smooth = 0.0, offset = 0.0, speed = 0.0;
    for (const auto& s : c.samples) {
      smooth += (s.s_ddd * s.s_ddd + s.d_ddd * s.d_ddd) * step;
      offset += s.d * s.d * step;
      const double dv = std::hypot(std::max(s.s_d, 0.0), s.d_d) - v_target;
      speed += dv * dv * step;
    }
    const double obstacle = w.obstacle > 0.0 ? risk_sum(c.traj, obstacles, params.vehicle, 2.0) : 0.0;
    return w.smoothness * smooth + w.offset * offset + w.obstacle * obstacle + w.speed * speed;
  };
  return select_candidate(frame, path, cap, cfg.terminal_lateral_offsets, cfg.terminal_times, cfg.terminal_speeds,
                          cfg.constraint_limits, fallback, params, cost);
}

Trajectory lattice_plan(const WorldFrame& frame, const ReferencePath& path, double cap, const LatticeConfig& cfg,
                        const IdmParams& fallback, const PlanningParams& params) {
  return lattice_plan_detailed(frame, path, cap, cfg, fallback, params).trajectory;
}

PlanResult sampling_plan_detailed(const WorldFrame& frame, const ReferencePath& path, double cap,
                                  const SamplingPlannerConfig& cfg, const IdmParams& fallback,
                                  const PlanningParams& params) {
  const double v_des = std::max(0.0, std::min(desired_speed(frame, params), cap));
  const auto& w = cfg.cost_weights;
  const double step = params.step;
  auto cost = [&](const Candidate& c, const std::vector<std::vector<OrientedBox>>& obstacles) {
    const double j_lat = integrate(c.samples, step, [](const Sample& s, double) { return s.d_dd * s.d_dd; }, 0.0);
    const double j_lon = integrate(c.samples, step, [](const Sample& s, double) { return s.s_dd * s.s_dd; }, 0.0);
    const double j_vel = integrate(
        c.samples, step,
        [](const Sample& s, double vd) {
          const double dv = std::hypot(std::max(s.s_d, 0.0), s.d_d) - vd;
          return dv * dv;
        },
        v_des);
    const double j_route = integrate(c.samples, step, [](const Sample& s, double) { return s.d * s.d; }, 0.0);
    const double j_risk = w.collision_risk > 0.0 ? risk_sum(c.traj, obstacles, params.vehicle, cfg.risk_sigma) : 0.0;
    return w.lateral_accel * j_lat + w.longitudinal_accel * j_lon + w.velocity_deviation * j_vel +
           w.route_distance * j_route + w.collision_risk * j_risk;
  };
  return select_candidate(frame, path, cap, cfg.lateral_end_offsets, cfg.horizon_set, cfg.end_speed_set, cfg.limits,
                          fallback, params, cost);
}

Trajectory sampling_plan(const WorldFrame& frame, const ReferencePath& path, double cap,
                         const SamplingPlannerConfig& cfg, const IdmParams& fallback, const PlanningParams& params) {
  return sampling_plan_detailed(frame, path, cap, cfg, fallback, params).trajectory;
}

}  // namespace dualad
