#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dualad/frame.hpp"
#include "dualad/geom.hpp"

namespace dualad {

struct TrajectoryState {
  double t = 0.0;
  CartesianPose pose;
  double speed = 0.0;
  double accel = 0.0;
  double curvature = 0.0;
};

/// Time-stamped plan starting at the current instant (t = 0) on a 0.1 s grid.
struct Trajectory {
  std::vector<TrajectoryState> states;
  double horizon = 0.0;
  /// Set when a lattice/sampling planner fell back to IDM, or on emergency brake.
  bool fallback = false;
  /// Index of the chosen candidate in enumeration order; -1 for IDM plans.
  int candidate = -1;

  double max_speed() const;
};

enum class PredictionMode { constant_velocity, log_replay };

/// Settings shared by all planners.
struct PlanningParams {
  double horizon = 8.0;
  double step = kGridStep;
  VehicleParams vehicle;
  /// Inflation applied to predicted agent boxes for feasibility checks.
  double safety_margin = 0.2;
  PredictionMode prediction = PredictionMode::constant_velocity;
  /// Lateral band (|d|) in which an agent counts as an IDM leader.
  double half_lane_width = 1.5;
  /// Desired cruise speed; the scenario speed limit when unset.
  std::optional<double> desired_speed;
};

struct IdmParams {
  double a = 1.5;       // acceleration limit, m/s^2
  double v0 = 15.0;     // target speed, m/s
  double s_star = 10.0; // safety distance, m
  double delta = 4.0;
  double min_gap_floor = 0.5;
  double max_brake = 4.0;
  /// Classical IDM desired gap s0 + v*T + v*dv / (2 sqrt(a b)) instead of a
  /// constant s_star.
  bool dynamic_gap = false;
  double s0 = 2.0;
  double time_headway = 1.5;
  double comfortable_decel = 2.0;

  void validate() const;
};

struct LatticeCostWeights {
  double smoothness = 0.05;
  double offset = 0.5;
  double obstacle = 20.0;
  double speed = 1.0;
};

struct KinematicLimits {
  double max_curvature = 0.2;  // 1/m
  double max_accel = 4.0;      // |longitudinal accel|, m/s^2
  double max_lat_accel = 4.0;  // m/s^2
};

struct LatticeConfig {
  std::vector<double> terminal_lateral_offsets{-3.0, -1.5, 0.0, 1.5, 3.0};
  std::vector<double> terminal_times{3.0, 5.0, 8.0};
  std::vector<double> terminal_speeds{0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0};
  LatticeCostWeights transition_cost_weights;
  KinematicLimits constraint_limits;

  void validate() const;
};

struct SamplingCostWeights {
  double lateral_accel = 1.0;
  double longitudinal_accel = 1.0;
  double velocity_deviation = 2.0;
  double route_distance = 1.0;
  double collision_risk = 5.0;

  SamplingCostWeights scaled(double lambda) const;
};

struct SamplingPlannerConfig {
  SamplingCostWeights cost_weights;
  std::vector<double> lateral_end_offsets{-3.0, -1.5, 0.0, 1.5, 3.0};
  std::vector<double> horizon_set{3.0, 5.0, 8.0};
  std::vector<double> end_speed_set{0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0};
  KinematicLimits limits;
  /// Length scale of the collision-risk kernel exp(-dist^2 / sigma^2).
  double risk_sigma = 2.0;

  void validate() const;
};

/// Car-following acceleration with a constant safety distance, clamped to [-max_brake, a].
/// `gap` is bumper-to-bumper; pass +infinity without a leader. `closing_speed`
/// (own minus leader speed) only matters in dynamic-gap mode.
/// Throws NonPositiveGap when gap <= 0.
double idm_accel(double v, double gap, const IdmParams& p, double closing_speed = 0.0);

/// Predicted boxes per agent, one per step over [0, horizon].
std::vector<std::vector<OrientedBox>> predict_agents(const WorldFrame& frame, double horizon, double step = kGridStep,
                                                     PredictionMode mode = PredictionMode::constant_velocity);

/// Agent predictions plus virtual boxes for red stop lines ahead of the ego.
std::vector<std::vector<OrientedBox>> predict_obstacles(const WorldFrame& frame, const ReferencePath& path,
                                                        const PlanningParams& params);

double desired_speed(const WorldFrame& frame, const PlanningParams& params);

Trajectory idm_plan(const WorldFrame& frame, const ReferencePath& path, double cap, const IdmParams& idm,
                    const PlanningParams& params = {});

/// Per-candidate bookkeeping exposed for tests and diagnostics.
struct CandidateReport {
  double end_offset = 0.0;
  double maneuver_time = 0.0;
  double end_speed = 0.0;
  bool feasible = false;
  std::string reject_reason;
  double cost = 0.0;
};

struct PlanResult {
  Trajectory trajectory;
  std::vector<CandidateReport> candidates;
};

PlanResult lattice_plan_detailed(const WorldFrame& frame, const ReferencePath& path, double cap,
                                 const LatticeConfig& cfg, const IdmParams& fallback, const PlanningParams& params = {});
Trajectory lattice_plan(const WorldFrame& frame, const ReferencePath& path, double cap, const LatticeConfig& cfg,
                        const IdmParams& fallback = {}, const PlanningParams& params = {});

PlanResult sampling_plan_detailed(const WorldFrame& frame, const ReferencePath& path, double cap,
                                  const SamplingPlannerConfig& cfg, const IdmParams& fallback,
                                  const PlanningParams& params = {});
Trajectory sampling_plan(const WorldFrame& frame, const ReferencePath& path, double cap,
                         const SamplingPlannerConfig& cfg, const IdmParams& fallback = {},
                         const PlanningParams& params = {});

/// Retimes `traj` along its own path with constant deceleration `decel`.
Trajectory hard_brake(const Trajectory& traj, double decel);

/// Braking profile straight ahead from the current ego state.
Trajectory emergency_brake(const EgoSnapshot& ego, double decel, double horizon, double step = kGridStep);

/// Smallest box distance between the ego footprint along `traj` and the
/// predicted obstacles at matching steps.
double min_clearance(const Trajectory& traj, const std::vector<std::vector<OrientedBox>>& obstacles,
                     const VehicleParams& vehicle);

enum class PlannerKind { idm, lattice, sampling };
const char* to_string(PlannerKind kind);
PlannerKind planner_kind_from_string(const std::string& s);

struct PlannerConfig {
  PlanningParams planning;
  IdmParams idm;
  LatticeConfig lattice;
  SamplingPlannerConfig sampling;
};

class Planner {
 public:
  virtual ~Planner() = default;
  virtual Trajectory plan(const WorldFrame& frame, const ReferencePath& path, double cap) const = 0;
  /// The planner's own (uncapped) cruise speed, i.e. v_rule.
  virtual double desired_speed(const WorldFrame& frame) const = 0;
  virtual PlannerKind kind() const = 0;
};

std::unique_ptr<Planner> make_planner(PlannerKind kind, const PlannerConfig& cfg);

}  // namespace dualad
