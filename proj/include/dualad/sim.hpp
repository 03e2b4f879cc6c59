#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dualad/encoder.hpp"
#include "dualad/frame.hpp"
#include "dualad/planners.hpp"
#include "dualad/reasoner.hpp"
#include "dualad/scenario.hpp"

namespace dualad {

inline constexpr const char* kTraceSchema = "dualad-trace-1";

enum class SimMode { non_reactive, reactive };
const char* to_string(SimMode m);
SimMode sim_mode_from_string(const std::string& s);

enum class ControllerKind { lqr, perfect_tracking };
const char* to_string(ControllerKind c);
ControllerKind controller_kind_from_string(const std::string& s);

struct LqrWeights {
  double q_lateral = 1.0;
  double q_heading = 1.0;
  double q_steering = 0.1;
  double r_steering_rate = 0.1;
};

struct SimConfig {
  double step = kGridStep;
  double duration = 15.0;
  SimMode mode = SimMode::non_reactive;
  ControllerKind controller = ControllerKind::lqr;
  std::uint64_t seed = 0;
  /// Replanning period; every step by default.
  double plan_period = kGridStep;
  VehicleParams vehicle;
  LqrWeights lqr;
  double max_accel = 4.0;
  /// Deceleration used for hard-brake and emergency-brake profiles.
  double hard_brake_decel = 6.0;
  /// IDM used by reactive background vehicles.
  IdmParams background_idm = [] {
    IdmParams p;
    p.dynamic_gap = true;
    return p;
  }();
  EncoderConfig encoder;
  ReasonerBackendConfig reasoner;

  void validate() const;
  std::size_t num_steps() const;
};

struct EgoDynamicsState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double steering = 0.0;
};

/// LQR lateral tracker on the error state [e_y, e_theta, delta - delta_ff]
/// with steering rate as input, plus speed tracking toward the next sample.
class EgoController {
 public:
  EgoController(const SimConfig& cfg);

  EgoDynamicsState step(const EgoDynamicsState& s, const Trajectory& target, double t_offset = 0.0) const;
  /// Feedback gain for speed `v` (interpolated over the schedule).
  std::array<double, 3> gain(double v) const;
  /// Longitudinal acceleration `step` applies.
  double accel_command(const EgoDynamicsState& s, const Trajectory& target, double t_offset) const;

 private:
  SimConfig cfg_;
  std::vector<double> speeds_;
  std::vector<std::array<double, 3>> gains_;
};

/// Discrete LQR gain for the error model at speed `v` by iterating the
/// Riccati recursion until the update is below `tol`.
std::array<double, 3> lqr_gain(double v, double dt, double wheelbase, const LqrWeights& w, double tol = 1e-9);

EgoDynamicsState step_ego(const EgoDynamicsState& state, const Trajectory& target, const SimConfig& cfg);

/// Trajectory sample at time `t` (linear interpolation, clamped).
TrajectoryState sample_trajectory(const Trajectory& traj, double t);

struct BackgroundAgent {
  std::string id;
  AgentKind kind = AgentKind::vehicle;
  double width = 0.0;
  double length = 0.0;
  CartesianPose pose;
  double speed = 0.0;
  /// Reactive state along the agent's own logged path.
  bool reactive = false;
  double s = 0.0;
};

class Background {
 public:
  Background(const Scenario& scenario, SimMode mode, const IdmParams& idm, double step);

  const std::vector<BackgroundAgent>& agents() const { return agents_; }
  /// Advances from step `k` to `k + 1`. `ego_box` is the ego footprint at step k.
  void advance(std::size_t k, const OrientedBox& ego_box, double ego_speed);

 private:
  const Scenario* scenario_;
  SimMode mode_;
  IdmParams idm_;
  double step_;
  std::vector<BackgroundAgent> agents_;
  std::vector<std::optional<ReferencePath>> paths_;
};

struct AgentTraceState {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double speed = 0.0;
};

struct TraceRecord {
  std::size_t step = 0;
  double t = 0.0;
  EgoDynamicsState ego;
  double accel = 0.0;
  double ego_s = 0.0;
  double ego_d = 0.0;
  double v_rule = 0.0;
  double cap = 0.0;
  int candidate = -1;
  bool planned = false;
  bool fallback = false;
  bool emergency_brake = false;
  bool hard_brake = false;
  bool reasoner_called = false;
  std::optional<ReasonerDecision> decision;
  std::vector<AgentTraceState> agents;
  std::vector<std::string> collisions;
  std::size_t reasoner_failures = 0;
};

struct SimTrace {
  std::string scenario_id;
  std::string planner;
  std::string reasoner;
  SimMode mode = SimMode::non_reactive;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;

  std::size_t reasoner_failures() const;
  bool collided() const;
  /// First time with a collision, if any.
  std::optional<double> first_collision_time() const;
  /// JSONL, one `dualad-trace-1` record per line.
  std::string serialize() const;
  std::string hash() const;
};

/// Closed-loop rollout. `backend` may be null (bare planner).
SimTrace run(const Scenario& scenario, const Planner& planner, ReasonerBackend* backend, const SimConfig& cfg,
             const std::string& reasoner_name = "none");

}  // namespace dualad
