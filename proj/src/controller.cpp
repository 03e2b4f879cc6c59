#include <algorithm>
#include <cmath>
#include <limits>

#include "dualad/error.hpp"
#include "dualad/sim.hpp"

namespace dualad {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

Mat3 error_model(double v, double dt, double wheelbase) {
  return {{{1.0, v * dt, 0.0}, {0.0, 1.0, v * dt / wheelbase}, {0.0, 0.0, 1.0}}};
}

}  // namespace

std::array<double, 3> lqr_gain(double v, double dt, double wheelbase, const LqrWeights& w, double tol) {
  const Mat3 A = error_model(v, dt, wheelbase);
  const Vec3 B{0.0, 0.0, dt};
  const Vec3 q{w.q_lateral, w.q_heading, w.q_steering};
  Mat3 P{};
  for (int i = 0; i < 3; ++i) P[i][i] = q[i];
  Vec3 K{};
  for (int iter = 0; iter < 200000; ++iter) {
    // PA, B'P, B'PB, B'PA
    Mat3 PA{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) PA[i][j] += P[i][k] * A[k][j];
    Vec3 BtP{};
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) BtP[j] += B[k] * P[k][j];
    double BtPB = 0.0;
    for (int k = 0; k < 3; ++k) BtPB += BtP[k] * B[k];
    Vec3 BtPA{};
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) BtPA[j] += B[k] * PA[k][j];
    const double s = w.r_steering_rate + BtPB;
    for (int j = 0; j < 3; ++j) K[j] = BtPA[j] / s;

    Mat3 next{};
    double delta = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double atpa = 0.0;
        for (int k = 0; k < 3; ++k) atpa += A[k][i] * PA[k][j];
        next[i][j] = (i == j ? q[i] : 0.0) + atpa - BtPA[i] * BtPA[j] / s;
        delta = std::max(delta, std::abs(next[i][j] - P[i][j]));
      }
    }
    P = next;
    if (delta < tol) break;
  }
  return K;
}

TrajectoryState sample_trajectory(const Trajectory& traj, double t) {
  if (traj.states.empty()) throw Error("cannot sample an empty trajectory");
  const auto& st = traj.states;
  if (t <= st.front().t) return st.front();
  if (t >= st.back().t) return st.back();
  const auto it = std::upper_bound(st.begin(), st.end(), t, [](double x, const TrajectoryState& s) { return x < s.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double w = b.t > a.t ? (t - a.t) / (b.t - a.t) : 0.0;
  TrajectoryState out;
  out.t = t;
  out.pose = {a.pose.x + w * (b.pose.x - a.pose.x), a.pose.y + w * (b.pose.y - a.pose.y),
              a.pose.theta + w * wrap_angle(b.pose.theta - a.pose.theta)};
  out.speed = a.speed + w * (b.speed - a.speed);
  out.accel = a.accel + w * (b.accel - a.accel);
  out.curvature = a.curvature + w * (b.curvature - a.curvature);
  return out;
}

EgoController::EgoController(const SimConfig& cfg) : cfg_(cfg) {
  for (double v = 0.5; v <= 30.0 + 1e-9; v += 0.5) {
    speeds_.push_back(v);
    gains_.push_back(lqr_gain(v, cfg.step, cfg.vehicle.wheelbase, cfg.lqr));
  }
}

std::array<double, 3> EgoController::gain(double v) const {
  if (v <= speeds_.front()) return gains_.front();
  if (v >= speeds_.back()) return gains_.back();
  const auto it = std::upper_bound(speeds_.begin(), speeds_.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - speeds_.begin());
  const double w = (v - speeds_[i - 1]) / (speeds_[i] - speeds_[i - 1]);
  std::array<double, 3> k{};
  for (int j = 0; j < 3; ++j) k[j] = gains_[i - 1][j] + w * (gains_[i][j] - gains_[i - 1][j]);
  return k;
}

double EgoController::accel_command(const EgoDynamicsState& s, const Trajectory& target, double t_offset) const {
  const double v_next = sample_trajectory(target, t_offset + cfg_.step).speed;
  return std::clamp((v_next - s.v) / cfg_.step, -cfg_.hard_brake_decel, cfg_.max_accel);
}

namespace {

// Nearest point of the trajectory polyline to (x, y).
TrajectoryState nearest_reference(const Trajectory& traj, double x, double y) {
  const auto& st = traj.states;
  if (st.size() == 1) return st.front();
  double best = std::numeric_limits<double>::infinity();
  TrajectoryState ref = st.front();
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    const auto& a = st[i];
    const auto& b = st[i + 1];
    const double ex = b.pose.x - a.pose.x, ey = b.pose.y - a.pose.y;
    const double len2 = ex * ex + ey * ey;
    double u = len2 > 1e-12 ? ((x - a.pose.x) * ex + (y - a.pose.y) * ey) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const double px = a.pose.x + u * ex, py = a.pose.y + u * ey;
    const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
    if (d2 < best - 1e-12) {
      best = d2;
      ref.pose = {px, py, a.pose.theta + u * wrap_angle(b.pose.theta - a.pose.theta)};
      ref.curvature = a.curvature + u * (b.curvature - a.curvature);
      ref.speed = a.speed + u * (b.speed - a.speed);
    }
  }
  return ref;
}

}  // namespace

EgoDynamicsState EgoController::step(const EgoDynamicsState& s, const Trajectory& target, double t_offset) const {
  const double dt = cfg_.step;
  const double L = cfg_.vehicle.wheelbase;
  const double max_steer = cfg_.vehicle.max_steering;
  if (cfg_.controller == ControllerKind::perfect_tracking) {
    const TrajectoryState ts = sample_trajectory(target, t_offset + dt);
    return {ts.pose.x, ts.pose.y, ts.pose.theta, std::max(ts.speed, 0.0),
            std::clamp(std::atan(L * ts.curvature), -max_steer, max_steer)};
  }

  const TrajectoryState ref = nearest_reference(target, s.x, s.y);
  const double ch = std::cos(ref.pose.theta), sh = std::sin(ref.pose.theta);
  const double e_y = ch * (s.y - ref.pose.y) - sh * (s.x - ref.pose.x);
  const double e_th = wrap_angle(s.theta - ref.pose.theta);
  const double delta_ff = std::atan(L * ref.curvature);
  const double e_delta = s.steering - delta_ff;
  const auto K = gain(std::max(s.v, 0.0));
  const double rate = -(K[0] * e_y + K[1] * e_th + K[2] * e_delta);
  // Feedforward follows the planned curvature one step ahead.
  const double delta_next = std::atan(L * sample_trajectory(target, t_offset + dt).curvature);
  const double steering = std::clamp(delta_next + e_delta + rate * dt, -max_steer, max_steer);

  const double a = accel_command(s, target, t_offset);
  constexpr int kSub = 10;
  const double h = dt / kSub;
  EgoDynamicsState out = s;
  out.steering = steering;
  for (int i = 0; i < kSub; ++i) {
    const double v = std::max(0.0, s.v + a * (static_cast<double>(i) + 0.5) * h);
    out.x += v * std::cos(out.theta) * h;
    out.y += v * std::sin(out.theta) * h;
    out.theta += v * std::tan(steering) / L * h;
  }
  out.theta = wrap_angle(out.theta);
  out.v = std::max(0.0, s.v + a * dt);
  return out;
}

EgoDynamicsState step_ego(const EgoDynamicsState& state, const Trajectory& target, const SimConfig& cfg) {
  return EgoController(cfg).step(state, target, 0.0);
}

}  // namespace dualad
