#include <gtest/gtest.h>

#include <cmath>

#include "dualad/error.hpp"
#include "dualad/sim.hpp"
#include "test_support.hpp"

namespace dualad {
namespace {

Trajectory straight(double x0, double y, double v, double horizon = 8.0) {
  Trajectory t;
  t.horizon = horizon;
  const int n = static_cast<int>(std::llround(horizon / kGridStep));
  for (int k = 0; k <= n; ++k) t.states.push_back({k * kGridStep, {x0 + v * k * kGridStep, y, 0.0}, v, 0.0, 0.0});
  return t;
}

Trajectory circle(double r, double v, double horizon = 8.0) {
  Trajectory t;
  t.horizon = horizon;
  const int n = static_cast<int>(std::llround(horizon / kGridStep));
  for (int k = 0; k <= n; ++k) {
    const double a = v * k * kGridStep / r;
    t.states.push_back({k * kGridStep, {r * std::sin(a), r - r * std::cos(a), a}, v, 0.0, 1.0 / r});
  }
  return t;
}

Scenario critical(const std::string& id) {
  return load_scenario(testing::source_dir() / "data" / "critical" / (id + ".json"));
}

TEST(Controller, PerfectTrackingFollowsSamples) {
  SimConfig cfg;
  cfg.controller = ControllerKind::perfect_tracking;
  const EgoController c(cfg);
  const Trajectory t = circle(30.0, 8.0);
  EgoDynamicsState s{0, 0, 0, 8.0, 0};
  for (int k = 0; k < 40; ++k) {
    s = c.step(s, t, k * kGridStep);
    const auto& ref = t.states[static_cast<std::size_t>(k + 1)];
    EXPECT_NEAR(s.x, ref.pose.x, 1e-9);
    EXPECT_NEAR(s.y, ref.pose.y, 1e-9);
    EXPECT_NEAR(s.v, ref.speed, 1e-9);
  }
}

TEST(Controller, LqrHoldsZeroErrorOnStraight) {
  SimConfig cfg;
  const EgoController c(cfg);
  const Trajectory t = straight(0.0, 0.0, 10.0);
  EgoDynamicsState s{0, 0, 0, 10.0, 0};
  for (int k = 0; k < 50; ++k) {
    s = c.step(s, t, k * kGridStep);
    EXPECT_LT(std::abs(s.y), 1e-3) << k;
    EXPECT_NEAR(s.v, 10.0, 1e-9);
  }
}

TEST(Controller, LqrFollowsCircle) {
  SimConfig cfg;
  const EgoController c(cfg);
  const Trajectory t = circle(40.0, 10.0);
  EgoDynamicsState s{0, 0, 0, 10.0, std::atan(cfg.vehicle.wheelbase / 40.0)};
  for (int k = 0; k < 50; ++k) {
    s = c.step(s, t, k * kGridStep);
    // The reference is a 1 m chord polyline; allow for its sagitta.
    EXPECT_LT(std::abs(std::hypot(s.x, s.y - 40.0) - 40.0), 0.01) << k;
  }
}

TEST(Controller, LateralOffsetDecays) {
  SimConfig cfg;
  const EgoController c(cfg);
  EgoDynamicsState s{0, 0.5, 0, 10.0, 0};
  // Monotone down to the 0.05 m band; the residual overshoot stays inside it.
  double prev = 0.5;
  bool settled = false;
  for (int k = 0; k < 30; ++k) {
    s = c.step(s, straight(s.x, 0.0, 10.0), 0.0);
    if (!settled) EXPECT_LE(std::abs(s.y), prev) << k;
    settled = settled || std::abs(s.y) < 0.05;
    if (settled) EXPECT_LT(std::abs(s.y), 0.05) << k;
    prev = std::abs(s.y);
  }
  EXPECT_TRUE(settled);
}

TEST(Controller, GainIsStabilising) {
  const auto k = lqr_gain(10.0, 0.1, 2.7, LqrWeights{});
  EXPECT_GT(k[0], 0.0);
  EXPECT_GT(k[1], 0.0);
  EXPECT_GT(k[2], 0.0);
}

TEST(SampleTrajectory, InterpolatesAndClamps) {
  const Trajectory t = straight(0, 0, 10.0, 1.0);
  EXPECT_NEAR(sample_trajectory(t, 0.25).pose.x, 2.5, 1e-12);
  EXPECT_EQ(sample_trajectory(t, -1).pose.x, 0.0);
  EXPECT_EQ(sample_trajectory(t, 5).pose.x, 10.0);
  EXPECT_THROW(sample_trajectory(Trajectory{}, 0.0), Error);
}

TEST(Run, EmptyRoadReachesTargetAndIsDeterministic) {
  const Scenario sc = testing::ScenarioDoc("empty", 0.0).build();
  const auto planner = make_planner(PlannerKind::idm, PlannerConfig{});
  SimConfig cfg;
  const SimTrace a = run(sc, *planner, nullptr, cfg);
  const SimTrace b = run(sc, *planner, nullptr, cfg);
  ASSERT_EQ(a.records.size(), 151u);
  // From rest the IDM law itself only reaches 14.65 m/s by t = 15 s.
  EXPECT_GT(a.records.back().ego.v, 14.6);
  EXPECT_LT(a.records.back().ego.v, 15.0 + 1e-6);
  EXPECT_FALSE(a.collided());
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.serialize().find("dualad-trace-1") != std::string::npos, true);
  std::size_t lines = 0;
  for (char ch : a.serialize()) lines += ch == '\n';
  EXPECT_EQ(lines, 151u);
}

TEST(Run, ReactiveAgentStopsBehindStoppedEgo) {
  testing::ScenarioDoc d("queue", 0.0);
  d.json()["traffic_lights"] = nlohmann::json::array({{{"t", 0.0}, {"stop_line_s", 20.0 + 2.6}, {"state", "red"}}});
  d.agent("follower", "vehicle", -40.0, 0.0, 0.0, 8.0);
  const Scenario sc = d.build();
  const auto planner = make_planner(PlannerKind::idm, PlannerConfig{});
  SimConfig cfg;
  cfg.mode = SimMode::non_reactive;
  EXPECT_TRUE(run(sc, *planner, nullptr, cfg).collided());
  cfg.mode = SimMode::reactive;
  const SimTrace t = run(sc, *planner, nullptr, cfg);
  EXPECT_FALSE(t.collided());
  EXPECT_LT(t.records.back().ego.v, 0.1);
  EXPECT_LT(t.records.back().agents[0].speed, 0.1);
  EXPECT_LT(t.records.back().agents[0].x, -4.7);
}

TEST(Run, MockReasonerPreventsPedestrianCollision) {
  const Scenario sc = critical("crit_ped_a");
  const auto planner = make_planner(PlannerKind::idm, PlannerConfig{});
  SimConfig cfg;
  const SimTrace bare = run(sc, *planner, nullptr, cfg);
  ASSERT_TRUE(bare.collided());
  MockBackend mock;
  const SimTrace dual = run(sc, *planner, &mock, cfg, "mock");
  EXPECT_FALSE(dual.collided());
  bool capped = false;
  for (const auto& r : dual.records) {
    EXPECT_LE(r.cap, r.v_rule);
    ASSERT_TRUE(r.decision);
    capped = capped || r.cap < r.v_rule;
  }
  EXPECT_TRUE(capped);
  EXPECT_EQ(dual.reasoner, "mock");
  EXPECT_EQ(dual.reasoner_failures(), 0u);
}

TEST(Run, ReasonerCallPeriod) {
  const Scenario sc = critical("crit_ped_b");
  const auto planner = make_planner(PlannerKind::idm, PlannerConfig{});
  SimConfig cfg;
  cfg.reasoner.call_period = 0.5;
  MockBackend mock;
  const SimTrace t = run(sc, *planner, &mock, cfg, "mock");
  for (const auto& r : t.records) EXPECT_EQ(r.reasoner_called, r.step % 5 == 0) << r.step;
}

TEST(Run, ReactiveVehiclesNeverOverlap) {
  const auto corpus = load_corpus(testing::source_dir() / "data" / "corpus");
  const auto planner = make_planner(PlannerKind::idm, PlannerConfig{});
  SimConfig cfg;
  cfg.mode = SimMode::reactive;
  for (const auto& sc : corpus) {
    const SimTrace t = run(sc, *planner, nullptr, cfg);
    for (const auto& r : t.records) {
      for (std::size_t i = 0; i < r.agents.size(); ++i) {
        if (sc.agents[i].kind != AgentKind::vehicle) continue;
        for (std::size_t j = i + 1; j < r.agents.size(); ++j) {
          if (sc.agents[j].kind != AgentKind::vehicle) continue;
          const OrientedBox a{{r.agents[i].x, r.agents[i].y, r.agents[i].theta}, sc.agents[i].width, sc.agents[i].length};
          const OrientedBox b{{r.agents[j].x, r.agents[j].y, r.agents[j].theta}, sc.agents[j].width, sc.agents[j].length};
          EXPECT_FALSE(boxes_collide(a, b)) << sc.id << " step " << r.step << " " << r.agents[i].id << "/"
                                            << r.agents[j].id;
        }
      }
    }
  }
}

TEST(SimConfig, Validate) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.num_steps(), 150u);
  c.plan_period = 0.15;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lqr.r_steering_rate = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(sim_mode_from_string("hybrid"), ConfigError);
  EXPECT_EQ(controller_kind_from_string("perfect_tracking"), ControllerKind::perfect_tracking);
}

}  // namespace
}  // namespace dualad
