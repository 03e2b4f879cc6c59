#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "json.hpp"

#include "dualad/error.hpp"
#include "dualad/reasoner.hpp"
#include "test_support.hpp"

namespace dualad {
namespace {

using testing::ego_frame;
using testing::snapshot;

ReasonerDecision suggestion(double s) {
  ReasonerDecision d;
  d.suggested_speed = s;
  return d;
}

TEST(ParseReply, Cases) {
  auto d = parse_reply(R"({"speed": 7.5, "rationale": "slow"})");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->suggested_speed, 7.5);
  EXPECT_EQ(d->rationale, "slow");
  EXPECT_EQ(d->source, DecisionSource::remote_llm);
  EXPECT_FALSE(d->clamped);

  d = parse_reply("Sure. ```json\n{\"speed\": 3, \"rationale\": \"a } in text\"}\n``` done");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->suggested_speed, 3.0);
  EXPECT_EQ(d->rationale, "a } in text");

  d = parse_reply(R"({"speed": 40})");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->suggested_speed, 15.0);
  EXPECT_TRUE(d->clamped);
  d = parse_reply(R"({"speed": -2})");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->suggested_speed, 0.0);
  EXPECT_TRUE(d->clamped);

  EXPECT_FALSE(parse_reply("no json here"));
  EXPECT_FALSE(parse_reply(R"({"speed": "fast"})"));
  EXPECT_FALSE(parse_reply(R"({"rationale": "x"})"));
  EXPECT_FALSE(parse_reply("{\"speed\": 4"));
  EXPECT_TRUE(parse_reply("{broken {\"speed\": 4}"));
}

TEST(Arbitrate, Examples) {
  EXPECT_EQ(arbitrate(12.0, suggestion(8.0)), 8.0);
  EXPECT_EQ(arbitrate(5.0, suggestion(10.0)), 5.0);
  EXPECT_EQ(arbitrate(7.0, suggestion(7.0)), 7.0);
  EXPECT_EQ(arbitrate(20.0, suggestion(30.0)), 15.0);
  EXPECT_EQ(arbitrate(3.0, suggestion(-1.0)), 0.0);
}

TEST(Arbitrate, NeverExceedsRuleSpeed) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> vr(0, 30), sg(-10, 40);
  for (int i = 0; i < 10000; ++i) {
    const double v = vr(rng), s = sg(rng);
    const double out = arbitrate(v, suggestion(s));
    EXPECT_EQ(out, std::min(v, std::clamp(s, 0.0, 15.0)));
    EXPECT_LE(out, v);
  }
}

TEST(HardBrake, OnlyForZero) {
  EXPECT_TRUE(requests_hard_brake(suggestion(0.0)));
  EXPECT_FALSE(requests_hard_brake(suggestion(0.1)));
}

TEST(MockReasoner, StoppedCarAhead) {
  // Bumper gap 6 m closed at 6 m/s: TTC 1 s.
  const auto d = mock_reason(ego_frame(6.0, {snapshot("lead", 6.0 + 4.7, 0, 0, 0)}));
  EXPECT_NEAR(d.suggested_speed, 2.0, 1e-6);
  EXPECT_EQ(d.source, DecisionSource::mock);
}

TEST(MockReasoner, CrossingPedestrian) {
  // Pedestrian edge 3 m below the ego side, walking up at 1.5 m/s.
  const auto d =
      mock_reason(ego_frame(0.0, {snapshot("ped", 1.0, -1.0 - 0.3 - 3.0, kPi / 2, 1.5, 0.6, 0.6, AgentKind::pedestrian)}));
  EXPECT_NEAR(d.suggested_speed, 4.0, 1e-6);
}

TEST(MockReasoner, FreeRoadAndBehind) {
  EXPECT_EQ(mock_reason(ego_frame(10.0)).suggested_speed, 15.0);
  EXPECT_EQ(mock_reason(ego_frame(10.0, {snapshot("back", -8, 0, 0, 20)})).suggested_speed, 15.0);
  EXPECT_EQ(mock_reason(ego_frame(10.0, {snapshot("far", 200, 0, 0, 0)})).suggested_speed, 15.0);
  const auto touching = mock_reason(ego_frame(3.0, {snapshot("on", 4.0, 0, 0, 0)}));
  EXPECT_EQ(touching.suggested_speed, 0.0);
  EXPECT_TRUE(requests_hard_brake(touching));
}

TEST(MinTtc, MatchesClosedFormForHeadOn) {
  // Oncoming at 5 m/s, ego 10 m/s, bumper gap 30 m: contact at 2 s.
  const double ttc = min_time_to_collision(ego_frame(10.0, {snapshot("on", 30 + 4.7, 0, kPi, 5)}), {}, 4.0);
  EXPECT_NEAR(ttc, 2.0, 1e-9);
  EXPECT_TRUE(std::isinf(min_time_to_collision(ego_frame(10.0), {}, 4.0)));
}

TEST(Prompt, SentinelVerbatimBlocksAndTruncation) {
  const ReferencePath p(testing::straight_points());
  const WorldFrame f = ego_frame(5.0, {snapshot("a", 10, 0, 0, 4), snapshot("b", -12, 3.5, kPi, 6)});
  const auto blocks = encode_scene(f, p);
  const std::string prompt = build_prompt(blocks, 5.0, 15.0);
  EXPECT_EQ(prompt.rfind(system_instructions(), 0), 0u);
  EXPECT_NE(prompt.find("Ego vehicle: speed 5.0 m/s, road speed limit 15.0 m/s."), std::string::npos);
  EXPECT_NE(prompt.find(join_descriptions(blocks)), std::string::npos);
  EXPECT_NE(build_prompt({}, 0, 15).find("No agents nearby."), std::string::npos);

  std::vector<AgentSnapshot> many;
  for (int i = 0; i < 100; ++i) many.push_back(snapshot("ag" + std::to_string(i), 0.45 * i + 0.2, 2.0, 0.0, 1.0));
  const auto all = encode_scene(ego_frame(5.0, many), p);
  ASSERT_EQ(all.size(), 100u);
  const std::string cut = build_prompt(all, 5.0, 15.0, 4000);
  EXPECT_LE(cut.size(), 4000u);
  EXPECT_NE(cut.find(all[0].text), std::string::npos);
  EXPECT_EQ(cut.find(all[99].text), std::string::npos);
  EXPECT_NE(cut.find("farther agents omitted."), std::string::npos);
}

// Scripted responses; records every call.
class FakeTransport final : public ChatTransport {
 public:
  explicit FakeTransport(std::deque<ChatResponse> script, int* calls) : script_(std::move(script)), calls_(calls) {}
  ChatResponse post(const std::string&, const std::string& body, const std::string&, double) override {
    ++*calls_;
    last_body = body;
    if (script_.empty()) throw std::runtime_error("transport exhausted");
    ChatResponse r = script_.front();
    script_.pop_front();
    return r;
  }
  std::string last_body;

 private:
  std::deque<ChatResponse> script_;
  int* calls_;
};

ChatResponse ok(const std::string& content) {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}});
  return {200, j.dump(), false, ""};
}

ReasonerRequest request(std::size_t step = 0) {
  ReasonerRequest r;
  r.step = step;
  r.system = system_instructions();
  r.user = "Ego vehicle: speed 1.0 m/s, road speed limit 15.0 m/s.\nNo agents nearby.\n";
  return r;
}

TEST(RemoteBackend, RetriesThenSucceeds) {
  int calls = 0;
  ReasonerBackendConfig cfg;
  cfg.max_retries = 2;
  RemoteBackend b(cfg, std::make_unique<FakeTransport>(
                           std::deque<ChatResponse>{{500, "", false, ""}, ok("nonsense"), ok(R"({"speed": 6})")}, &calls));
  const auto d = b.decide(request());
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(d.suggested_speed, 6.0);
  EXPECT_EQ(d.source, DecisionSource::remote_llm);
  EXPECT_EQ(b.failure_count(), 0u);
  EXPECT_EQ(*b.last_reply(), R"({"speed": 6})");
}

TEST(RemoteBackend, FailuresBecomeFallback) {
  int calls = 0;
  ReasonerBackendConfig cfg;
  cfg.max_retries = 1;
  RemoteBackend b(cfg, std::make_unique<FakeTransport>(
                           std::deque<ChatResponse>{{0, "", true, "timeout"}, {200, "not json", false, ""}}, &calls));
  const auto d = b.decide(request());
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(d.source, DecisionSource::fallback);
  EXPECT_EQ(d.suggested_speed, 15.0);
  EXPECT_EQ(b.failure_count(), 1u);
  EXPECT_FALSE(b.last_reply());
  // Transport throwing is absorbed too.
  EXPECT_NO_THROW(b.decide(request()));
  EXPECT_EQ(b.failure_count(), 2u);
}

TEST(RemoteBackend, RequestBody) {
  const auto j = nlohmann::json::parse(chat_request_body("m1", request()));
  EXPECT_EQ(j["model"], "m1");
  EXPECT_EQ(j["messages"][0]["role"], "system");
  EXPECT_EQ(j["messages"][0]["content"], system_instructions());
  EXPECT_EQ(j["messages"][1]["role"], "user");
  EXPECT_EQ(j["temperature"], 0);
}

TEST(ReplayBackend, MatchesStepAndHash) {
  const auto req = request(4);
  ReplayBackend b({{4, req.prompt_hash(), std::string(R"({"speed": 2.5})")}, {5, "deadbeef", std::string("{}")},
                   {6, request(6).prompt_hash(), std::nullopt}});
  EXPECT_EQ(b.decide(req).suggested_speed, 2.5);
  EXPECT_EQ(b.failure_count(), 0u);
  EXPECT_EQ(b.decide(request(5)).source, DecisionSource::fallback);
  EXPECT_EQ(b.decide(request(6)).source, DecisionSource::fallback);
  EXPECT_EQ(b.decide(request(7)).source, DecisionSource::fallback);
  EXPECT_EQ(b.failure_count(), 3u);
}

TEST(RecordingBackend, WritesReplayableLines) {
  const auto path = std::filesystem::temp_directory_path() / "dualad_record_test.jsonl";
  int calls = 0;
  ReasonerBackendConfig cfg;
  cfg.max_retries = 0;
  {
    RecordingBackend rec(std::make_unique<RemoteBackend>(
                             cfg, std::make_unique<FakeTransport>(
                                      std::deque<ChatResponse>{ok(R"({"speed": 9})"), {404, "", false, ""}}, &calls)),
                         path.string());
    EXPECT_EQ(rec.decide(request(0)).suggested_speed, 9.0);
    EXPECT_EQ(rec.decide(request(10)).source, DecisionSource::fallback);
    EXPECT_EQ(rec.failure_count(), 1u);
  }
  const auto entries = load_replay(path.string());
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[1].step, 10u);
  EXPECT_FALSE(entries[1].reply);
  ReplayBackend replay(entries);
  EXPECT_EQ(replay.decide(request(0)).suggested_speed, 9.0);
  std::filesystem::remove(path);
}

TEST(LoadReplay, Errors) {
  EXPECT_THROW(load_replay("/nonexistent/replay.jsonl"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "dualad_bad_replay.jsonl";
  {
    std::ofstream(path) << "{\"prompt_hash\": \"x\"}\n";
  }
  EXPECT_THROW(load_replay(path.string()), SchemaError);
  {
    std::ofstream(path) << "[1]\n";
  }
  EXPECT_THROW(load_replay(path.string()), ParseError);
  std::filesystem::remove(path);
}

TEST(BackendConfig, Validate) {
  ReasonerBackendConfig c;
  EXPECT_NO_THROW(c.validate(0.1));
  c.call_period = 0.05;
  EXPECT_THROW(c.validate(0.1), ConfigError);
  c = {};
  c.timeout = 0.0;
  EXPECT_THROW(c.validate(0.1), ConfigError);
  c = {};
  c.max_retries = -1;
  EXPECT_THROW(c.validate(0.1), ConfigError);
}

}  // namespace
}  // namespace dualad
