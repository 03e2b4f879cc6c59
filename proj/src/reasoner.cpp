#include "dualad/reasoner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "dualad/error.hpp"
#include "dualad/hash.hpp"

namespace dualad {

using nlohmann::json;

const char* to_string(DecisionSource s) {
  switch (s) {
    case DecisionSource::remote_llm: return "remote_llm";
    case DecisionSource::mock: return "mock";
    case DecisionSource::fallback: return "fallback";
  }
  return "?";
}

void ReasonerBackendConfig::validate(double sim_step) const {
  if (!(timeout > 0.0)) throw ConfigError("reasoner.timeout", "must be > 0");
  if (max_retries < 0) throw ConfigError("reasoner.max_retries", "must be >= 0");
  if (!(call_period >= sim_step - 1e-9)) throw ConfigError("reasoner.call_period", "must be >= the simulation step");
  if (prompt_max_length == 0) throw ConfigError("reasoner.prompt_max_length", "must be > 0");
}

const std::string& system_instructions() {
  static const std::string text =
      "You supervise the speed of an autonomous vehicle. Read the scene description and suggest a driving "
      "speed limit between 0 and 15 m/s. Positions are (s, d) in meters relative to the ego along its route; "
      "positive d is to the left. Use 0 only when hard braking is needed.\n"
      "Answer with JSON {\"speed\": <number>, \"rationale\": <string>} and nothing else.";
  return text;
}

std::string build_user_message(const std::vector<AgentDescription>& descriptions, double ego_speed,
                               double speed_limit, std::size_t max_length) {
  const std::string head = "Ego vehicle: speed " + format_fixed(ego_speed, 1) + " m/s, road speed limit " +
                           format_fixed(speed_limit, 1) + " m/s.\n";
  const std::size_t fixed = system_instructions().size() + 2 + head.size();
  if (descriptions.empty()) return head + "No agents nearby.\n";

  std::size_t keep = descriptions.size();
  for (;;) {
    std::string body = "Nearby agents:\n\n";
    std::vector<AgentDescription> kept(descriptions.begin(), descriptions.begin() + static_cast<long>(keep));
    body += join_descriptions(kept);
    if (keep < descriptions.size()) {
      body += "\n" + std::to_string(descriptions.size() - keep) + " farther agents omitted.\n";
    }
    if (keep == 0) {
      body = "No agents nearby.\n" + std::to_string(descriptions.size()) + " farther agents omitted.\n";
    }
    if (fixed + body.size() <= max_length || keep == 0) return head + body;
    --keep;
  }
}

std::string build_prompt(const std::vector<AgentDescription>& descriptions, double ego_speed, double speed_limit,
                         std::size_t max_length) {
  return system_instructions() + "\n\n" + build_user_message(descriptions, ego_speed, speed_limit, max_length);
}

namespace {

// End index (exclusive) of the balanced object starting at `start`, honouring
// JSON strings; npos when unbalanced.
std::size_t balanced_end(const std::string& s, std::size_t start) {
  int depth = 0;
  bool in_str = false;
  bool esc = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (esc) {
        esc = false;
      } else if (c == '\\') {
        esc = true;
      } else if (c == '"') {
        in_str = false;
      }
      continue;
    }
    if (c == '"') {
      in_str = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

}  // namespace

std::optional<ReasonerDecision> parse_reply(const std::string& content) {
  for (std::size_t pos = content.find('{'); pos != std::string::npos; pos = content.find('{', pos + 1)) {
    const std::size_t end = balanced_end(content, pos);
    if (end == std::string::npos) continue;
    const json j = json::parse(content.begin() + static_cast<long>(pos), content.begin() + static_cast<long>(end),
                               nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    const auto it = j.find("speed");
    if (it == j.end() || !it->is_number()) return std::nullopt;
    const double raw = it->get<double>();
    if (!std::isfinite(raw)) return std::nullopt;
    ReasonerDecision d;
    d.source = DecisionSource::remote_llm;
    d.suggested_speed = std::clamp(raw, 0.0, kMaxSuggestedSpeed);
    d.clamped = d.suggested_speed != raw;
    if (auto r = j.find("rationale"); r != j.end() && r->is_string()) d.rationale = r->get<std::string>();
    return d;
  }
  return std::nullopt;
}

double arbitrate(double v_rule, const ReasonerDecision& decision) {
  const double s = std::clamp(decision.suggested_speed, 0.0, kMaxSuggestedSpeed);
  return s <= v_rule ? s : v_rule;
}

bool requests_hard_brake(const ReasonerDecision& decision) { return decision.suggested_speed <= 0.0; }

namespace {

bool any_contact(const WorldFrame& frame, const VehicleParams& vehicle, const std::vector<std::size_t>& idx,
                 double t) {
  const auto& e = frame.ego;
  const CartesianPose ep{e.pose.x + e.speed * t * std::cos(e.pose.theta),
                         e.pose.y + e.speed * t * std::sin(e.pose.theta), e.pose.theta};
  const OrientedBox eb = ego_box(ep, vehicle);
  for (std::size_t i : idx) {
    const auto& a = frame.agents[i];
    const CartesianPose ap{a.pose.x + a.speed * t * std::cos(a.pose.theta),
                           a.pose.y + a.speed * t * std::sin(a.pose.theta), a.pose.theta};
    if (boxes_collide(eb, {ap, a.width, a.length})) return true;
  }
  return false;
}

}  // namespace

double min_time_to_collision(const WorldFrame& frame, const VehicleParams& vehicle, double horizon, double step) {
  const auto& e = frame.ego;
  const double ch = std::cos(e.pose.theta), sh = std::sin(e.pose.theta);
  const double ego_r = 0.5 * std::hypot(vehicle.width, vehicle.length);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < frame.agents.size(); ++i) {
    const auto& a = frame.agents[i];
    const double dx = a.pose.x - e.pose.x, dy = a.pose.y - e.pose.y;
    if (dx * ch + dy * sh < 0.0) continue;
    // Reach test: nothing can meet beyond the summed travel and radii.
    const double reach = (std::abs(e.speed) + std::abs(a.speed)) * horizon + ego_r + 0.5 * std::hypot(a.width, a.length);
    if (std::hypot(dx, dy) > reach) continue;
    idx.push_back(i);
  }
  if (idx.empty()) return std::numeric_limits<double>::infinity();
  if (any_contact(frame, vehicle, idx, 0.0)) return 0.0;
  const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  double prev = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = std::min(static_cast<double>(k) * step, horizon);
    if (any_contact(frame, vehicle, idx, t)) {
      double lo = prev, hi = t;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (any_contact(frame, vehicle, idx, mid) ? hi : lo) = mid;
      }
      return hi;
    }
    prev = t;
  }
  return std::numeric_limits<double>::infinity();
}

ReasonerDecision mock_reason(const WorldFrame& frame, const VehicleParams& vehicle) {
  constexpr double kTtcThreshold = 4.0;
  const double ttc = min_time_to_collision(frame, vehicle, kTtcThreshold);
  ReasonerDecision d;
  d.source = DecisionSource::mock;
  if (ttc < kTtcThreshold) {
    d.suggested_speed = std::clamp(2.0 * ttc, 0.0, kMaxSuggestedSpeed);
    d.rationale = "time to collision " + format_fixed(ttc, 2) + " s";
  } else {
    d.suggested_speed = kMaxSuggestedSpeed;
    d.rationale = "no conflict within " + format_fixed(kTtcThreshold, 1) + " s";
  }
  return d;
}

std::string ReasonerRequest::prompt_hash() const { return fnv1a_hex(prompt()); }

ReasonerDecision MockBackend::decide(const ReasonerRequest& req) {
  if (req.frame == nullptr) return {};
  return mock_reason(*req.frame, vehicle_);
}

std::string chat_request_body(const std::string& model, const ReasonerRequest& req) {
  json body;
  body["model"] = model;
  body["messages"] = json::array({{{"role", "system"}, {"content", req.system}},
                                   {{"role", "user"}, {"content", req.user}}});
  body["temperature"] = 0;
  return body.dump();
}

std::vector<ReplayEntry> load_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open replay file " + path);
  std::vector<ReplayEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    const std::string where = path + ":" + std::to_string(lineno);
    if (j.is_discarded() || !j.is_object()) throw ParseError(where, "not a JSON object");
    if (!j.contains("step") || !j["step"].is_number_unsigned()) throw SchemaError(where + ".step", "missing");
    if (!j.contains("prompt_hash") || !j["prompt_hash"].is_string()) {
      throw SchemaError(where + ".prompt_hash", "missing");
    }
    ReplayEntry e;
    e.step = j["step"].get<std::size_t>();
    e.prompt_hash = j["prompt_hash"].get<std::string>();
    if (j.contains("reply") && j["reply"].is_string()) e.reply = j["reply"].get<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

ReplayBackend::ReplayBackend(const std::vector<ReplayEntry>& entries) {
  for (const auto& e : entries) entries_[e.step] = e;
}

ReasonerDecision ReplayBackend::decide(const ReasonerRequest& req) {
  const auto it = entries_.find(req.step);
  if (it != entries_.end() && it->second.prompt_hash == req.prompt_hash() && it->second.reply) {
    if (auto d = parse_reply(*it->second.reply)) return *d;
  }
  ++failures_;
  return {};
}

RecordingBackend::RecordingBackend(std::unique_ptr<RemoteBackend> inner, const std::string& path)
    : inner_(std::move(inner)), path_(path) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw IoError("cannot create replay file " + path_);
}

ReasonerDecision RecordingBackend::decide(const ReasonerRequest& req) {
  ReasonerDecision d = inner_->decide(req);
  json line;
  line["step"] = req.step;
  line["prompt_hash"] = req.prompt_hash();
  line["reply"] = inner_->last_reply() ? json(*inner_->last_reply()) : json(nullptr);
  std::ofstream out(path_, std::ios::app);
  out << line.dump() << "\n";
  return d;
}

}  // namespace dualad
