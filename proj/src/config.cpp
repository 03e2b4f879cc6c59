#include "dualad/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "dualad/error.hpp"

namespace dualad {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment outside of quotes.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

std::string where(const std::string& key, const ConfigValue& v) {
  return key + " (line " + std::to_string(v.line) + ")";
}

double as_number(const std::string& key, const ConfigValue& v) {
  const std::string& r = v.raw;
  double x = 0.0;
  const auto res = std::from_chars(r.data(), r.data() + r.size(), x);
  if (res.ec != std::errc{} || res.ptr != r.data() + r.size() || !std::isfinite(x)) {
    throw ConfigError(where(key, v), "expected a number, got '" + r + "'");
  }
  return x;
}

std::uint64_t as_count(const std::string& key, const ConfigValue& v) {
  const double x = as_number(key, v);
  if (x < 0.0 || std::floor(x) != x) throw ConfigError(where(key, v), "expected a non-negative integer");
  return static_cast<std::uint64_t>(x);
}

bool as_bool(const std::string& key, const ConfigValue& v) {
  if (v.raw == "true") return true;
  if (v.raw == "false") return false;
  throw ConfigError(where(key, v), "expected true or false");
}

std::string as_string(const std::string& key, const ConfigValue& v) {
  const std::string& r = v.raw;
  if (r.size() < 2 || r.front() != '"' || r.back() != '"') throw ConfigError(where(key, v), "expected a quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    if (r[i] == '\\' && i + 2 < r.size()) ++i;
    out += r[i];
  }
  return out;
}

std::vector<double> as_list(const std::string& key, const ConfigValue& v) {
  const std::string& r = v.raw;
  if (r.size() < 2 || r.front() != '[' || r.back() != ']') throw ConfigError(where(key, v), "expected [a, b, ...]");
  std::vector<double> out;
  std::stringstream ss(r.substr(1, r.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(as_number(key, {item, v.line}));
  }
  return out;
}

}  // namespace

std::map<std::string, ConfigValue> parse_kv(const std::string& text) {
  std::map<std::string, ConfigValue> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(at, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at, "expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (name.empty() || value.empty()) throw ConfigError(at, "expected key = value");
    const std::string key = section.empty() ? name : section + "." + name;
    if (!out.emplace(key, ConfigValue{value, lineno}).second) throw ConfigError(key, "duplicate key at " + at);
  }
  return out;
}

const char* to_string(ReasonerKind k) {
  switch (k) {
    case ReasonerKind::none: return "none";
    case ReasonerKind::mock: return "mock";
    case ReasonerKind::remote: return "remote";
    case ReasonerKind::replay: return "replay";
  }
  return "?";
}

ReasonerKind reasoner_kind_from_string(const std::string& s) {
  if (s == "none") return ReasonerKind::none;
  if (s == "mock") return ReasonerKind::mock;
  if (s == "remote") return ReasonerKind::remote;
  if (s == "replay") return ReasonerKind::replay;
  throw ConfigError("reasoner", "unknown reasoner '" + s + "'");
}

void RunConfig::validate() const {
  planning.idm.validate();
  planning.lattice.validate();
  planning.sampling.validate();
  if (!(planning.planning.horizon > 0.0)) throw ConfigError("planning.horizon", "must be > 0");
  if (!(planning.planning.safety_margin >= 0.0)) throw ConfigError("planning.safety_margin", "must be >= 0");
  sim.validate();
  weights.validate();
  if (reasoner == ReasonerKind::replay && replay_file.empty()) {
    throw ConfigError("reasoner.replay_file", "required for the replay reasoner");
  }
}

void apply_config(RunConfig& cfg, const std::map<std::string, ConfigValue>& kv) {
  using Setter = std::function<void(const std::string&, const ConfigValue&)>;
  auto num = [](double& dst) -> Setter { return [&dst](const std::string& k, const ConfigValue& v) { dst = as_number(k, v); }; };
  auto list = [](std::vector<double>& dst) -> Setter {
    return [&dst](const std::string& k, const ConfigValue& v) { dst = as_list(k, v); };
  };
  auto str = [](std::string& dst) -> Setter { return [&dst](const std::string& k, const ConfigValue& v) { dst = as_string(k, v); }; };
  auto flag = [](bool& dst) -> Setter { return [&dst](const std::string& k, const ConfigValue& v) { dst = as_bool(k, v); }; };

  auto& pl = cfg.planning;
  auto& sim = cfg.sim;
  std::map<std::string, Setter> setters{
      {"run.planner", [&](const std::string& k, const ConfigValue& v) {
         try {
           cfg.planner = planner_kind_from_string(as_string(k, v));
         } catch (const ConfigError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"run.reasoner", [&](const std::string& k, const ConfigValue& v) { cfg.reasoner = reasoner_kind_from_string(as_string(k, v)); }},
      {"run.mode", [&](const std::string& k, const ConfigValue& v) { cfg.mode = sim_mode_from_string(as_string(k, v)); }},
      {"run.seed", [&](const std::string& k, const ConfigValue& v) { cfg.seed = as_count(k, v); }},
      {"run.workers", [&](const std::string& k, const ConfigValue& v) { cfg.workers = as_count(k, v); }},
      {"run.k", [&](const std::string& k, const ConfigValue& v) { cfg.k = as_count(k, v); }},
      {"run.tag", str(cfg.tag)},
      {"run.scenario", [&](const std::string& k, const ConfigValue& v) { cfg.scenario = as_string(k, v); }},
      {"run.corpus", [&](const std::string& k, const ConfigValue& v) { cfg.corpus = as_string(k, v); }},
      {"run.out", [&](const std::string& k, const ConfigValue& v) { cfg.out = as_string(k, v); }},

      {"sim.step", num(sim.step)},
      {"sim.duration", num(sim.duration)},
      {"sim.plan_period", num(sim.plan_period)},
      {"sim.max_accel", num(sim.max_accel)},
      {"sim.hard_brake_decel", num(sim.hard_brake_decel)},
      {"sim.controller", [&](const std::string& k, const ConfigValue& v) { sim.controller = controller_kind_from_string(as_string(k, v)); }},
      {"sim.q_lateral", num(sim.lqr.q_lateral)},
      {"sim.q_heading", num(sim.lqr.q_heading)},
      {"sim.q_steering", num(sim.lqr.q_steering)},
      {"sim.r_steering_rate", num(sim.lqr.r_steering_rate)},
      {"sim.wheelbase", num(sim.vehicle.wheelbase)},
      {"sim.max_steering", num(sim.vehicle.max_steering)},

      {"planning.horizon", num(pl.planning.horizon)},
      {"planning.safety_margin", num(pl.planning.safety_margin)},
      {"planning.half_lane_width", num(pl.planning.half_lane_width)},
      {"planning.desired_speed", [&](const std::string& k, const ConfigValue& v) { pl.planning.desired_speed = as_number(k, v); }},
      {"planning.prediction", [&](const std::string& k, const ConfigValue& v) {
         const std::string s = as_string(k, v);
         if (s == "constant_velocity") {
           pl.planning.prediction = PredictionMode::constant_velocity;
         } else if (s == "log_replay") {
           pl.planning.prediction = PredictionMode::log_replay;
         } else {
           throw ConfigError(k, "expected constant_velocity or log_replay");
         }
       }},

      {"idm.a", num(pl.idm.a)},
      {"idm.v0", num(pl.idm.v0)},
      {"idm.s_star", num(pl.idm.s_star)},
      {"idm.delta", num(pl.idm.delta)},
      {"idm.min_gap_floor", num(pl.idm.min_gap_floor)},
      {"idm.max_brake", num(pl.idm.max_brake)},

      {"lattice.terminal_lateral_offsets", list(pl.lattice.terminal_lateral_offsets)},
      {"lattice.terminal_times", list(pl.lattice.terminal_times)},
      {"lattice.terminal_speeds", list(pl.lattice.terminal_speeds)},
      {"lattice.w_smoothness", num(pl.lattice.transition_cost_weights.smoothness)},
      {"lattice.w_offset", num(pl.lattice.transition_cost_weights.offset)},
      {"lattice.w_obstacle", num(pl.lattice.transition_cost_weights.obstacle)},
      {"lattice.w_speed", num(pl.lattice.transition_cost_weights.speed)},
      {"lattice.max_curvature", num(pl.lattice.constraint_limits.max_curvature)},
      {"lattice.max_accel", num(pl.lattice.constraint_limits.max_accel)},
      {"lattice.max_lat_accel", num(pl.lattice.constraint_limits.max_lat_accel)},

      {"sampling.w_lateral_accel", num(pl.sampling.cost_weights.lateral_accel)},
      {"sampling.w_longitudinal_accel", num(pl.sampling.cost_weights.longitudinal_accel)},
      {"sampling.w_velocity_deviation", num(pl.sampling.cost_weights.velocity_deviation)},
      {"sampling.w_route_distance", num(pl.sampling.cost_weights.route_distance)},
      {"sampling.w_collision_risk", num(pl.sampling.cost_weights.collision_risk)},
      {"sampling.lateral_end_offsets", list(pl.sampling.lateral_end_offsets)},
      {"sampling.horizon_set", list(pl.sampling.horizon_set)},
      {"sampling.end_speed_set", list(pl.sampling.end_speed_set)},
      {"sampling.risk_sigma", num(pl.sampling.risk_sigma)},
      {"sampling.max_curvature", num(pl.sampling.limits.max_curvature)},
      {"sampling.max_accel", num(pl.sampling.limits.max_accel)},
      {"sampling.max_lat_accel", num(pl.sampling.limits.max_lat_accel)},

      {"encoder.alpha", num(sim.encoder.alpha)},
      {"encoder.beta", num(sim.encoder.beta)},
      {"encoder.gamma", num(sim.encoder.gamma)},
      {"encoder.lon_lat_threshold", num(sim.encoder.lon_lat_threshold)},
      {"encoder.moving_speed_threshold", num(sim.encoder.moving_speed_threshold)},
      {"encoder.attention_radius", num(sim.encoder.attention_radius)},

      {"reasoner.endpoint_url", str(sim.reasoner.endpoint_url)},
      {"reasoner.model_name", str(sim.reasoner.model_name)},
      {"reasoner.api_key_env_var", str(sim.reasoner.api_key_env_var)},
      {"reasoner.timeout", num(sim.reasoner.timeout)},
      {"reasoner.max_retries", [&](const std::string& k, const ConfigValue& v) { sim.reasoner.max_retries = static_cast<int>(as_count(k, v)); }},
      {"reasoner.call_period", num(sim.reasoner.call_period)},
      {"reasoner.async_mode", flag(sim.reasoner.async_mode)},
      {"reasoner.prompt_max_length", [&](const std::string& k, const ConfigValue& v) { sim.reasoner.prompt_max_length = as_count(k, v); }},
      {"reasoner.replay_file", [&](const std::string& k, const ConfigValue& v) { cfg.replay_file = as_string(k, v); }},

      {"metrics.w_progress", num(cfg.weights.progress)},
      {"metrics.w_speed", num(cfg.weights.speed)},
      {"metrics.w_comfort", num(cfg.weights.comfort)},
      {"metrics.w_ttc", num(cfg.weights.ttc)},
      {"metrics.failure_threshold", [&](const std::string& k, const ConfigValue& v) { cfg.metrics.failure_threshold = as_count(k, v); }},
  };

  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where(key, value), "unknown key");
    try {
      it->second(key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const InputError& e) {
      throw ConfigError(where(key, value), e.what());
    }
  }
  cfg.planning.planning.vehicle = cfg.sim.vehicle;
  cfg.planning.planning.step = cfg.sim.step;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  apply_config(cfg, parse_kv(buf.str()));
  return cfg;
}

}  // namespace dualad
