#include "dualad/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dualad/error.hpp"

namespace dualad {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& where) {
  const std::string field = where.empty() ? key : where + "." + key;
  if (!obj.is_object()) throw SchemaError(where.empty() ? "<root>" : where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(field, "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw SchemaError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(field, "must be finite");
  return x;
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw SchemaError(field, "expected a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& field) {
  if (!v.is_array()) throw SchemaError(field, "expected an array");
  return v;
}

std::vector<double> as_tuple(const json& v, std::size_t n, const std::string& field) {
  as_array(v, field);
  if (v.size() != n) throw SchemaError(field, "expected " + std::to_string(n) + " numbers");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(as_number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<AgentState> parse_states(const json& v, const std::string& field) {
  as_array(v, field);
  if (v.empty()) throw ValidationError(field, "needs at least one state");
  std::vector<AgentState> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const auto t = as_tuple(v[i], 5, f);
    if (t[4] < 0.0) throw ValidationError(f, "speed must be >= 0");
    if (!out.empty() && !(t[0] > out.back().t)) throw ValidationError(f, "times must be strictly increasing");
    out.push_back({t[0], t[1], t[2], t[3], t[4]});
  }
  return out;
}

json states_to_json(const std::vector<AgentState>& states) {
  json arr = json::array();
  for (const auto& s : states) arr.push_back({s.t, s.x, s.y, s.theta, s.speed});
  return arr;
}

}  // namespace

const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::vehicle:
      return "vehicle";
    case AgentKind::pedestrian:
      return "pedestrian";
    case AgentKind::bicycle:
      return "bicycle";
    case AgentKind::static_object:
      return "static_object";
  }
  return "vehicle";
}

AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "vehicle") return AgentKind::vehicle;
  if (s == "pedestrian") return AgentKind::pedestrian;
  if (s == "bicycle") return AgentKind::bicycle;
  if (s == "static_object") return AgentKind::static_object;
  throw ValidationError("kind", "unknown agent kind '" + s + "'");
}

std::size_t Scenario::num_steps() const {
  return static_cast<std::size_t>(std::floor(duration / kGridStep + 1e-9));
}

std::vector<double> Scenario::red_stop_lines(double t) const {
  // Latest entry at or before t decides the state of each stop line.
  std::vector<std::pair<double, LightState>> current;
  for (const auto& tl : traffic_lights) {
    if (tl.t > t + 1e-9) continue;
    auto it = std::find_if(current.begin(), current.end(),
                           [&](const auto& c) { return std::abs(c.first - tl.stop_line_s) < 1e-9; });
    if (it == current.end()) {
      current.emplace_back(tl.stop_line_s, tl.state);
    } else {
      it->second = tl.state;
    }
  }
  std::vector<double> red;
  for (const auto& [s, state] : current) {
    if (state == LightState::red) red.push_back(s);
  }
  std::sort(red.begin(), red.end());
  return red;
}

std::vector<AgentState> resample_states(const std::vector<AgentState>& logged, double duration, double step) {
  const auto n = static_cast<std::size_t>(std::floor(duration / step + 1e-9));
  std::vector<AgentState> out;
  out.reserve(n + 1);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * step;
    AgentState s;
    if (t <= logged.front().t) {
      s = logged.front();
    } else if (t >= logged.back().t) {
      s = logged.back();
    } else {
      while (seg + 1 < logged.size() && logged[seg + 1].t < t) ++seg;
      const AgentState& a = logged[seg];
      const AgentState& b = logged[seg + 1];
      const double w = (t - a.t) / (b.t - a.t);
      s.x = a.x + w * (b.x - a.x);
      s.y = a.y + w * (b.y - a.y);
      s.speed = a.speed + w * (b.speed - a.speed);
      s.theta = wrap_angle(a.theta + w * wrap_angle(b.theta - a.theta));
    }
    s.t = t;
    out.push_back(s);
  }
  return out;
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw SchemaError("<root>", "expected a JSON object");
  const std::string format = as_string(require(doc, "format", ""), "format");
  if (format != kScenarioFormat) {
    throw ValidationError("format", "unsupported format '" + format + "', expected '" + kScenarioFormat + "'");
  }
  const std::string id = as_string(require(doc, "id", ""), "id");
  if (id.empty()) throw ValidationError("id", "must not be empty");

  const json& cl = as_array(require(doc, "centerline", ""), "centerline");
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    const auto p = as_tuple(cl[i], 2, "centerline[" + std::to_string(i) + "]");
    pts.push_back({p[0], p[1]});
  }
  std::optional<ReferencePath> centerline;
  try {
    centerline.emplace(std::move(pts));
  } catch (const InvalidPath& e) {
    throw ValidationError("centerline", e.what());
  }

  const double speed_limit = as_number(require(doc, "speed_limit_mps", ""), "speed_limit_mps");
  if (!(speed_limit > 0.0)) throw ValidationError("speed_limit_mps", "must be > 0");
  const double duration = as_number(require(doc, "duration_s", ""), "duration_s");
  if (!(duration > 0.0)) throw ValidationError("duration_s", "must be > 0");

  const auto ego = as_tuple(require(doc, "ego_init", ""), 4, "ego_init");
  if (ego[3] < 0.0) throw ValidationError("ego_init[3]", "speed must be >= 0");

  std::vector<AgentRecord> agents;
  std::set<std::string> seen;
  const json& agents_json = as_array(require(doc, "agents", ""), "agents");
  for (std::size_t i = 0; i < agents_json.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const json& a = agents_json[i];
    AgentRecord rec;
    rec.id = as_string(require(a, "id", where), where + ".id");
    if (!seen.insert(rec.id).second) throw ValidationError(where + ".id", "duplicate agent id '" + rec.id + "'");
    try {
      rec.kind = agent_kind_from_string(as_string(require(a, "kind", where), where + ".kind"));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ".kind", e.what());
    }
    rec.width = as_number(require(a, "width_m", where), where + ".width_m");
    rec.length = as_number(require(a, "length_m", where), where + ".length_m");
    if (!(rec.width > 0.0)) throw ValidationError(where + ".width_m", "must be > 0");
    if (!(rec.length > 0.0)) throw ValidationError(where + ".length_m", "must be > 0");
    rec.logged_states = parse_states(require(a, "states", where), where + ".states");
    rec.states = resample_states(rec.logged_states, duration);
    agents.push_back(std::move(rec));
  }

  std::vector<TrafficLightState> lights;
  if (auto it = doc.find("traffic_lights"); it != doc.end()) {
    as_array(*it, "traffic_lights");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "traffic_lights[" + std::to_string(i) + "]";
      const json& e = (*it)[i];
      TrafficLightState tl;
      tl.t = as_number(require(e, "t", where), where + ".t");
      tl.stop_line_s = as_number(require(e, "stop_line_s", where), where + ".stop_line_s");
      const std::string st = as_string(require(e, "state", where), where + ".state");
      if (st == "red") {
        tl.state = LightState::red;
      } else if (st == "green") {
        tl.state = LightState::green;
      } else {
        throw ValidationError(where + ".state", "expected 'red' or 'green'");
      }
      if (!lights.empty() && tl.t < lights.back().t) throw ValidationError(where + ".t", "must be non-decreasing");
      lights.push_back(tl);
    }
  }

  std::optional<std::vector<AgentState>> ego_log;
  if (auto it = doc.find("ego_log"); it != doc.end()) ego_log = parse_states(*it, "ego_log");

  return Scenario{.id = id,
                  .centerline = std::move(*centerline),
                  .speed_limit = speed_limit,
                  .ego_init = {ego[0], ego[1], ego[2], ego[3]},
                  .agents = std::move(agents),
                  .duration = duration,
                  .traffic_lights = std::move(lights),
                  .ego_log = std::move(ego_log)};
}

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("<document>", e.what());
  }
  return parse_scenario(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

json scenario_to_json(const Scenario& sc) {
  json doc;
  doc["format"] = kScenarioFormat;
  doc["id"] = sc.id;
  json cl = json::array();
  for (const auto& p : sc.centerline.points()) cl.push_back({p.x, p.y});
  doc["centerline"] = std::move(cl);
  doc["speed_limit_mps"] = sc.speed_limit;
  doc["ego_init"] = {sc.ego_init.x, sc.ego_init.y, sc.ego_init.theta, sc.ego_init.speed};
  json agents = json::array();
  for (const auto& a : sc.agents) {
    agents.push_back({{"id", a.id},
                      {"kind", to_string(a.kind)},
                      {"width_m", a.width},
                      {"length_m", a.length},
                      {"states", states_to_json(a.logged_states)}});
  }
  doc["agents"] = std::move(agents);
  doc["duration_s"] = sc.duration;
  if (!sc.traffic_lights.empty()) {
    json lights = json::array();
    for (const auto& tl : sc.traffic_lights) {
      lights.push_back(
          {{"t", tl.t}, {"stop_line_s", tl.stop_line_s}, {"state", tl.state == LightState::red ? "red" : "green"}});
    }
    doc["traffic_lights"] = std::move(lights);
  }
  if (sc.ego_log) doc["ego_log"] = states_to_json(*sc.ego_log);
  return doc;
}

std::string serialize_scenario(const Scenario& scenario) { return scenario_to_json(scenario).dump(1) + "\n"; }

std::vector<Scenario> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("corpus directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_scenario(f));
  std::sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return out;
}

BenchmarkSet select_worst_k(std::vector<std::pair<std::string, double>> results, std::size_t k,
                            SelectionMetric metric, std::string name) {
  if (k > results.size()) {
    throw InsufficientResults("requested " + std::to_string(k) + " scenarios but only " +
                              std::to_string(results.size()) + " results are available");
  }
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  BenchmarkSet set;
  set.name = name.empty() ? "worst-" + std::to_string(k) : std::move(name);
  set.selection_metric = metric;
  set.k = k;
  for (std::size_t i = 0; i < k; ++i) set.scenario_ids.push_back(results[i].first);
  return set;
}

json benchmark_set_to_json(const BenchmarkSet& set) {
  return {{"name", set.name},
          {"selection_metric", set.selection_metric == SelectionMetric::r_cls ? "r_cls" : "nr_cls"},
          {"k", set.k},
          {"scenario_ids", set.scenario_ids}};
}

}  // namespace dualad
