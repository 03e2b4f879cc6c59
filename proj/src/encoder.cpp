#include "dualad/encoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string_view>

#include "dualad/error.hpp"

namespace dualad {

void EncoderConfig::validate() const {
  if (!(alpha > 0.0 && alpha < beta && beta < kPi)) throw ConfigError("encoder.alpha", "need 0 < alpha < beta < pi");
  if (!(gamma > 0.0)) throw ConfigError("encoder.gamma", "must be > 0");
  if (!(lon_lat_threshold > 0.0)) throw ConfigError("encoder.lon_lat_threshold", "must be > 0");
  if (!(moving_speed_threshold > 0.0)) throw ConfigError("encoder.moving_speed_threshold", "must be > 0");
  if (!(attention_radius > 0.0)) throw ConfigError("encoder.attention_radius", "must be > 0");
}

std::string format_fixed(double value, int decimals) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof(buf), std::abs(value), std::chars_format::fixed);
  std::string_view repr(buf, static_cast<std::size_t>(res.ptr - buf));
  const auto dot = repr.find('.');
  std::string int_part(repr.substr(0, dot));
  std::string frac_part = dot == std::string_view::npos ? std::string{} : std::string(repr.substr(dot + 1));

  bool round_up = false;
  if (static_cast<int>(frac_part.size()) > decimals) {
    round_up = frac_part[static_cast<std::size_t>(decimals)] >= '5';
    frac_part.resize(static_cast<std::size_t>(decimals));
  } else {
    frac_part.append(static_cast<std::size_t>(decimals) - frac_part.size(), '0');
  }
  std::string digits = int_part + frac_part;
  if (round_up) {
    int i = static_cast<int>(digits.size()) - 1;
    for (; i >= 0; --i) {
      if (digits[static_cast<std::size_t>(i)] == '9') {
        digits[static_cast<std::size_t>(i)] = '0';
      } else {
        ++digits[static_cast<std::size_t>(i)];
        break;
      }
    }
    if (i < 0) digits.insert(digits.begin(), '1');
  }
  const std::size_t int_len = digits.size() - static_cast<std::size_t>(decimals);
  std::string out = digits.substr(0, int_len);
  if (decimals > 0) out += "." + digits.substr(int_len);
  const bool zero = std::all_of(digits.begin(), digits.end(), [](char c) { return c == '0'; });
  if (value < 0.0 && !zero) out.insert(out.begin(), '-');
  return out;
}

std::string describe_longitudinal(double s, const EncoderConfig& cfg) {
  if (s > cfg.lon_lat_threshold) return format_fixed(s, 1) + " meters ahead";
  if (s < -cfg.lon_lat_threshold) return format_fixed(std::abs(s), 1) + " meters behind";
  return "parallel with the ego";
}

std::string describe_lateral(double d, const EncoderConfig& cfg) {
  if (d > cfg.lon_lat_threshold) return format_fixed(d, 1) + " meters left";
  if (d < -cfg.lon_lat_threshold) return format_fixed(std::abs(d), 1) + " meters right";
  return "directly in line with the ego";
}

double normalize_orientation(double theta_fren) { return wrap_angle(theta_fren); }

OrientationCase classify_orientation(double o, double d, const EncoderConfig& cfg) {
  const double a = cfg.alpha;
  const double b = cfg.beta;
  if (-a <= o && o <= a) return OrientationCase::same_direction;
  if (o <= -b || o >= b) return OrientationCase::opposite_direction;
  if (d >= cfg.gamma && -b <= o && o <= -a) return OrientationCase::towards;
  if (d <= -cfg.gamma && a <= o && o <= b) return OrientationCase::towards;
  return OrientationCase::away;
}

std::string describe_orientation(double o_norm, double d, double speed, const EncoderConfig& cfg) {
  const auto idx = static_cast<std::size_t>(classify_orientation(o_norm, d, cfg));
  std::string phrase = cfg.orientation_phrases[idx];
  const std::string w = speed >= cfg.moving_speed_threshold ? "moving" : "facing";
  if (auto pos = phrase.find("{W}"); pos != std::string::npos) phrase.replace(pos, 3, w);
  return phrase;
}

std::string render_agent(const std::string& id, const FrenetPose& fp, double width, double length, double speed,
                         const EncoderConfig& cfg) {
  const double o_norm = normalize_orientation(fp.theta);
  std::string text;
  text += "ID: " + id + "\n";
  text += "Position: (" + format_fixed(fp.s, 1) + ", " + format_fixed(fp.d, 1) + ") meters (" +
          describe_longitudinal(fp.s, cfg) + ", " + describe_lateral(fp.d, cfg) + ")\n";
  text += "Size: Width: " + format_fixed(width, 1) + " m, Length: " + format_fixed(length, 1) + " m\n";
  text += "Speed: " + format_fixed(speed, 1) + " m/s\n";
  text += "Orientation: " + format_fixed(o_norm, 2) + " rad (" + describe_orientation(o_norm, fp.d, speed, cfg) + ")";
  return text;
}

std::vector<AgentDescription> encode_scene(const WorldFrame& frame, const ReferencePath& path,
                                           const EncoderConfig& cfg) {
  const double ego_s = to_frenet(path, frame.ego.pose, 0.0).s;
  struct Entry {
    double abs_s;
    const AgentSnapshot* agent;
    FrenetPose fp;
  };
  std::vector<Entry> entries;
  for (const auto& a : frame.agents) {
    const double dist = std::hypot(a.pose.x - frame.ego.pose.x, a.pose.y - frame.ego.pose.y);
    if (dist > cfg.attention_radius) continue;
    const FrenetPose fp = to_frenet(path, a.pose, ego_s);
    entries.push_back({std::abs(fp.s), &a, fp});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.abs_s != y.abs_s) return x.abs_s < y.abs_s;
    return x.agent->id < y.agent->id;
  });
  std::vector<AgentDescription> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    out.push_back({e.agent->id, render_agent(e.agent->id, e.fp, e.agent->width, e.agent->length, e.agent->speed, cfg)});
  }
  return out;
}

std::string join_descriptions(const std::vector<AgentDescription>& blocks) {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i > 0) out += "\n";
    out += blocks[i].text;
    out += "\n";
  }
  return out;
}

}  // namespace dualad
