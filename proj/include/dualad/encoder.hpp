#pragma once

#include <array>
#include <string>
#include <vector>

#include "dualad/frame.hpp"
#include "dualad/geom.hpp"

namespace dualad {

struct EncoderConfig {
  double alpha = 0.06;  // rad
  double beta = 3.08;   // rad
  double gamma = 1.0;   // m
  double lon_lat_threshold = 1.0;
  double moving_speed_threshold = 0.01;
  double attention_radius = 50.0;
  /// `{W}` is replaced by "moving" or "facing".
  std::array<std::string, 4> orientation_phrases{
      "{W} in the same direction as the ego vehicle",
      "{W} in the opposite direction of the ego vehicle",
      "{W} towards the ego vehicle's planned trajectory",
      "{W} away from the ego vehicle's planned trajectory",
  };

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

struct AgentDescription {
  std::string agent_id;
  std::string text;
};

/// Fixed-point decimal with round-half-up applied to the shortest decimal
/// representation of `value` (so 2.675 renders as "2.68"). Never emits "-0".
std::string format_fixed(double value, int decimals);

std::string describe_longitudinal(double s, const EncoderConfig& cfg = {});
std::string describe_lateral(double d, const EncoderConfig& cfg = {});

/// (theta + pi) mod 2pi - pi with a non-negative remainder; result in [-pi, pi).
double normalize_orientation(double theta_fren);

/// Index into EncoderConfig::orientation_phrases; the first matching case
/// wins on the shared boundaries.
enum class OrientationCase { same_direction = 0, opposite_direction = 1, towards = 2, away = 3 };
OrientationCase classify_orientation(double o_norm, double d, const EncoderConfig& cfg = {});

std::string describe_orientation(double o_norm, double d, double speed, const EncoderConfig& cfg = {});

/// Five-line description block for one agent already expressed in Frenet
/// coordinates relative to the ego.
std::string render_agent(const std::string& id, const FrenetPose& fp, double width, double length, double speed,
                         const EncoderConfig& cfg = {});

/// One block per agent within the attention radius, ordered by |s| then id.
std::vector<AgentDescription> encode_scene(const WorldFrame& frame, const ReferencePath& path,
                                           const EncoderConfig& cfg = {});

/// Blocks separated by a blank line, newline-terminated; empty for no agents.
std::string join_descriptions(const std::vector<AgentDescription>& blocks);

}  // namespace dualad
