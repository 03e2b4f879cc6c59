#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace dualad {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Pose in the local Cartesian frame. Heading is not normalized.
struct CartesianPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  bool operator==(const CartesianPose&) const = default;
};

/// Pose relative to a reference path: `s` is arc length relative to the
/// ego station, `d` the signed lateral offset (positive left), `theta` the
/// heading relative to the path tangent.
struct FrenetPose {
  double s = 0.0;
  double d = 0.0;
  double theta = 0.0;
};

/// Wraps an angle into [-pi, pi).
double wrap_angle(double theta);

/// Piecewise-linear path parameterized by arc length.
///
/// Positions interpolate linearly along each segment. The tangent heading is
/// interpolated linearly in arc length between vertex headings (interior
/// vertices take the bisector of their adjacent segments), so the Frenet
/// frame is continuous and the Cartesian/Frenet maps are exact inverses of
/// each other inside the corridor.
class ReferencePath {
 public:
  /// Throws InvalidPath on fewer than two points, coincident consecutive
  /// points, or non-finite coordinates.
  explicit ReferencePath(std::vector<Point2> points);

  std::span<const Point2> points() const { return points_; }
  std::span<const double> arclength() const { return arclength_; }
  double length() const { return arclength_.back(); }

  /// Position at absolute arc length `s`, extrapolating linearly outside
  /// [0, length()].
  Point2 position_at(double s) const;
  /// Unwrapped tangent heading at absolute arc length `s`.
  double heading_at(double s) const;
  /// Curvature (d heading / ds) of the interpolated tangent field.
  double curvature_at(double s) const;

  bool operator==(const ReferencePath& other) const { return points_ == other.points_; }

 private:
  friend struct PathProjector;
  struct Local {
    std::size_t seg;
    double u;  // segment parameter, may leave [0, 1] on the end segments
  };
  Local locate(double s) const;
  Point2 point(const Local& l) const;
  double heading(const Local& l) const;

  std::vector<Point2> points_;
  std::vector<double> arclength_;
  std::vector<double> seg_length_;
  std::vector<Point2> seg_dir_;
  std::vector<double> vertex_heading_;
};

/// Projects `pose` onto `path`. The returned `s` is measured relative to
/// `ego_s` (an absolute arc length). When several foot points are equally
/// near, the one with the smallest arc length wins.
FrenetPose to_frenet(const ReferencePath& path, const CartesianPose& pose, double ego_s = 0.0);

/// Inverse of to_frenet. Throws OutOfRange when ego_s + fp.s leaves the path.
CartesianPose to_cartesian(const ReferencePath& path, const FrenetPose& fp, double ego_s = 0.0);

/// Rectangle centred on `center`; `length` runs along the heading.
struct OrientedBox {
  CartesianPose center;
  double width = 0.0;
  double length = 0.0;

  std::array<Point2, 4> corners() const;
  /// Radius of the circumscribed circle.
  double radius() const;
  OrientedBox inflated(double margin) const;
};

/// Separating-axis test over the four edge normals. Touching counts.
bool boxes_collide(const OrientedBox& a, const OrientedBox& b);

/// Euclidean distance between two boxes; zero when they collide.
double box_distance(const OrientedBox& a, const OrientedBox& b);

}  // namespace dualad
