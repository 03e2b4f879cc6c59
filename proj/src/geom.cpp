#include "dualad/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dualad/error.hpp"

namespace dualad {

namespace {

double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
Point2 sub(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = sub(b, a);
  const double len2 = dot(ab, ab);
  double u = len2 > 0.0 ? dot(sub(p, a), ab) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::hypot(p.x - (a.x + u * ab.x), p.y - (a.y + u * ab.y));
}

}  // namespace

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * kPi;
  double r = std::fmod(theta + kPi, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r - kPi;
}

ReferencePath::ReferencePath(std::vector<Point2> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw InvalidPath("reference path needs at least 2 points, got " + std::to_string(points_.size()));
  }
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidPath("reference path has a non-finite point");
  }
  const std::size_t n = points_.size();
  arclength_.assign(n, 0.0);
  seg_length_.resize(n - 1);
  seg_dir_.resize(n - 1);
  std::vector<double> seg_heading(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Point2 delta = sub(points_[i + 1], points_[i]);
    const double len = std::hypot(delta.x, delta.y);
    if (!(len > 1e-9)) {
      throw InvalidPath("reference path points " + std::to_string(i) + " and " + std::to_string(i + 1) +
                        " coincide");
    }
    seg_length_[i] = len;
    seg_dir_[i] = {delta.x / len, delta.y / len};
    arclength_[i + 1] = arclength_[i] + len;
    const double h = std::atan2(delta.y, delta.x);
    seg_heading[i] = i == 0 ? h : seg_heading[i - 1] + wrap_angle(h - seg_heading[i - 1]);
  }
  vertex_heading_.resize(n);
  vertex_heading_.front() = seg_heading.front();
  vertex_heading_.back() = seg_heading.back();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    vertex_heading_[i] = 0.5 * (seg_heading[i - 1] + seg_heading[i]);
  }
}

ReferencePath::Local ReferencePath::locate(double s) const {
  const std::size_t nseg = seg_length_.size();
  if (s <= 0.0) return {0, s / seg_length_[0]};
  if (s >= length()) return {nseg - 1, (s - arclength_[nseg - 1]) / seg_length_[nseg - 1]};
  auto it = std::upper_bound(arclength_.begin(), arclength_.end(), s);
  std::size_t seg = static_cast<std::size_t>(it - arclength_.begin()) - 1;
  seg = std::min(seg, nseg - 1);
  return {seg, (s - arclength_[seg]) / seg_length_[seg]};
}

Point2 ReferencePath::point(const Local& l) const {
  const Point2 a = points_[l.seg];
  const double t = l.u * seg_length_[l.seg];
  return {a.x + t * seg_dir_[l.seg].x, a.y + t * seg_dir_[l.seg].y};
}

double ReferencePath::heading(const Local& l) const {
  const double h0 = vertex_heading_[l.seg];
  const double h1 = vertex_heading_[l.seg + 1];
  if (l.u <= 0.0) return h0;
  if (l.u >= 1.0) return h1;
  return h0 + l.u * (h1 - h0);
}

Point2 ReferencePath::position_at(double s) const { return point(locate(s)); }

double ReferencePath::heading_at(double s) const { return heading(locate(s)); }

double ReferencePath::curvature_at(double s) const {
  const Local l = locate(s);
  if (l.u < 0.0 || l.u > 1.0) return 0.0;
  return (vertex_heading_[l.seg + 1] - vertex_heading_[l.seg]) / seg_length_[l.seg];
}

// Foot-point search. On each segment the residual
//   f(u) = (q - P(u)) . t(theta(u))
// vanishes at the projection; it is linear on straight stretches and close to
// linear elsewhere, so sign changes on a 5-point grid bracket every root.
struct PathProjector {
  const ReferencePath& path;
  Point2 q;

  double residual(std::size_t seg, double u) const {
    const ReferencePath::Local l{seg, u};
    const Point2 p = path.point(l);
    const double h = path.heading(l);
    return (q.x - p.x) * std::cos(h) + (q.y - p.y) * std::sin(h);
  }

  double bisect(std::size_t seg, double lo, double hi, double flo) const {
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = residual(seg, mid);
      if (fm == 0.0) return mid;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  struct Best {
    double dist = std::numeric_limits<double>::infinity();
    double s = 0.0;
  };

  void offer(std::size_t seg, double u, Best& best) const {
    const ReferencePath::Local l{seg, u};
    const Point2 p = path.point(l);
    const double dist = std::hypot(q.x - p.x, q.y - p.y);
    const double s = path.arclength_[seg] + u * path.seg_length_[seg];
    constexpr double tie = 1e-9;
    if (dist < best.dist - tie) {
      best = {dist, s};
    } else if (std::abs(dist - best.dist) <= tie && s < best.s) {
      best = {std::min(dist, best.dist), s};
    }
  }

  void solve_segment(std::size_t seg, Best& best) const {
    const std::size_t nseg = path.seg_length_.size();
    constexpr int kGrid = 4;
    std::array<double, kGrid + 1> f{};
    for (int j = 0; j <= kGrid; ++j) f[j] = residual(seg, static_cast<double>(j) / kGrid);
    if (seg == 0 && f[0] < 0.0) offer(seg, f[0] / path.seg_length_[seg], best);
    if (seg + 1 == nseg && f[kGrid] > 0.0) offer(seg, 1.0 + f[kGrid] / path.seg_length_[seg], best);
    for (int j = 0; j <= kGrid; ++j) {
      const double u = static_cast<double>(j) / kGrid;
      if (f[j] == 0.0) {
        offer(seg, u, best);
      } else if (j < kGrid && f[j + 1] != 0.0 && ((f[j] < 0.0) != (f[j + 1] < 0.0))) {
        offer(seg, bisect(seg, u, static_cast<double>(j + 1) / kGrid, f[j]), best);
      }
    }
  }

  double project() const {
    const auto pts = path.points();
    const std::size_t nseg = pts.size() - 1;
    std::vector<double> seg_dist(nseg);
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < nseg; ++i) {
      seg_dist[i] = point_segment_distance(q, pts[i], pts[i + 1]);
      if (seg_dist[i] < seg_dist[nearest]) nearest = i;
    }
    Best best;
    solve_segment(nearest, best);
    for (std::size_t i = 0; i < nseg; ++i) {
      if (i == nearest || seg_dist[i] > best.dist + 1e-9) continue;
      solve_segment(i, best);
    }
    if (!std::isfinite(best.dist)) {
      // No stationary point: fall back to the nearest vertex.
      std::size_t vi = 0;
      double vd = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double dd = std::hypot(q.x - pts[i].x, q.y - pts[i].y);
        if (dd < vd) {
          vd = dd;
          vi = i;
        }
      }
      return path.arclength_[vi];
    }
    return best.s;
  }
};

FrenetPose to_frenet(const ReferencePath& path, const CartesianPose& pose, double ego_s) {
  const Point2 q{pose.x, pose.y};
  const double s_abs = PathProjector{path, q}.project();
  const Point2 p = path.position_at(s_abs);
  const double h = path.heading_at(s_abs);
  const double d = -(q.x - p.x) * std::sin(h) + (q.y - p.y) * std::cos(h);
  return {s_abs - ego_s, d, pose.theta - h};
}

CartesianPose to_cartesian(const ReferencePath& path, const FrenetPose& fp, double ego_s) {
  const double s_abs = ego_s + fp.s;
  constexpr double tol = 1e-9;
  if (!(s_abs >= -tol && s_abs <= path.length() + tol)) {
    throw OutOfRange("arc length " + std::to_string(s_abs) + " outside path [0, " + std::to_string(path.length()) +
                     "]");
  }
  const Point2 p = path.position_at(s_abs);
  const double h = path.heading_at(s_abs);
  return {p.x - fp.d * std::sin(h), p.y + fp.d * std::cos(h), h + fp.theta};
}

std::array<Point2, 4> OrientedBox::corners() const {
  const double c = std::cos(center.theta);
  const double s = std::sin(center.theta);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  const Point2 ax{c * hl, s * hl};
  const Point2 ay{-s * hw, c * hw};
  return {Point2{center.x + ax.x + ay.x, center.y + ax.y + ay.y},
          Point2{center.x - ax.x + ay.x, center.y - ax.y + ay.y},
          Point2{center.x - ax.x - ay.x, center.y - ax.y - ay.y},
          Point2{center.x + ax.x - ay.x, center.y + ax.y - ay.y}};
}

double OrientedBox::radius() const { return 0.5 * std::hypot(width, length); }

OrientedBox OrientedBox::inflated(double margin) const {
  return {center, width + 2.0 * margin, length + 2.0 * margin};
}

bool boxes_collide(const OrientedBox& a, const OrientedBox& b) {
  const Point2 delta{b.center.x - a.center.x, b.center.y - a.center.y};
  const std::array<Point2, 2> a_axes{Point2{std::cos(a.center.theta), std::sin(a.center.theta)},
                                     Point2{-std::sin(a.center.theta), std::cos(a.center.theta)}};
  const std::array<Point2, 2> b_axes{Point2{std::cos(b.center.theta), std::sin(b.center.theta)},
                                     Point2{-std::sin(b.center.theta), std::cos(b.center.theta)}};
  auto extent = [](const std::array<Point2, 2>& axes, const OrientedBox& box, Point2 axis) {
    return 0.5 * box.length * std::abs(dot(axes[0], axis)) + 0.5 * box.width * std::abs(dot(axes[1], axis));
  };
  for (const auto& axes : {a_axes, b_axes}) {
    for (const Point2& axis : axes) {
      if (std::abs(dot(delta, axis)) > extent(a_axes, a, axis) + extent(b_axes, b, axis)) return false;
    }
  }
  return true;
}

double box_distance(const OrientedBox& a, const OrientedBox& b) {
  if (boxes_collide(a, b)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  }
  return best;
}

}  // namespace dualad
