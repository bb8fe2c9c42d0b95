#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mindisp {

using Vec2 = Eigen::Vector2d;

// Overlaps shallower than this are treated as contact, not collision.
inline constexpr double kContactTolerance = 1e-9;
inline constexpr double kDefaultSmoothingEps = 1e-4;

/// Wraps an angle into [-pi, pi).
double normalize_angle(double theta);

/// Planar pose. theta is kept in [-pi, pi) by every operation that produces one.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

Pose make_pose(double x, double y, double theta);

/// Rotates `v` by `theta` (counter-clockwise).
Vec2 rotate(const Vec2& v, double theta);

/// Maps a body-frame point into the world frame.
Vec2 to_world(const Pose& pose, const Vec2& body_point);

/// a ∘ b: apply b in the frame of a.
Pose compose(const Pose& a, const Pose& b);

struct Sphere {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

/// Sphere rigidly attached to a body, expressed in the body frame.
struct BodySphere {
  Vec2 offset = Vec2::Zero();
  double radius = 0.0;
  bool operator==(const BodySphere&) const = default;
};

struct BoundingModel {
  std::vector<BodySphere> spheres;

  bool operator==(const BoundingModel&) const = default;
  /// Throws std::invalid_argument if empty or any radius is not positive.
  void check() const;
  /// Radius of the smallest origin-centred circle containing every sphere.
  double reach() const;
};

/// Oriented rectangle in the plane.
struct Rect {
  Vec2 center = Vec2::Zero();
  Vec2 half_extents = Vec2::Ones();
  double theta = 0.0;

  std::vector<Vec2> corners() const;
};

struct OverlapRecord {
  double md = 0.0;            // signed, <= 0 for stored records
  Vec2 direction = Vec2::UnitX();  // robot sphere -> obstacle (unit)
  int time_index = 0;
  int substep = 0;
  int robot_sphere = 0;
  int obstacle_sphere = 0;
  std::string obstacle_id;
  Vec2 contact = Vec2::Zero();  // robot sphere centre at the event
};

/// Signed gap between two spheres: ||a.c - b.c|| - (a.r + b.r).
double sphere_overlap(const Sphere& a, const Sphere& b);

/// C-infinity approximation of min(s, 0): (s - sqrt(s^2 + eps^2)) / 2.
double smooth_min0(double s, double eps);
/// d/ds of smooth_min0.
double smooth_min0_derivative(double s, double eps);

double smooth_overlap(const Sphere& a, const Sphere& b, double eps = kDefaultSmoothingEps);

/// World-frame spheres of `model` at `pose`, in model order.
std::vector<Sphere> place_body(const Pose& pose, const BoundingModel& model);

/// Signed distance from a point to a rectangle: negative inside.
double point_rect_overlap(const Vec2& p, const Rect& r);
/// Gradient of point_rect_overlap with respect to p (unit length away from the boundary).
Vec2 point_rect_gradient(const Vec2& p, const Rect& r);

/// Separating-axis test; returns the smallest axis gap (negative: penetration depth).
double rect_rect_overlap(const Rect& a, const Rect& b);

/// Minimum sphere_overlap over all sphere pairs of two placed bodies.
double body_overlap(const Pose& pa, const BoundingModel& a, const Pose& pb, const BoundingModel& b);

/// True iff some sphere pair overlaps deeper than `tol`.
bool bodies_collide(const Pose& pa, const BoundingModel& a, const Pose& pb, const BoundingModel& b,
                    double tol = kContactTolerance);

/// Unit vector from `from` to `to`; `fallback` when the points coincide.
Vec2 unit_direction(const Vec2& from, const Vec2& to, const Vec2& fallback = Vec2::UnitX());

}  // namespace mindisp
