#include "mindisp/body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mindisp {

ShapePart ShapePart::circle(const Vec2& offset, double radius) {
  ShapePart p;
  p.kind = Kind::kCircle;
  p.offset = offset;
  p.radius = radius;
  return p;
}

ShapePart ShapePart::box(const Vec2& offset, const Vec2& half_extents, double theta) {
  ShapePart p;
  p.kind = Kind::kBox;
  p.offset = offset;
  p.half_extents = half_extents;
  p.theta = theta;
  return p;
}

Rect ShapePart::world_rect(const Pose& pose) const {
  return Rect{to_world(pose, offset), half_extents, normalize_angle(pose.theta + theta)};
}

std::vector<Vec2> ShapePart::outline(const Pose& pose, int circle_samples) const {
  if (kind == Kind::kBox) {
    return world_rect(pose).corners();
  }
  std::vector<Vec2> pts;
  const Vec2 c = to_world(pose, offset);
  for (int i = 0; i < circle_samples; ++i) {
    const double a = 2.0 * std::numbers::pi * i / circle_samples;
    pts.emplace_back(c + radius * Vec2(std::cos(a), std::sin(a)));
  }
  return pts;
}

std::string to_string(Mobility m) {
  switch (m) {
    case Mobility::kTranslate:
      return "translate";
    case Mobility::kRotate:
      return "rotate";
    case Mobility::kFixed:
      return "fixed";
  }
  return "unknown";
}

Mobility mobility_from_string(const std::string& s) {
  if (s == "translate") return Mobility::kTranslate;
  if (s == "rotate") return Mobility::kRotate;
  if (s == "fixed") return Mobility::kFixed;
  throw std::invalid_argument("unknown mobility '" + s + "'");
}

std::string to_string(CollisionKind c) { return c == CollisionKind::kBox ? "box" : "spheres"; }

CollisionKind collision_kind_from_string(const std::string& s) {
  if (s == "spheres") return CollisionKind::kSpheres;
  if (s == "box") return CollisionKind::kBox;
  throw std::invalid_argument("unknown collision kind '" + s + "'");
}

bool encloses(const BoundingModel& bounding, const std::vector<ShapePart>& shape, double tol) {
  const Pose origin;
  for (const auto& part : shape) {
    for (const auto& p : part.outline(origin)) {
      const bool inside = std::any_of(bounding.spheres.begin(), bounding.spheres.end(),
                                      [&](const BodySphere& s) {
                                        return (p - s.offset).norm() <= s.radius + tol;
                                      });
      if (!inside) return false;
    }
  }
  return true;
}

PlacedObstacle place_obstacle(const Obstacle& o, const Pose& pose) {
  PlacedObstacle out;
  out.collision = o.collision;
  out.center = pose.position();
  if (o.collision == CollisionKind::kBox) {
    if (o.shape.size() != 1 || o.shape.front().kind != ShapePart::Kind::kBox) {
      throw std::invalid_argument("obstacle '" + o.id + "' uses box collision without a single box shape");
    }
    out.rect = o.shape.front().world_rect(pose);
    for (const auto& c : out.rect.corners()) {
      out.reach = std::max(out.reach, (c - out.center).norm());
    }
  } else {
    out.spheres = place_body(pose, o.bounding);
    out.reach = o.bounding.reach();
  }
  return out;
}

SphereContact sphere_contact(const Sphere& s, const PlacedObstacle& o) {
  SphereContact best;
  best.md = std::numeric_limits<double>::infinity();
  if (o.collision == CollisionKind::kBox) {
    best.md = point_rect_overlap(s.center, o.rect) - s.radius;
    best.gradient = point_rect_gradient(s.center, o.rect);
    best.direction = -best.gradient;
    best.part = 0;
    return best;
  }
  for (std::size_t j = 0; j < o.spheres.size(); ++j) {
    const Vec2 d = s.center - o.spheres[j].center;
    const double dist = d.norm();
    const double md = dist - (s.radius + o.spheres[j].radius);
    if (md < best.md) {
      best.md = md;
      best.part = static_cast<int>(j);
      if (dist > 1e-15) {
        best.gradient = d / dist;
        best.direction = -best.gradient;
      } else {
        best.gradient = Vec2::Zero();
        best.direction = unit_direction(s.center, o.center, Vec2::UnitX());
      }
    }
  }
  return best;
}

double obstacle_overlap(const PlacedObstacle& a, const PlacedObstacle& b) {
  const bool abox = a.collision == CollisionKind::kBox;
  const bool bbox = b.collision == CollisionKind::kBox;
  if (abox && bbox) {
    return rect_rect_overlap(a.rect, b.rect);
  }
  if (abox || bbox) {
    const PlacedObstacle& box = abox ? a : b;
    const PlacedObstacle& balls = abox ? b : a;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& s : balls.spheres) {
      worst = std::min(worst, point_rect_overlap(s.center, box.rect) - s.radius);
    }
    return worst;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : a.spheres) {
    for (const auto& y : b.spheres) {
      worst = std::min(worst, sphere_overlap(x, y));
    }
  }
  return worst;
}

}  // namespace mindisp
