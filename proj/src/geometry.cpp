#include "mindisp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mindisp {

double normalize_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (theta >= -std::numbers::pi && theta < std::numbers::pi) {
    return theta;
  }
  double wrapped = theta - two_pi * std::floor((theta + std::numbers::pi) / two_pi);
  // floor() can land exactly on +pi after rounding
  if (wrapped >= std::numbers::pi) {
    wrapped -= two_pi;
  }
  return wrapped;
}

Pose make_pose(double x, double y, double theta) { return Pose{x, y, normalize_angle(theta)}; }

Vec2 rotate(const Vec2& v, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Vec2 to_world(const Pose& pose, const Vec2& body_point) {
  return pose.position() + rotate(body_point, pose.theta);
}

Pose compose(const Pose& a, const Pose& b) {
  const Vec2 p = to_world(a, b.position());
  return make_pose(p.x(), p.y(), a.theta + b.theta);
}

void BoundingModel::check() const {
  if (spheres.empty()) {
    throw std::invalid_argument("bounding model has no spheres");
  }
  for (const auto& s : spheres) {
    if (!(s.radius > 0.0) || !std::isfinite(s.radius)) {
      throw std::invalid_argument("bounding sphere radius must be positive");
    }
    if (!s.offset.allFinite()) {
      throw std::invalid_argument("bounding sphere offset must be finite");
    }
  }
}

double BoundingModel::reach() const {
  double r = 0.0;
  for (const auto& s : spheres) {
    r = std::max(r, s.offset.norm() + s.radius);
  }
  return r;
}

std::vector<Vec2> Rect::corners() const {
  std::vector<Vec2> out;
  out.reserve(4);
  for (const auto& sign : {Vec2(1, 1), Vec2(-1, 1), Vec2(-1, -1), Vec2(1, -1)}) {
    out.push_back(center + rotate(sign.cwiseProduct(half_extents), theta));
  }
  return out;
}

double sphere_overlap(const Sphere& a, const Sphere& b) {
  return (a.center - b.center).norm() - (a.radius + b.radius);
}

double smooth_min0(double s, double eps) { return 0.5 * (s - std::sqrt(s * s + eps * eps)); }

double smooth_min0_derivative(double s, double eps) {
  return 0.5 * (1.0 - s / std::sqrt(s * s + eps * eps));
}

double smooth_overlap(const Sphere& a, const Sphere& b, double eps) {
  return smooth_min0(sphere_overlap(a, b), eps);
}

std::vector<Sphere> place_body(const Pose& pose, const BoundingModel& model) {
  std::vector<Sphere> out;
  out.reserve(model.spheres.size());
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  for (const auto& bs : model.spheres) {
    out.push_back(Sphere{{pose.x + c * bs.offset.x() - s * bs.offset.y(),
                          pose.y + s * bs.offset.x() + c * bs.offset.y()},
                         bs.radius});
  }
  return out;
}

double point_rect_overlap(const Vec2& p, const Rect& r) {
  const Vec2 q = rotate(p - r.center, -r.theta);
  const Vec2 d = q.cwiseAbs() - r.half_extents;
  const double outside = d.cwiseMax(0.0).norm();
  const double inside = std::min(std::max(d.x(), d.y()), 0.0);
  return outside + inside;
}

Vec2 point_rect_gradient(const Vec2& p, const Rect& r) {
  const Vec2 q = rotate(p - r.center, -r.theta);
  const Vec2 d = q.cwiseAbs() - r.half_extents;
  const Vec2 sign(q.x() >= 0.0 ? 1.0 : -1.0, q.y() >= 0.0 ? 1.0 : -1.0);
  Vec2 g;
  if (d.x() > 0.0 || d.y() > 0.0) {
    g = d.cwiseMax(0.0).normalized().cwiseProduct(sign);
  } else if (d.x() > d.y()) {
    g = Vec2(sign.x(), 0.0);
  } else {
    g = Vec2(0.0, sign.y());
  }
  return rotate(g, r.theta);
}

namespace {

void project(const Rect& r, const Vec2& axis, double& lo, double& hi) {
  const double c = axis.dot(r.center);
  const double e = r.half_extents.x() * std::abs(axis.dot(rotate(Vec2::UnitX(), r.theta))) +
                   r.half_extents.y() * std::abs(axis.dot(rotate(Vec2::UnitY(), r.theta)));
  lo = c - e;
  hi = c + e;
}

}  // namespace

double rect_rect_overlap(const Rect& a, const Rect& b) {
  const Vec2 axes[4] = {rotate(Vec2::UnitX(), a.theta), rotate(Vec2::UnitY(), a.theta),
                        rotate(Vec2::UnitX(), b.theta), rotate(Vec2::UnitY(), b.theta)};
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& axis : axes) {
    double alo, ahi, blo, bhi;
    project(a, axis, alo, ahi);
    project(b, axis, blo, bhi);
    best = std::max(best, std::max(blo - ahi, alo - bhi));
  }
  return best;
}

double body_overlap(const Pose& pa, const BoundingModel& a, const Pose& pb, const BoundingModel& b) {
  const auto sa = place_body(pa, a);
  const auto sb = place_body(pb, b);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : sa) {
    for (const auto& y : sb) {
      worst = std::min(worst, sphere_overlap(x, y));
    }
  }
  return worst;
}

bool bodies_collide(const Pose& pa, const BoundingModel& a, const Pose& pb, const BoundingModel& b,
                    double tol) {
  return body_overlap(pa, a, pb, b) < -tol;
}

Vec2 unit_direction(const Vec2& from, const Vec2& to, const Vec2& fallback) {
  const Vec2 d = to - from;
  const double n = d.norm();
  if (n < 1e-15) {
    return fallback;
  }
  return d / n;
}

}  // namespace mindisp
