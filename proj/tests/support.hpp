#pragma once

#include <cmath>
#include <random>

#include "mindisp/random.hpp"
#include "mindisp/scenario.hpp"

namespace testing {

using mindisp::Pose;
using mindisp::Vec2;

inline Vec2 random_point(std::mt19937_64& rng, double extent) {
  return {mindisp::uniform(rng, -extent, extent), mindisp::uniform(rng, -extent, extent)};
}

inline Pose random_pose(std::mt19937_64& rng, double extent) {
  return Pose{mindisp::uniform(rng, -extent, extent), mindisp::uniform(rng, -extent, extent),
              mindisp::uniform(rng, -M_PI, M_PI)};
}

// Two spheres that overlap by a strictly positive depth.
inline std::pair<mindisp::Sphere, mindisp::Sphere> overlapping_pair(std::mt19937_64& rng) {
  mindisp::Sphere a{random_point(rng, 5.0), mindisp::uniform(rng, 0.05, 2.0)};
  const double rb = mindisp::uniform(rng, 0.05, 2.0);
  const double angle = mindisp::uniform(rng, -M_PI, M_PI);
  const double dist = mindisp::uniform(rng, 0.01, 0.99) * (a.radius + rb);
  mindisp::Sphere b{a.center + dist * Vec2(std::cos(angle), std::sin(angle)), rb};
  return {a, b};
}

inline mindisp::Robot point_robot(double radius, mindisp::ModelKind kind = mindisp::ModelKind::kPlanarHolonomic) {
  mindisp::Robot r;
  r.dynamics.kind = kind;
  r.bounding.spheres = {mindisp::BodySphere{Vec2::Zero(), radius}};
  r.shape = {mindisp::ShapePart::circle(Vec2::Zero(), radius)};
  return r;
}

inline mindisp::Obstacle disc(const std::string& id, const Vec2& c, double r,
                              mindisp::Mobility m = mindisp::Mobility::kTranslate) {
  mindisp::Obstacle o;
  o.id = id;
  o.shape = {mindisp::ShapePart::circle(Vec2::Zero(), r)};
  o.bounding.spheres = {mindisp::BodySphere{Vec2::Zero(), r}};
  o.pose = Pose{c.x(), c.y(), 0.0};
  o.mobility = m;
  if (m == mindisp::Mobility::kFixed) o.displacement_cost = 0.0;
  return o;
}

inline mindisp::Obstacle box(const std::string& id, const Vec2& c, const Vec2& half,
                             mindisp::Mobility m = mindisp::Mobility::kFixed) {
  mindisp::Obstacle o;
  o.id = id;
  o.shape = {mindisp::ShapePart::box(Vec2::Zero(), half)};
  o.pose = Pose{c.x(), c.y(), 0.0};
  o.mobility = m;
  o.collision = mindisp::CollisionKind::kBox;
  if (m == mindisp::Mobility::kFixed) o.displacement_cost = 0.0;
  return o;
}

// Straight constant-velocity trajectory for a holonomic robot (dt = 0.1, speed 1).
inline mindisp::Trajectory straight_line(const Vec2& from, const Vec2& to) {
  const Vec2 d = to - from;
  const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / 0.1)));
  mindisp::Trajectory t;
  for (int k = 0; k <= n; ++k) {
    const Vec2 p = from + d * (static_cast<double>(k) / n);
    t.push_back(Pose{p.x(), p.y(), 0.0});
  }
  return t;
}

}  // namespace testing
