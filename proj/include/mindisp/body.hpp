#pragma once

#include <string>
#include <vector>

#include "mindisp/dynamics.hpp"
#include "mindisp/geometry.hpp"

namespace mindisp {

// Display geometry of a body, in its own frame.
struct ShapePart {
  enum class Kind { kCircle, kBox };
  Kind kind = Kind::kCircle;
  Vec2 offset = Vec2::Zero();
  double radius = 0.0;                   // circle
  Vec2 half_extents = Vec2::Zero();      // box
  double theta = 0.0;                    // box

  static ShapePart circle(const Vec2& offset, double radius);
  static ShapePart box(const Vec2& offset, const Vec2& half_extents, double theta = 0.0);

  /// Box in the world frame for a body at `pose`.
  Rect world_rect(const Pose& pose) const;
  /// Boundary points used for the enclosure check (box corners, sampled circle rim).
  std::vector<Vec2> outline(const Pose& pose, int circle_samples = 32) const;
  bool operator==(const ShapePart&) const = default;
};

enum class Mobility { kTranslate, kRotate, kFixed };
std::string to_string(Mobility m);
Mobility mobility_from_string(const std::string& s);

/// How an obstacle is measured against other bodies: its bounding spheres, or its
/// single box shape exactly.
enum class CollisionKind { kSpheres, kBox };
std::string to_string(CollisionKind c);
CollisionKind collision_kind_from_string(const std::string& s);

struct Robot {
  DynamicsModel dynamics;
  BoundingModel bounding;
  std::vector<ShapePart> shape;

  bool operator==(const Robot&) const = default;
};

struct Obstacle {
  std::string id;
  std::vector<ShapePart> shape;
  BoundingModel bounding;
  Pose pose;
  Mobility mobility = Mobility::kTranslate;
  CollisionKind collision = CollisionKind::kSpheres;
  double weight = 1.0;             // overlap penalty M_i
  double displacement_cost = 1.0;  // c^i per unit displacement

  bool movable() const { return mobility != Mobility::kFixed; }
  bool operator==(const Obstacle&) const = default;
};

/// True iff every outline point of `shape` lies inside some sphere of `bounding`.
bool encloses(const BoundingModel& bounding, const std::vector<ShapePart>& shape,
              double tol = 1e-9);

/// Obstacle geometry resolved at a pose.
struct PlacedObstacle {
  CollisionKind collision = CollisionKind::kSpheres;
  std::vector<Sphere> spheres;
  Rect rect;
  Vec2 center = Vec2::Zero();
  double reach = 0.0;  // every part lies within this distance of center
};

PlacedObstacle place_obstacle(const Obstacle& o, const Pose& pose);
inline PlacedObstacle place_obstacle(const Obstacle& o) { return place_obstacle(o, o.pose); }

/// Signed overlap of a robot sphere against an obstacle, minimised over the obstacle's
/// parts.
struct SphereContact {
  double md = 0.0;
  Vec2 gradient = Vec2::Zero();   // d md / d sphere centre
  Vec2 direction = Vec2::UnitX(); // robot sphere -> obstacle, unit
  int part = 0;
};

SphereContact sphere_contact(const Sphere& s, const PlacedObstacle& o);

/// Signed separation between two placed obstacles (negative: overlapping).
double obstacle_overlap(const PlacedObstacle& a, const PlacedObstacle& b);

}  // namespace mindisp
