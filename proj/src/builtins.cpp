#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mindisp/random.hpp"
#include "mindisp/scenario.hpp"

namespace mindisp {

namespace {

Eigen::Matrix3d diag(double a, double b, double c) { return Eigen::Vector3d(a, b, c).asDiagonal(); }

Obstacle wall(const std::string& id, const Vec2& center, const Vec2& half_extents) {
  Obstacle o;
  o.id = id;
  o.shape = {ShapePart::box(Vec2::Zero(), half_extents)};
  o.pose = Pose{center.x(), center.y(), 0.0};
  o.mobility = Mobility::kFixed;
  o.collision = CollisionKind::kBox;
  o.weight = 50.0;
  o.displacement_cost = 0.0;
  return o;
}

Obstacle disc(const std::string& id, const Vec2& center, double radius, double weight) {
  Obstacle o;
  o.id = id;
  o.shape = {ShapePart::circle(Vec2::Zero(), radius)};
  o.bounding.spheres = {BodySphere{Vec2::Zero(), radius}};
  o.pose = Pose{center.x(), center.y(), 0.0};
  o.weight = weight;
  return o;
}

Obstacle block(const std::string& id, const Pose& pose, const Vec2& half_extents, double weight,
               Mobility mobility) {
  Obstacle o;
  o.id = id;
  o.shape = {ShapePart::box(Vec2::Zero(), half_extents)};
  o.bounding = cover_box(half_extents);
  o.pose = pose;
  o.weight = weight;
  o.mobility = mobility;
  return o;
}

// Four walls whose inner faces are the given rectangle.
void add_room(std::vector<Obstacle>& obstacles, const Vec2& lo, const Vec2& hi, double thickness) {
  const double t = thickness / 2.0;
  const Vec2 mid = (lo + hi) / 2.0;
  const double hx = (hi.x() - lo.x()) / 2.0 + thickness;
  const double hy = (hi.y() - lo.y()) / 2.0;
  obstacles.push_back(wall("wall_south", {mid.x(), lo.y() - t}, {hx, t}));
  obstacles.push_back(wall("wall_north", {mid.x(), hi.y() + t}, {hx, t}));
  obstacles.push_back(wall("wall_west", {lo.x() - t, mid.y()}, {t, hy}));
  obstacles.push_back(wall("wall_east", {hi.x() + t, mid.y()}, {t, hy}));
}

Robot disc_robot(ModelKind kind, double radius, double step_limit) {
  Robot r;
  r.dynamics.kind = kind;
  if (kind == ModelKind::kDownCrossTurn) {
    r.dynamics.bounds.limits = {{-step_limit, step_limit}, {-step_limit, step_limit}, {-0.5, 0.5}};
  }
  r.bounding.spheres = {BodySphere{Vec2::Zero(), radius}};
  r.shape = {ShapePart::circle(Vec2::Zero(), radius)};
  return r;
}

PlannerConfig goal_relative_config() {
  PlannerConfig c;
  c.stage_mode = StageMode::kGoalRelative;
  return c;
}

Scenario l_corridor() {
  Scenario s;
  s.name = "l_corridor";
  s.robot.dynamics.kind = ModelKind::kPlanarHolonomic;
  s.robot.shape = {ShapePart::box({0.2, 0.0}, {0.3, 0.1}), ShapePart::box({0.0, 0.2}, {0.1, 0.3})};
  s.robot.bounding.spheres = {BodySphere{{0.0, 0.0}, 0.21}, BodySphere{{0.35, 0.0}, 0.21},
                              BodySphere{{0.0, 0.35}, 0.21}};
  s.start = Pose{0.0, 0.0, 0.0};
  s.goal = Pose{8.0, 0.0, 0.0};
  s.world_bounds = WorldBounds{{-1.0, -1.6}, {9.0, 1.6}};
  add_room(s.obstacles, {-0.8, -1.2}, {8.8, 1.2}, 0.2);

  // Three gates. Every gap is narrower than the robot, so some overlap is unavoidable.
  const struct { double x, y, r; } clutter[] = {
      {2.0, 0.0, 0.35}, {2.0, 0.85, 0.25},  {2.0, -0.85, 0.25}, {4.0, 0.4, 0.35}, {4.0, -0.5, 0.3},
      {4.1, 1.0, 0.15}, {6.0, 0.1, 0.35},   {6.0, -0.85, 0.3},  {6.0, 0.95, 0.2}};
  int n = 0;
  for (const auto& c : clutter) {
    s.obstacles.push_back(disc("c" + std::to_string(n++), {c.x, c.y}, c.r, 1.0));
  }
  s.weights.M_x = diag(0.05, 0.05, 0.01);
  s.weights.M_g = diag(5.0, 5.0, 1.25);
  s.planner = goal_relative_config();
  return s;
}

Scenario ias(std::uint64_t seed) {
  Scenario s;
  s.name = "ias";
  s.robot = disc_robot(ModelKind::kDownCrossTurn, 0.25, 0.2);
  s.start = Pose{0.0, 0.0, 0.0};
  s.goal = Pose{11.0, 0.0, 0.0};
  s.world_bounds = WorldBounds{{-1.0, -2.0}, {12.0, 2.0}};
  const Vec2 lo(-0.8, -1.6), hi(11.8, 1.6);
  add_room(s.obstacles, lo, hi, 0.2);

  // Rejection-sampled clutter between x = 1 and x = 10.
  std::mt19937_64 rng(seed);
  std::vector<Obstacle> clutter;
  int attempts = 0;
  while (clutter.size() < 35) {
    if (++attempts > 200000) throw std::runtime_error("ias layout: cannot place 35 obstacles");
    const double r = uniform(rng, 0.18, 0.34);
    const Vec2 c(uniform(rng, 1.0 + r, 10.0 - r), uniform(rng, lo.y() + r + 0.02, hi.y() - r - 0.02));
    bool clear = true;
    for (const auto& o : clutter) {
      const double gap = (o.pose.position() - c).norm() - o.bounding.spheres[0].radius - r;
      if (gap < 0.04) {
        clear = false;
        break;
      }
    }
    if (clear) clutter.push_back(disc("o" + std::to_string(clutter.size()), c, r, 1.0));
  }
  s.obstacles.insert(s.obstacles.end(), clutter.begin(), clutter.end());
  s.weights.M_x = diag(0.05, 0.05, 0.01);
  s.weights.M_g = diag(2.0, 2.0, 0.5);
  s.planner = goal_relative_config();
  s.planner.max_steps = 600;
  return s;
}

Scenario rotation_blocks() {
  Scenario s;
  s.name = "rotation_blocks";
  s.robot = disc_robot(ModelKind::kDownCrossTurn, 0.05, 0.1);
  s.start = Pose{-2.0, 0.0, 0.0};
  s.goal = Pose{2.0, 0.0, 0.0};
  s.world_bounds = WorldBounds{{-2.5, -1.5}, {2.5, 1.5}};

  // Two blocks stacked across the band, pivoting about their centres. Their inner ends
  // reach past each other, so no lane is open.
  const Vec2 half(0.08, 0.5);
  Obstacle upper = block("upper", Pose{0.0, 0.4, 0.0}, half, 5.0, Mobility::kRotate);
  Obstacle lower = block("lower", Pose{0.3, -0.4, 0.0}, half, 5.0, Mobility::kRotate);

  // The band edges sit just outside the sphere cover of the blocks.
  double reach = 0.0;
  for (const auto& sp : upper.bounding.spheres) reach = std::max(reach, sp.offset.y() + sp.radius);
  const double band = 0.4 + reach + 0.02;
  const double hx = 2.7;
  s.obstacles.push_back(wall("band_north", {0.0, band + 0.1}, {hx, 0.1}));
  s.obstacles.push_back(wall("band_south", {0.0, -band - 0.1}, {hx, 0.1}));
  s.obstacles.push_back(upper);
  s.obstacles.push_back(lower);
  s.weights.M_x = diag(0.05, 0.05, 0.01);
  s.weights.M_g = diag(2.0, 2.0, 0.5);
  s.planner = goal_relative_config();
  return s;
}

Scenario sofa() {
  Scenario s;
  s.name = "sofa";
  s.robot = disc_robot(ModelKind::kDownCrossTurn, 0.2, 0.15);
  s.start = Pose{0.5, 0.6, 0.0};
  s.goal = Pose{5.5, 3.2, 0.0};
  s.world_bounds = WorldBounds{{-0.5, -0.5}, {6.5, 4.5}};
  add_room(s.obstacles, {0.0, 0.0}, {6.0, 4.0}, 0.2);

  const struct { double x, y, theta, hx, hy; } furniture[] = {
      {1.6, 1.3, 0.1, 0.9, 0.35},   {2.3, 3.0, -0.05, 0.35, 0.8}, {3.4, 1.7, 1.45, 0.9, 0.35},
      {4.6, 2.6, 0.2, 0.8, 0.3},    {4.7, 0.9, -0.3, 0.5, 0.3}};
  int n = 0;
  for (const auto& f : furniture) {
    s.obstacles.push_back(block("sofa" + std::to_string(n++), Pose{f.x, f.y, f.theta},
                                {f.hx, f.hy}, 1.0, Mobility::kTranslate));
  }
  s.weights.M_x = diag(0.05, 0.05, 0.01);
  s.weights.M_g = diag(2.0, 2.0, 0.5);
  s.planner = goal_relative_config();
  return s;
}

// Area of a union of discs by midpoint-rule integration over their bounding box.
double union_area(const std::vector<BodySphere>& spheres, int cells) {
  Vec2 lo = Vec2::Constant(1e300), hi = Vec2::Constant(-1e300);
  for (const auto& s : spheres) {
    lo = lo.cwiseMin(s.offset - Vec2::Constant(s.radius));
    hi = hi.cwiseMax(s.offset + Vec2::Constant(s.radius));
  }
  const Vec2 step = (hi - lo) / cells;
  int inside = 0;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const Vec2 p = lo + Vec2((i + 0.5) * step.x(), (j + 0.5) * step.y());
      for (const auto& s : spheres) {
        if ((p - s.offset).squaredNorm() <= s.radius * s.radius) {
          ++inside;
          break;
        }
      }
    }
  }
  return inside * step.x() * step.y();
}

}  // namespace

BoundingModel cover_box(const Vec2& half_extents, int max_spheres) {
  if (!(half_extents.x() > 0.0 && half_extents.y() > 0.0) || max_spheres < 1) {
    throw std::invalid_argument("cover_box: half extents and sphere count must be positive");
  }
  const bool along_x = half_extents.x() >= half_extents.y();
  const double a = along_x ? half_extents.x() : half_extents.y();
  const double b = along_x ? half_extents.y() : half_extents.x();
  const double box_area = 4.0 * a * b;

  BoundingModel best;
  double best_excess = 1e300;
  for (int k = 1; k <= max_spheres; ++k) {
    const double seg = a / k;
    const double r = std::hypot(seg, b) * (1.0 + 1e-12);
    std::vector<BodySphere> spheres;
    for (int i = 0; i < k; ++i) {
      const double c = -a + (2 * i + 1) * seg;
      spheres.push_back(BodySphere{along_x ? Vec2(c, 0.0) : Vec2(0.0, c), r});
    }
    const double excess = union_area(spheres, 200) / box_area - 1.0;
    if (excess < best_excess - 1e-9) {
      best_excess = excess;
      best.spheres = spheres;
    }
    if (excess <= 0.15) break;
  }
  return best;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"ias", "l_corridor", "rotation_blocks", "sofa"};
  return names;
}

Scenario builtin(const std::string& name, std::uint64_t seed) {
  Scenario s;
  if (name == "ias") {
    s = ias(seed);
  } else if (name == "l_corridor") {
    s = l_corridor();
  } else if (name == "rotation_blocks") {
    s = rotation_blocks();
  } else if (name == "sofa") {
    s = sofa();
  } else {
    throw std::invalid_argument("unknown builtin '" + name + "'");
  }
  s.check();
  return s;
}

}  // namespace mindisp
