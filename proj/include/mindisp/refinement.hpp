#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mindisp/body.hpp"
#include "mindisp/dynamics.hpp"
#include "mindisp/planner.hpp"

namespace mindisp {

struct RefinementConfig {
  double delta = 0.01;     // meters per increment, radians for rotation
  int ring_samples = 32;
  int max_increments = 0;  // 0: 10 * world diameter / delta
  int sweep_substeps = 50; // robot poses checked per trajectory segment

  void check() const;
  int resolved_max_increments(double world_diameter) const;
  bool operator==(const RefinementConfig&) const = default;
};

struct DisplacementSpec {
  std::string obstacle_id;
  Mobility mode = Mobility::kTranslate;
  double magnitude = 0.0;
  Pose original_pose;
  Pose realized_pose;
  int increments = 0;  // (d - y) / delta
};

struct TraceEntry {
  std::string obstacle_id;
  double magnitude = 0.0;
  int candidates = 0;
  int accepted_index = -1;  // -1: every candidate at this level rejected
};

struct RefinementResult {
  std::map<std::string, DisplacementSpec> displacements;  // every movable obstacle
  double total_displacement = 0.0;
  double total_cost = 0.0;
  bool mixed_units = false;  // both meters and radians summed into total_displacement
  std::vector<TraceEntry> trace;

  int displaced_count() const;
};

class RefinementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RefinementExhausted : public RefinementError {
 public:
  explicit RefinementExhausted(std::string id);
  std::string obstacle_id;
};

/// Candidate poses at exactly `magnitude` from the obstacle's original pose.
/// Translation: `samples` points on the circle, first along `preferred_direction`, then
/// by increasing angular deviation. Rotation: +magnitude and -magnitude about the centre,
/// `preferred_sign` first.
std::vector<Pose> sample_displacement(const Obstacle& original, double magnitude, Mobility mode,
                                      int samples, const Vec2& preferred_direction,
                                      int preferred_sign = 1);

struct Violation {
  enum class Kind { kRobotObstacle, kObstacleObstacle };
  Kind kind = Kind::kRobotObstacle;
  std::string a;  // obstacle id (robot-obstacle) or first obstacle
  std::string b;  // second obstacle (obstacle-obstacle only)
  double depth = 0.0;
  int time_index = -1;
  int substep = -1;
  Vec2 direction = Vec2::UnitX();  // robot -> obstacle at the deepest sample
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Robot bounding spheres at every sampled pose of a trajectory, indexed by x for
/// obstacle queries.
class SweepIndex {
 public:
  SweepIndex(const Trajectory& trajectory, const Robot& robot, int substeps);

  /// Deepest robot contact with `obstacle` below -tol, if any.
  std::optional<Violation> deepest_contact(const PlacedObstacle& obstacle, double tol) const;

 private:
  struct Entry {
    Vec2 center;
    double radius;
    int time_index;
    int substep;
  };
  std::vector<Entry> entries_;
  double max_radius_ = 0.0;
};

/// Obstacles at `poses` (aligned with `obstacles`) against each other and the sampled
/// trajectory. Reports every violating pair.
ValidationReport validate(std::span<const Pose> poses, const Trajectory& trajectory,
                          const Robot& robot, std::span<const Obstacle> obstacles, int substeps,
                          double tol = kContactTolerance);

RefinementResult refine(const Trajectory& trajectory, const Robot& robot,
                        std::span<const Obstacle> obstacles, const RequiredMap& required,
                        const RefinementConfig& config, double world_diameter = 0.0);

/// planning_cost + sum_i (d^i - y^i). Throws std::logic_error if some d^i < y^i.
double total_cost(double planning_cost, const RequiredMap& required,
                  const std::map<std::string, DisplacementSpec>& displacements);

/// Brute-force check of a finished solution, sharing no code with refine()'s search:
/// endpoints and dynamics, mutual obstacle disjointness, robot-obstacle disjointness.
struct FeasibilityReport {
  std::vector<std::string> endpoint_issues;   // start/goal/dynamics
  std::vector<std::string> obstacle_issues;   // obstacle pairs
  std::vector<std::string> robot_issues;      // robot vs obstacles
  bool ok() const {
    return endpoint_issues.empty() && obstacle_issues.empty() && robot_issues.empty();
  }
};

struct FeasibilityQuery {
  const Robot* robot = nullptr;
  State start;
  State goal;
  GoalTolerance goal_tolerance;
  const Trajectory* trajectory = nullptr;
  std::span<const Control> controls;
  std::span<const Obstacle> obstacles;
  std::span<const Pose> poses;  // displaced poses aligned with obstacles
  int substeps = 50;
  double tol = 1e-6;
  double residual_tol = 1e-9;
};

FeasibilityReport check_feasibility(const FeasibilityQuery& q);

}  // namespace mindisp
