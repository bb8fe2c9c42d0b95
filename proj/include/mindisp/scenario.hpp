#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mindisp/body.hpp"
#include "mindisp/planner.hpp"
#include "mindisp/refinement.hpp"

namespace mindisp {

struct WorldBounds {
  Vec2 min = Vec2(-10, -10);
  Vec2 max = Vec2(10, 10);

  bool contains(const Vec2& p) const;
  double diameter() const { return (max - min).norm(); }
  bool operator==(const WorldBounds&) const = default;
};

struct Scenario {
  std::string name;
  Robot robot;
  Pose start;
  Pose goal;
  std::vector<Obstacle> obstacles;
  Weights weights;
  PlannerConfig planner;
  RefinementConfig refinement;
  WorldBounds world_bounds;

  /// Throws SchemaError naming the offending field.
  void check() const;
  bool operator==(const Scenario&) const = default;
};

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what);
  std::string path;
};

nlohmann::json save_scenario(const Scenario& s);
Scenario load_scenario(const nlohmann::json& doc);

Scenario read_scenario_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& doc);

/// Names accepted by builtin().
const std::vector<std::string>& builtin_names();

inline constexpr std::uint64_t kCanonicalSeed = 7;

/// The bundled benchmark domains. `seed` only perturbs seeded layouts (ias).
Scenario builtin(const std::string& name, std::uint64_t seed = kCanonicalSeed);

/// Same scenario with every obstacle removed.
Scenario without_obstacles(Scenario s);

/// k spheres along the long axis of a box, with k chosen to minimise the union's
/// excess area over the box.
BoundingModel cover_box(const Vec2& half_extents, int max_spheres = 32);

struct Summary {
  double sum_required = 0.0;
  double sum_displacement = 0.0;
  int displaced_count = 0;
  double planning_cost = 0.0;
  double total_cost = 0.0;       // sum J_k + sum (d - y)
  double definition_cost = 0.0;  // w_x * path length + w_d * sum c^i d^i
  double path_length = 0.0;
  bool mixed_units = false;
};

struct Solution {
  Scenario scenario;
  PlanResult plan;
  RefinementResult refinement;
  Summary summary;
};

/// Plans, refines and summarises. Planner and refinement exceptions propagate.
Solution solve(const Scenario& scenario, std::uint64_t seed = 0);

Summary summarize(const Scenario& scenario, const PlanResult& plan, const RefinementResult& ref);

double path_length(const Trajectory& trajectory);

nlohmann::json save_solution(const Solution& s);
Solution load_solution(const nlohmann::json& doc);

/// Displaced pose of every obstacle, aligned with scenario.obstacles.
std::vector<Pose> displaced_poses(const Solution& s);

}  // namespace mindisp
