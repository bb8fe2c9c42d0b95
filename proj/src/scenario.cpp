#include "mindisp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mindisp {

using nlohmann::json;

SchemaError::SchemaError(const std::string& p, const std::string& what)
    : std::runtime_error(p + ": " + what), path(p) {}

bool WorldBounds::contains(const Vec2& p) const {
  return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
}

namespace {

// ---------------------------------------------------------------------------
// Reading helpers. Every accessor carries the JSON path for error messages.

void expect_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed,
                 std::initializer_list<const char*> required = {}) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.contains(key)) throw SchemaError(path + "." + key, "unknown key");
  }
  for (const char* key : required) {
    if (!j.contains(key)) throw SchemaError(path + "." + key, "missing required key");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

double number(const json& j, const char* key, const std::string& path, double fallback) {
  return j.contains(key) ? number(j.at(key), path + "." + key) : fallback;
}

int integer(const json& j, const char* key, const std::string& path, int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw SchemaError(path + "." + key, "expected an integer");
  return v.get<int>();
}

std::string text(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw SchemaError(path + "." + key, "expected a string");
  }
  return j.at(key).get<std::string>();
}

Vec2 vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected [x, y]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json to_json(const Pose& p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

Pose pose_from(const json& j, const std::string& path) {
  expect_keys(j, path, {"x", "y", "theta"}, {"x", "y", "theta"});
  Pose p{number(j.at("x"), path + ".x"), number(j.at("y"), path + ".y"),
         number(j.at("theta"), path + ".theta")};
  if (p.theta < -M_PI || p.theta >= M_PI) {
    throw SchemaError(path + ".theta", "angle must lie in [-pi, pi)");
  }
  return p;
}

json to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

Eigen::Matrix3d matrix_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(path, "expected a 3x3 row array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != 3) throw SchemaError(rp, "expected 3 numbers");
    for (int c = 0; c < 3; ++c) m(r, c) = number(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

json to_json(const BoundingModel& b) {
  json arr = json::array();
  for (const auto& s : b.spheres) arr.push_back({{"offset", to_json(s.offset)}, {"radius", s.radius}});
  return arr;
}

BoundingModel bounding_from(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of spheres");
  BoundingModel b;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    expect_keys(j[i], p, {"offset", "radius"}, {"offset", "radius"});
    BodySphere s{vec2(j[i].at("offset"), p + ".offset"), number(j[i].at("radius"), p + ".radius")};
    if (!(s.radius > 0.0)) throw SchemaError(p + ".radius", "sphere radius must be positive");
    b.spheres.push_back(s);
  }
  return b;
}

json to_json(const std::vector<ShapePart>& shape) {
  json arr = json::array();
  for (const auto& part : shape) {
    if (part.kind == ShapePart::Kind::kCircle) {
      arr.push_back({{"type", "circle"}, {"offset", to_json(part.offset)}, {"radius", part.radius}});
    } else {
      arr.push_back({{"type", "box"},
                     {"offset", to_json(part.offset)},
                     {"half_extents", to_json(part.half_extents)},
                     {"theta", part.theta}});
    }
  }
  return arr;
}

std::vector<ShapePart> shape_from(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of shape parts");
  std::vector<ShapePart> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const std::string type = text(j[i], "type", p);
    if (type == "circle") {
      expect_keys(j[i], p, {"type", "offset", "radius"}, {"offset", "radius"});
      const double r = number(j[i].at("radius"), p + ".radius");
      if (!(r > 0.0)) throw SchemaError(p + ".radius", "circle radius must be positive");
      out.push_back(ShapePart::circle(vec2(j[i].at("offset"), p + ".offset"), r));
    } else if (type == "box") {
      expect_keys(j[i], p, {"type", "offset", "half_extents", "theta"}, {"offset", "half_extents"});
      const Vec2 h = vec2(j[i].at("half_extents"), p + ".half_extents");
      if (!(h.x() > 0.0 && h.y() > 0.0)) {
        throw SchemaError(p + ".half_extents", "half extents must be positive");
      }
      out.push_back(ShapePart::box(vec2(j[i].at("offset"), p + ".offset"), h,
                                   number(j[i], "theta", p, 0.0)));
    } else {
      throw SchemaError(p + ".type", "unknown shape type '" + type + "'");
    }
  }
  return out;
}

json to_json(const DynamicsModel& m) {
  json bounds = json::array();
  for (const auto& [lo, hi] : m.bounds.limits) bounds.push_back(json::array({lo, hi}));
  return {{"kind", to_string(m.kind)}, {"dt", m.dt}, {"bounds", bounds}};
}

DynamicsModel dynamics_from(const json& j, const std::string& path) {
  expect_keys(j, path, {"kind", "dt", "bounds"}, {"kind"});
  DynamicsModel m;
  try {
    m.kind = model_kind_from_string(text(j, "kind", path));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ".kind", e.what());
  }
  m.dt = number(j, "dt", path, m.dt);
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    const std::string bp = path + ".bounds";
    if (!b.is_array() || b.size() != 3) throw SchemaError(bp, "expected 3 [min, max] pairs");
    m.bounds.limits.clear();
    for (std::size_t i = 0; i < 3; ++i) {
      const Vec2 pair = vec2(b[i], bp + "[" + std::to_string(i) + "]");
      if (pair.x() > pair.y()) throw SchemaError(bp + "[" + std::to_string(i) + "]", "min exceeds max");
      m.bounds.limits.emplace_back(pair.x(), pair.y());
    }
  }
  if (m.kind == ModelKind::kPlanarHolonomic && !(m.dt > 0.0)) {
    throw SchemaError(path + ".dt", "dt must be positive");
  }
  return m;
}

json to_json(const Obstacle& o) {
  return {{"id", o.id},
          {"shape", to_json(o.shape)},
          {"bounding", to_json(o.bounding)},
          {"pose", to_json(o.pose)},
          {"mobility", to_string(o.mobility)},
          {"collision", to_string(o.collision)},
          {"weight", o.weight},
          {"displacement_cost", o.displacement_cost}};
}

Obstacle obstacle_from(const json& j, const std::string& path) {
  expect_keys(j, path,
              {"id", "shape", "bounding", "pose", "mobility", "collision", "weight",
               "displacement_cost"},
              {"id", "shape", "pose", "mobility"});
  Obstacle o;
  o.id = text(j, "id", path);
  o.shape = shape_from(j.at("shape"), path + ".shape");
  if (j.contains("bounding")) o.bounding = bounding_from(j.at("bounding"), path + ".bounding");
  o.pose = pose_from(j.at("pose"), path + ".pose");
  try {
    o.mobility = mobility_from_string(text(j, "mobility", path));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ".mobility", e.what());
  }
  if (j.contains("collision")) {
    try {
      o.collision = collision_kind_from_string(text(j, "collision", path));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path + ".collision", e.what());
    }
  }
  o.weight = number(j, "weight", path, o.weight);
  o.displacement_cost = number(j, "displacement_cost", path, o.movable() ? 1.0 : 0.0);
  return o;
}

json to_json(const Weights& w) {
  return {{"M_x", to_json(w.M_x)}, {"M_g", to_json(w.M_g)}, {"w_x", w.w_x}, {"w_d", w.w_d}};
}

Weights weights_from(const json& j, const std::string& path) {
  expect_keys(j, path, {"M_x", "M_g", "w_x", "w_d"});
  Weights w;
  if (j.contains("M_x")) w.M_x = matrix_from(j.at("M_x"), path + ".M_x");
  if (j.contains("M_g")) w.M_g = matrix_from(j.at("M_g"), path + ".M_g");
  w.w_x = number(j, "w_x", path, w.w_x);
  w.w_d = number(j, "w_d", path, w.w_d);
  return w;
}

json to_json(const PlannerConfig& c) {
  return {{"lookahead", c.lookahead},
          {"max_steps", c.max_steps},
          {"goal_tolerance", {{"position", c.goal_tolerance.position}, {"angle", c.goal_tolerance.angle}}},
          {"smoothing_eps", c.smoothing_eps},
          {"stage_mode", to_string(c.stage_mode)},
          {"fixed_margin", c.fixed_margin},
          {"time_substeps", c.time_substeps},
          {"solver",
           {{"max_iterations", c.solver.max_iterations},
            {"gradient_tolerance", c.solver.gradient_tolerance},
            {"armijo", c.solver.armijo},
            {"backtrack", c.solver.backtrack},
            {"max_backtracks", c.solver.max_backtracks},
            {"initial_step", c.solver.initial_step}}}};
}

PlannerConfig planner_from(const json& j, const std::string& path) {
  expect_keys(j, path,
              {"lookahead", "max_steps", "goal_tolerance", "smoothing_eps", "stage_mode",
               "fixed_margin", "time_substeps", "solver"});
  PlannerConfig c;
  c.lookahead = integer(j, "lookahead", path, c.lookahead);
  c.max_steps = integer(j, "max_steps", path, c.max_steps);
  if (j.contains("goal_tolerance")) {
    const auto& g = j.at("goal_tolerance");
    const std::string gp = path + ".goal_tolerance";
    expect_keys(g, gp, {"position", "angle"});
    c.goal_tolerance.position = number(g, "position", gp, c.goal_tolerance.position);
    c.goal_tolerance.angle = number(g, "angle", gp, c.goal_tolerance.angle);
  }
  c.smoothing_eps = number(j, "smoothing_eps", path, c.smoothing_eps);
  if (j.contains("stage_mode")) {
    try {
      c.stage_mode = stage_mode_from_string(text(j, "stage_mode", path));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path + ".stage_mode", e.what());
    }
  }
  c.fixed_margin = number(j, "fixed_margin", path, c.fixed_margin);
  c.time_substeps = integer(j, "time_substeps", path, c.time_substeps);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    const std::string sp = path + ".solver";
    expect_keys(s, sp,
                {"max_iterations", "gradient_tolerance", "armijo", "backtrack", "max_backtracks",
                 "initial_step"});
    c.solver.max_iterations = integer(s, "max_iterations", sp, c.solver.max_iterations);
    c.solver.gradient_tolerance = number(s, "gradient_tolerance", sp, c.solver.gradient_tolerance);
    c.solver.armijo = number(s, "armijo", sp, c.solver.armijo);
    c.solver.backtrack = number(s, "backtrack", sp, c.solver.backtrack);
    c.solver.max_backtracks = integer(s, "max_backtracks", sp, c.solver.max_backtracks);
    c.solver.initial_step = number(s, "initial_step", sp, c.solver.initial_step);
  }
  try {
    c.check();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  return c;
}

json to_json(const RefinementConfig& c) {
  return {{"delta", c.delta},
          {"ring_samples", c.ring_samples},
          {"max_increments", c.max_increments},
          {"sweep_substeps", c.sweep_substeps}};
}

RefinementConfig refinement_from(const json& j, const std::string& path) {
  expect_keys(j, path, {"delta", "ring_samples", "max_increments", "sweep_substeps"});
  RefinementConfig c;
  c.delta = number(j, "delta", path, c.delta);
  c.ring_samples = integer(j, "ring_samples", path, c.ring_samples);
  c.max_increments = integer(j, "max_increments", path, c.max_increments);
  c.sweep_substeps = integer(j, "sweep_substeps", path, c.sweep_substeps);
  try {
    c.check();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  return c;
}

}  // namespace

void Scenario::check() const {
  try {
    robot.dynamics.check();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("robot.dynamics", e.what());
  }
  try {
    robot.bounding.check();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("robot.bounding", e.what());
  }
  if (!encloses(robot.bounding, robot.shape)) {
    throw SchemaError("robot.bounding", "bounding model does not enclose the robot shape");
  }
  if (!(world_bounds.min.x() < world_bounds.max.x() && world_bounds.min.y() < world_bounds.max.y())) {
    throw SchemaError("world_bounds", "min must be below max");
  }
  if (!world_bounds.contains(start.position())) throw SchemaError("start", "outside world bounds");
  if (!world_bounds.contains(goal.position())) throw SchemaError("goal", "outside world bounds");
  try {
    weights.check();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("weights", e.what());
  }
  try {
    planner.check();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("planner", e.what());
  }
  try {
    refinement.check();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("refinement", e.what());
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Obstacle& o = obstacles[i];
    const std::string p = "obstacles[" + std::to_string(i) + "]";
    if (o.id.empty()) throw SchemaError(p + ".id", "empty id");
    if (!ids.insert(o.id).second) throw SchemaError(p + ".id", "duplicate id '" + o.id + "'");
    if (o.shape.empty()) throw SchemaError(p + ".shape", "empty shape");
    if (o.collision == CollisionKind::kBox) {
      if (o.shape.size() != 1 || o.shape.front().kind != ShapePart::Kind::kBox) {
        throw SchemaError(p + ".collision", "box collision needs exactly one box shape part");
      }
    } else {
      try {
        o.bounding.check();
      } catch (const std::invalid_argument& e) {
        throw SchemaError(p + ".bounding", e.what());
      }
    }
    if (!o.bounding.spheres.empty() && !encloses(o.bounding, o.shape)) {
      throw SchemaError(p + ".bounding", "bounding model does not enclose the shape");
    }
    if (!(o.weight >= 0.0)) throw SchemaError(p + ".weight", "weight must be non-negative");
    if (!o.movable() && o.displacement_cost != 0.0) {
      throw SchemaError(p + ".displacement_cost", "fixed obstacles carry no displacement cost");
    }
    if (o.movable() && !(o.displacement_cost > 0.0)) {
      throw SchemaError(p + ".displacement_cost", "displacement cost must be positive");
    }
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (obstacles[i].movable()) continue;
    const auto placed = place_obstacle(obstacles[i]);
    for (const auto& s : place_body(start, robot.bounding)) {
      if (sphere_contact(s, placed).md < -kContactTolerance) {
        throw SchemaError("start", "start pose intersects fixed obstacle '" + obstacles[i].id + "'");
      }
    }
  }
}

json save_scenario(const Scenario& s) {
  json obstacles = json::array();
  for (const auto& o : s.obstacles) obstacles.push_back(to_json(o));
  return {{"name", s.name},
          {"robot",
           {{"dynamics", to_json(s.robot.dynamics)},
            {"bounding", to_json(s.robot.bounding)},
            {"shape", to_json(s.robot.shape)}}},
          {"start", to_json(s.start)},
          {"goal", to_json(s.goal)},
          {"obstacles", obstacles},
          {"weights", to_json(s.weights)},
          {"planner", to_json(s.planner)},
          {"refinement", to_json(s.refinement)},
          {"world_bounds", {{"min", to_json(s.world_bounds.min)}, {"max", to_json(s.world_bounds.max)}}}};
}

Scenario load_scenario(const json& doc) {
  const std::string root = "$";
  expect_keys(doc, root,
              {"name", "robot", "start", "goal", "obstacles", "weights", "planner", "refinement",
               "world_bounds"},
              {"name", "robot", "start", "goal", "obstacles", "weights", "planner", "refinement",
               "world_bounds"});
  Scenario s;
  s.name = text(doc, "name", root);
  const auto& r = doc.at("robot");
  expect_keys(r, "$.robot", {"dynamics", "bounding", "shape"}, {"dynamics", "bounding"});
  s.robot.dynamics = dynamics_from(r.at("dynamics"), "$.robot.dynamics");
  s.robot.bounding = bounding_from(r.at("bounding"), "$.robot.bounding");
  if (r.contains("shape")) s.robot.shape = shape_from(r.at("shape"), "$.robot.shape");
  s.start = pose_from(doc.at("start"), "$.start");
  s.goal = pose_from(doc.at("goal"), "$.goal");
  const auto& obs = doc.at("obstacles");
  if (!obs.is_array()) throw SchemaError("$.obstacles", "expected an array");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    s.obstacles.push_back(obstacle_from(obs[i], "$.obstacles[" + std::to_string(i) + "]"));
  }
  s.weights = weights_from(doc.at("weights"), "$.weights");
  s.planner = planner_from(doc.at("planner"), "$.planner");
  s.refinement = refinement_from(doc.at("refinement"), "$.refinement");
  const auto& wb = doc.at("world_bounds");
  expect_keys(wb, "$.world_bounds", {"min", "max"}, {"min", "max"});
  s.world_bounds.min = vec2(wb.at("min"), "$.world_bounds.min");
  s.world_bounds.max = vec2(wb.at("max"), "$.world_bounds.max");
  try {
    s.check();
  } catch (const SchemaError& e) {
    throw SchemaError("$." + e.path, std::string(e.what()).substr(e.path.size() + 2));
  }
  return s;
}

Scenario read_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON in '") + path + "': " + e.what());
  }
  return load_scenario(doc);
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw std::ios_base::failure("failed writing '" + path + "'");
}

Scenario without_obstacles(Scenario s) {
  s.obstacles.clear();
  s.name += "_empty";
  return s;
}

double path_length(const Trajectory& trajectory) {
  double len = 0.0;
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    len += (trajectory[k].position() - trajectory[k - 1].position()).norm();
  }
  return len;
}

Summary summarize(const Scenario& scenario, const PlanResult& plan, const RefinementResult& ref) {
  Summary s;
  for (const auto& [id, req] : plan.required) s.sum_required += req.magnitude;
  s.sum_displacement = ref.total_displacement;
  s.displaced_count = ref.displaced_count();
  s.planning_cost = sum_planning_cost(plan);
  s.total_cost = total_cost(s.planning_cost, plan.required, ref.displacements);
  s.path_length = path_length(plan.trajectory);
  double weighted = 0.0;
  for (const auto& o : scenario.obstacles) {
    const auto it = ref.displacements.find(o.id);
    if (it != ref.displacements.end()) weighted += o.displacement_cost * it->second.magnitude;
  }
  s.definition_cost = scenario.weights.w_x * s.path_length + scenario.weights.w_d * weighted;
  s.mixed_units = ref.mixed_units;
  return s;
}

Solution solve(const Scenario& scenario, std::uint64_t seed) {
  scenario.check();
  Solution out;
  out.scenario = scenario;
  out.plan = plan(scenario.robot, scenario.start, scenario.goal, scenario.obstacles,
                  scenario.weights, scenario.planner, seed);
  out.refinement = refine(out.plan.trajectory, scenario.robot, scenario.obstacles,
                          out.plan.required, scenario.refinement, scenario.world_bounds.diameter());
  out.summary = summarize(scenario, out.plan, out.refinement);
  out.refinement.total_cost = out.summary.total_cost;
  return out;
}

std::vector<Pose> displaced_poses(const Solution& s) {
  std::vector<Pose> poses;
  for (const auto& o : s.scenario.obstacles) {
    const auto it = s.refinement.displacements.find(o.id);
    poses.push_back(it == s.refinement.displacements.end() ? o.pose : it->second.realized_pose);
  }
  return poses;
}

// ---------------------------------------------------------------------------
// Solution documents

json save_solution(const Solution& s) {
  json traj = json::array();
  for (std::size_t k = 0; k < s.plan.trajectory.size(); ++k) {
    const auto& x = s.plan.trajectory[k];
    traj.push_back({{"x", x.x}, {"y", x.y}, {"theta", x.theta}, {"k", k}});
  }
  json controls = json::array();
  for (const auto& u : s.plan.controls) controls.push_back(json::array({u[0], u[1], u[2]}));
  json overlaps = json::array();
  for (const auto& r : s.plan.overlaps) {
    overlaps.push_back({{"obstacle_id", r.obstacle_id},
                        {"md", r.md},
                        {"direction", to_json(r.direction)},
                        {"time_index", r.time_index},
                        {"substep", r.substep},
                        {"robot_sphere", r.robot_sphere},
                        {"obstacle_sphere", r.obstacle_sphere},
                        {"contact", to_json(r.contact)}});
  }
  json required = json::array();
  for (const auto& [id, req] : s.plan.required) {
    required.push_back({{"obstacle_id", id},
                        {"mode", to_string(req.mode)},
                        {"magnitude", req.magnitude},
                        {"direction", to_json(req.direction)},
                        {"sign", req.sign},
                        {"depth", req.depth}});
  }
  json displacements = json::array();
  for (const auto& [id, d] : s.refinement.displacements) {
    displacements.push_back({{"obstacle_id", id},
                             {"mode", to_string(d.mode)},
                             {"magnitude", d.magnitude},
                             {"increments", d.increments},
                             {"original_pose", to_json(d.original_pose)},
                             {"pose", to_json(d.realized_pose)}});
  }
  return {{"scenario", save_scenario(s.scenario)},
          {"seed", s.plan.seed},
          {"trajectory", traj},
          {"controls", controls},
          {"stage_costs", s.plan.stage_costs},
          {"horizon_values", s.plan.horizon_values},
          {"terminal_cost", s.plan.terminal_cost},
          {"unconverged_solves", s.plan.unconverged_solves},
          {"overlaps", overlaps},
          {"required", required},
          {"displacements", displacements},
          {"refinement_levels", s.refinement.trace.size()},
          {"summary",
           {{"sum_y", s.summary.sum_required},
            {"sum_d", s.summary.sum_displacement},
            {"displaced_count", s.summary.displaced_count},
            {"planning_cost", s.summary.planning_cost},
            {"total_cost", s.summary.total_cost},
            {"definition_cost", s.summary.definition_cost},
            {"path_length", s.summary.path_length},
            {"mixed_units", s.summary.mixed_units}}}};
}

Solution load_solution(const json& doc) {
  const std::string root = "$";
  expect_keys(doc, root,
              {"scenario", "seed", "trajectory", "controls", "stage_costs", "horizon_values",
               "terminal_cost", "unconverged_solves", "overlaps", "required", "displacements",
               "refinement_levels", "summary"},
              {"scenario", "trajectory", "controls", "displacements"});
  Solution s;
  s.scenario = load_scenario(doc.at("scenario"));
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
      throw SchemaError("$.seed", "expected an integer");
    }
    s.plan.seed = doc.at("seed").get<std::uint64_t>();
  }
  const auto& traj = doc.at("trajectory");
  if (!traj.is_array()) throw SchemaError("$.trajectory", "expected an array");
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const std::string p = "$.trajectory[" + std::to_string(k) + "]";
    expect_keys(traj[k], p, {"x", "y", "theta", "k"}, {"x", "y", "theta"});
    s.plan.trajectory.push_back(Pose{number(traj[k].at("x"), p + ".x"), number(traj[k].at("y"), p + ".y"),
                                     number(traj[k].at("theta"), p + ".theta")});
  }
  const auto& controls = doc.at("controls");
  if (!controls.is_array()) throw SchemaError("$.controls", "expected an array");
  for (std::size_t k = 0; k < controls.size(); ++k) {
    const std::string p = "$.controls[" + std::to_string(k) + "]";
    if (!controls[k].is_array()) throw SchemaError(p, "expected an array of numbers");
    Control u(static_cast<Eigen::Index>(controls[k].size()));
    for (std::size_t c = 0; c < controls[k].size(); ++c) {
      u[static_cast<Eigen::Index>(c)] = number(controls[k][c], p + "[" + std::to_string(c) + "]");
    }
    s.plan.controls.push_back(u);
  }
  if (doc.contains("stage_costs")) {
    for (const auto& v : doc.at("stage_costs")) s.plan.stage_costs.push_back(number(v, "$.stage_costs"));
  }
  if (doc.contains("horizon_values")) {
    for (const auto& v : doc.at("horizon_values")) {
      s.plan.horizon_values.push_back(number(v, "$.horizon_values"));
    }
  }
  s.plan.terminal_cost = number(doc, "terminal_cost", root, 0.0);
  s.plan.unconverged_solves = integer(doc, "unconverged_solves", root, 0);
  if (doc.contains("overlaps")) {
    const auto& ov = doc.at("overlaps");
    for (std::size_t i = 0; i < ov.size(); ++i) {
      const std::string p = "$.overlaps[" + std::to_string(i) + "]";
      expect_keys(ov[i], p,
                  {"obstacle_id", "md", "direction", "time_index", "substep", "robot_sphere",
                   "obstacle_sphere", "contact"},
                  {"obstacle_id", "md", "direction"});
      OverlapRecord r;
      r.obstacle_id = text(ov[i], "obstacle_id", p);
      r.md = number(ov[i].at("md"), p + ".md");
      r.direction = vec2(ov[i].at("direction"), p + ".direction");
      r.time_index = integer(ov[i], "time_index", p, 0);
      r.substep = integer(ov[i], "substep", p, 0);
      r.robot_sphere = integer(ov[i], "robot_sphere", p, 0);
      r.obstacle_sphere = integer(ov[i], "obstacle_sphere", p, 0);
      if (ov[i].contains("contact")) r.contact = vec2(ov[i].at("contact"), p + ".contact");
      s.plan.overlaps.push_back(r);
    }
  }
  if (doc.contains("required")) {
    const auto& rq = doc.at("required");
    for (std::size_t i = 0; i < rq.size(); ++i) {
      const std::string p = "$.required[" + std::to_string(i) + "]";
      expect_keys(rq[i], p, {"obstacle_id", "mode", "magnitude", "direction", "sign", "depth"},
                  {"obstacle_id", "mode", "magnitude"});
      RequiredDisplacement req;
      req.obstacle_id = text(rq[i], "obstacle_id", p);
      req.mode = mobility_from_string(text(rq[i], "mode", p));
      req.magnitude = number(rq[i].at("magnitude"), p + ".magnitude");
      if (rq[i].contains("direction")) req.direction = vec2(rq[i].at("direction"), p + ".direction");
      req.sign = integer(rq[i], "sign", p, 1);
      req.depth = number(rq[i], "depth", p, 0.0);
      s.plan.required.emplace(req.obstacle_id, req);
    }
  }
  const auto& ds = doc.at("displacements");
  if (!ds.is_array()) throw SchemaError("$.displacements", "expected an array");
  std::set<std::string> known;
  for (const auto& o : s.scenario.obstacles) known.insert(o.id);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::string p = "$.displacements[" + std::to_string(i) + "]";
    expect_keys(ds[i], p, {"obstacle_id", "mode", "magnitude", "increments", "original_pose", "pose"},
                {"obstacle_id", "mode", "magnitude", "pose"});
    DisplacementSpec d;
    d.obstacle_id = text(ds[i], "obstacle_id", p);
    if (!known.contains(d.obstacle_id)) {
      throw SchemaError(p + ".obstacle_id", "unknown obstacle '" + d.obstacle_id + "'");
    }
    try {
      d.mode = mobility_from_string(text(ds[i], "mode", p));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(p + ".mode", e.what());
    }
    d.magnitude = number(ds[i].at("magnitude"), p + ".magnitude");
    d.increments = integer(ds[i], "increments", p, 0);
    d.realized_pose = pose_from(ds[i].at("pose"), p + ".pose");
    if (ds[i].contains("original_pose")) {
      d.original_pose = pose_from(ds[i].at("original_pose"), p + ".original_pose");
    }
    s.refinement.displacements.emplace(d.obstacle_id, d);
    s.refinement.total_displacement += d.magnitude;
  }
  try {
    s.summary = summarize(s.scenario, s.plan, s.refinement);
  } catch (const std::logic_error&) {
    // Some d < y: left for the validator to report rather than refusing the document.
    s.summary.total_cost = std::numeric_limits<double>::quiet_NaN();
  }
  s.refinement.total_cost = s.summary.total_cost;
  return s;
}

}  // namespace mindisp
