#include "mindisp/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace mindisp {

void RefinementConfig::check() const {
  if (!(delta > 0.0)) throw std::invalid_argument("refinement delta must be positive");
  if (ring_samples < 4) throw std::invalid_argument("ring_samples must be at least 4");
  if (max_increments < 0) throw std::invalid_argument("max_increments must be non-negative");
  if (sweep_substeps < 1) throw std::invalid_argument("sweep_substeps must be at least 1");
}

int RefinementConfig::resolved_max_increments(double world_diameter) const {
  if (max_increments > 0) return max_increments;
  if (world_diameter > 0.0) return static_cast<int>(std::ceil(10.0 * world_diameter / delta));
  return 10000;
}

int RefinementResult::displaced_count() const {
  return static_cast<int>(std::count_if(displacements.begin(), displacements.end(),
                                        [](const auto& kv) { return kv.second.magnitude > 0.0; }));
}

RefinementExhausted::RefinementExhausted(std::string id)
    : RefinementError("refinement exhausted its increment budget for obstacle '" + id + "'"),
      obstacle_id(std::move(id)) {}

std::vector<Pose> sample_displacement(const Obstacle& original, double magnitude, Mobility mode,
                                      int samples, const Vec2& preferred_direction,
                                      int preferred_sign) {
  const Pose& o = original.pose;
  if (magnitude <= 0.0) return {o};
  std::vector<Pose> out;
  if (mode == Mobility::kRotate) {
    const double s = preferred_sign >= 0 ? 1.0 : -1.0;
    out.push_back(make_pose(o.x, o.y, o.theta + s * magnitude));
    // +pi and -pi are the same pose
    if (std::abs(magnitude - std::numbers::pi) > 1e-12) {
      out.push_back(make_pose(o.x, o.y, o.theta - s * magnitude));
    }
    return out;
  }
  const double base = std::atan2(preferred_direction.y(), preferred_direction.x());
  const double step = 2.0 * std::numbers::pi / samples;
  out.reserve(static_cast<std::size_t>(samples));
  auto at = [&](int k) {
    const double a = base + step * k;
    return Pose{o.x + magnitude * std::cos(a), o.y + magnitude * std::sin(a), o.theta};
  };
  out.push_back(at(0));
  for (int k = 1; 2 * k <= samples; ++k) {
    out.push_back(at(k));
    if (samples - k != k) out.push_back(at(samples - k));
  }
  return out;
}

SweepIndex::SweepIndex(const Trajectory& trajectory, const Robot& robot, int substeps) {
  auto add = [&](const State& pose, int k, int sub) {
    for (const auto& s : place_body(pose, robot.bounding)) {
      entries_.push_back({s.center, s.radius, k, sub});
      max_radius_ = std::max(max_radius_, s.radius);
    }
  };
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    for (int s = 0; s < substeps; ++s) {
      add(interpolate(trajectory[k], trajectory[k + 1], static_cast<double>(s) / substeps),
          static_cast<int>(k), s);
    }
  }
  if (!trajectory.empty()) add(trajectory.back(), static_cast<int>(trajectory.size()) - 1, 0);
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const Entry& a, const Entry& b) { return a.center.x() < b.center.x(); });
}

std::optional<Violation> SweepIndex::deepest_contact(const PlacedObstacle& obstacle,
                                                     double tol) const {
  const double lo = obstacle.center.x() - obstacle.reach - max_radius_;
  const double hi = obstacle.center.x() + obstacle.reach + max_radius_;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), lo,
                             [](const Entry& e, double v) { return e.center.x() < v; });
  std::optional<Violation> worst;
  for (; it != entries_.end() && it->center.x() <= hi; ++it) {
    const double reach = obstacle.reach + it->radius;
    if ((it->center - obstacle.center).squaredNorm() > reach * reach) continue;
    const SphereContact c = sphere_contact(Sphere{it->center, it->radius}, obstacle);
    if (c.md < -tol && (!worst || -c.md > worst->depth)) {
      Violation v;
      v.kind = Violation::Kind::kRobotObstacle;
      v.depth = -c.md;
      v.time_index = it->time_index;
      v.substep = it->substep;
      v.direction = c.direction;
      worst = v;
    }
  }
  return worst;
}

ValidationReport validate(std::span<const Pose> poses, const Trajectory& trajectory,
                          const Robot& robot, std::span<const Obstacle> obstacles, int substeps,
                          double tol) {
  ValidationReport report;
  std::vector<PlacedObstacle> placed;
  placed.reserve(obstacles.size());
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    placed.push_back(place_obstacle(obstacles[i], poses[i]));
  }
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      const double reach = placed[i].reach + placed[j].reach;
      if ((placed[i].center - placed[j].center).squaredNorm() > reach * reach) continue;
      const double ov = obstacle_overlap(placed[i], placed[j]);
      if (ov < -tol) {
        Violation v;
        v.kind = Violation::Kind::kObstacleObstacle;
        v.a = obstacles[i].id;
        v.b = obstacles[j].id;
        v.depth = -ov;
        report.violations.push_back(v);
      }
    }
  }
  const SweepIndex sweep(trajectory, robot, substeps);
  for (std::size_t i = 0; i < placed.size(); ++i) {
    if (auto v = sweep.deepest_contact(placed[i], tol)) {
      v->a = obstacles[i].id;
      report.violations.push_back(*v);
    }
  }
  return report;
}

namespace {

struct Search {
  const Obstacle* obstacle = nullptr;
  double base = 0.0;  // y^i
  int level = 0;      // increments above base
  Vec2 direction = Vec2::UnitX();
  int sign = 1;
};

std::size_t index_of(std::span<const Obstacle> obstacles, const std::string& id) {
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (obstacles[i].id == id) return i;
  }
  throw std::invalid_argument("unknown obstacle id '" + id + "'");
}

}  // namespace

RefinementResult refine(const Trajectory& trajectory, const Robot& robot,
                        std::span<const Obstacle> obstacles, const RequiredMap& required,
                        const RefinementConfig& config, double world_diameter) {
  config.check();
  const int budget = config.resolved_max_increments(world_diameter);
  const std::size_t n = obstacles.size();

  std::vector<Pose> poses(n);
  std::vector<PlacedObstacle> placed(n);
  std::vector<bool> committed(n, true);
  std::vector<Search> search(n);
  for (std::size_t i = 0; i < n; ++i) {
    poses[i] = obstacles[i].pose;
    placed[i] = place_obstacle(obstacles[i]);
    search[i].obstacle = &obstacles[i];
  }

  std::vector<std::size_t> order;
  for (const auto& [id, req] : required) {
    const std::size_t i = index_of(obstacles, id);
    if (!obstacles[i].movable()) continue;
    search[i].base = req.magnitude;
    search[i].direction = req.direction;
    search[i].sign = req.sign;
    committed[i] = false;
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (search[a].base != search[b].base) return search[a].base > search[b].base;
    return a < b;
  });

  const SweepIndex sweep(trajectory, robot, config.sweep_substeps);
  RefinementResult result;

  auto magnitude = [&](std::size_t i) { return search[i].base + search[i].level * config.delta; };

  auto feasible = [&](std::size_t i, const PlacedObstacle& cand) {
    if (sweep.deepest_contact(cand, kContactTolerance)) return false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !committed[j]) continue;
      const double reach = cand.reach + placed[j].reach;
      if ((cand.center - placed[j].center).squaredNorm() > reach * reach) continue;
      if (obstacle_overlap(cand, placed[j]) < -kContactTolerance) return false;
    }
    return true;
  };

  auto process = [&](std::size_t i) {
    const Obstacle& o = obstacles[i];
    while (true) {
      const double m = magnitude(i);
      if (search[i].level > budget || (o.mobility == Mobility::kRotate && m > std::numbers::pi + 1e-12)) {
        throw RefinementExhausted(o.id);
      }
      const auto candidates = sample_displacement(o, m, o.mobility, config.ring_samples,
                                                  search[i].direction, search[i].sign);
      TraceEntry entry{o.id, m, static_cast<int>(candidates.size()), -1};
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        PlacedObstacle cand = place_obstacle(o, candidates[c]);
        if (feasible(i, cand)) {
          poses[i] = candidates[c];
          placed[i] = std::move(cand);
          committed[i] = true;
          entry.accepted_index = static_cast<int>(c);
          result.trace.push_back(entry);
          return;
        }
      }
      result.trace.push_back(entry);
      ++search[i].level;
    }
  };

  for (std::size_t i : order) process(i);

  // Joint check at full resolution; anything still violating re-enters the search.
  for (std::size_t round = 0;; ++round) {
    const ValidationReport report =
        validate(poses, trajectory, robot, obstacles, config.sweep_substeps);
    if (report.ok()) break;
    if (round > 4 * n + 4) {
      throw RefinementError("refinement did not settle: " + report.violations.front().a);
    }
    std::set<std::size_t> reenter;
    for (const auto& v : report.violations) {
      const std::size_t a = index_of(obstacles, v.a);
      if (v.kind == Violation::Kind::kRobotObstacle) {
        if (!obstacles[a].movable()) {
          throw RefinementError("trajectory intersects fixed obstacle '" + v.a + "'");
        }
        if (!reenter.contains(a) && magnitude(a) == 0.0) {
          search[a].direction = v.direction;
          if (obstacles[a].mobility == Mobility::kTranslate) {
            // a translation shorter than the overlap depth cannot clear it
            search[a].level = std::max(search[a].level,
                                       static_cast<int>(std::ceil(v.depth / config.delta - 1e-9)));
          }
        }
        reenter.insert(a);
        continue;
      }
      const std::size_t b = index_of(obstacles, v.b);
      if (!obstacles[a].movable() && !obstacles[b].movable()) {
        throw RefinementError("fixed obstacles '" + v.a + "' and '" + v.b + "' overlap");
      }
      std::size_t pick = b;
      if (!obstacles[b].movable()) {
        pick = a;
      } else if (obstacles[a].movable() && magnitude(a) < magnitude(b)) {
        pick = a;
      }
      if (!reenter.contains(pick) && magnitude(pick) == 0.0) {
        const std::size_t other = pick == a ? b : a;
        search[pick].direction = unit_direction(placed[other].center, placed[pick].center);
      }
      reenter.insert(pick);
    }
    std::vector<std::size_t> again(reenter.begin(), reenter.end());
    for (std::size_t i : again) committed[i] = false;
    std::stable_sort(again.begin(), again.end(), [&](std::size_t a, std::size_t b) {
      return magnitude(a) > magnitude(b);
    });
    for (std::size_t i : again) process(i);
  }

  bool translated = false;
  bool rotated = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Obstacle& o = obstacles[i];
    if (!o.movable()) continue;
    DisplacementSpec spec;
    spec.obstacle_id = o.id;
    spec.mode = o.mobility;
    spec.original_pose = o.pose;
    spec.realized_pose = poses[i];
    spec.magnitude = poses[i] == o.pose ? 0.0 : magnitude(i);
    spec.increments = spec.magnitude > 0.0 ? search[i].level : 0;
    if (spec.magnitude > 0.0) {
      (o.mobility == Mobility::kRotate ? rotated : translated) = true;
    }
    result.total_displacement += spec.magnitude;
    result.displacements.emplace(o.id, spec);
  }
  result.mixed_units = translated && rotated;
  return result;
}

double total_cost(double planning_cost, const RequiredMap& required,
                  const std::map<std::string, DisplacementSpec>& displacements) {
  double total = planning_cost;
  for (const auto& [id, d] : displacements) {
    const auto it = required.find(id);
    const double y = it == required.end() ? 0.0 : it->second.magnitude;
    if (d.magnitude < y - 1e-12) {
      throw std::logic_error("displacement of '" + id + "' is below its required magnitude");
    }
    total += d.magnitude - y;
  }
  return total;
}

FeasibilityReport check_feasibility(const FeasibilityQuery& q) {
  FeasibilityReport report;
  const Trajectory& traj = *q.trajectory;
  auto fmt = [](auto&&... parts) {
    std::ostringstream os;
    os.precision(9);
    (os << ... << parts);
    return os.str();
  };

  if (traj.empty()) {
    report.endpoint_issues.push_back("trajectory is empty");
    return report;
  }
  if (pose_error(traj.front(), q.start).norm() > q.residual_tol) {
    report.endpoint_issues.push_back("trajectory does not begin at the start pose");
  }
  if (!at_goal(traj.back(), q.goal, q.goal_tolerance)) {
    report.endpoint_issues.push_back(
        fmt("final state is ", pose_error(traj.back(), q.goal).head<2>().norm(),
            " m from the goal, outside tolerance"));
  }
  const double residual = dynamics_residual(q.robot->dynamics, traj, q.controls);
  if (!(residual <= q.residual_tol)) {
    report.endpoint_issues.push_back(
        fmt("dynamics residual ", residual, " exceeds ", q.residual_tol,
            " (", traj.size(), " states, ", q.controls.size(), " controls)"));
  }
  for (std::size_t k = 0; k < q.controls.size(); ++k) {
    if (!q.robot->dynamics.bounds.contains(q.controls[k])) {
      report.endpoint_issues.push_back(fmt("control ", k, " outside bounds"));
    }
  }

  std::vector<PlacedObstacle> placed;
  for (std::size_t i = 0; i < q.obstacles.size(); ++i) {
    placed.push_back(place_obstacle(q.obstacles[i], q.poses[i]));
  }
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      const double ov = obstacle_overlap(placed[i], placed[j]);
      if (ov < -q.tol) {
        report.obstacle_issues.push_back(fmt("obstacles '", q.obstacles[i].id, "' and '",
                                             q.obstacles[j].id, "' overlap by ", -ov, " m"));
      }
    }
  }

  std::vector<double> worst(placed.size(), 0.0);
  std::vector<int> worst_k(placed.size(), -1);
  auto sweep = [&](const State& pose, int k) {
    for (const auto& rs : place_body(pose, q.robot->bounding)) {
      for (std::size_t i = 0; i < placed.size(); ++i) {
        double md;
        if (placed[i].collision == CollisionKind::kBox) {
          md = point_rect_overlap(rs.center, placed[i].rect) - rs.radius;
        } else {
          md = std::numeric_limits<double>::infinity();
          for (const auto& os : placed[i].spheres) md = std::min(md, sphere_overlap(rs, os));
        }
        if (md < -q.tol && -md > worst[i]) {
          worst[i] = -md;
          worst_k[i] = k;
        }
      }
    }
  };
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    for (int s = 0; s < q.substeps; ++s) {
      sweep(interpolate(traj[k], traj[k + 1], static_cast<double>(s) / q.substeps),
            static_cast<int>(k));
    }
  }
  sweep(traj.back(), static_cast<int>(traj.size()) - 1);
  for (std::size_t i = 0; i < placed.size(); ++i) {
    if (worst_k[i] >= 0) {
      report.robot_issues.push_back(fmt("robot intersects '", q.obstacles[i].id, "' by ",
                                        worst[i], " m near step ", worst_k[i]));
    }
  }
  return report;
}

}  // namespace mindisp
