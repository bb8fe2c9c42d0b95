#include "mindisp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mindisp/random.hpp"

namespace mindisp {

namespace {

// Beyond this clearance the smoothed penalty is below 1e-12 per unit weight.
constexpr double kPenaltyCutoff = 1.0;

Eigen::Vector3d as_vector(const State& x) { return {x.x, x.y, x.theta}; }

double quad(const Eigen::Vector3d& e, const Eigen::Matrix3d& M, Eigen::Vector3d* grad) {
  if (grad) *grad = (M + M.transpose()) * e;
  return e.dot(M * e);
}

double obstacle_margin(const Obstacle& o, const PlannerConfig& cfg) {
  return o.movable() ? 0.0 : cfg.fixed_margin;
}

// Penalty of a single obstacle; accumulates into grad when given.
double obstacle_penalty(const std::vector<Sphere>& robot_spheres, const BoundingModel& robot_model,
                        double theta, const PlacedObstacle& placed, double weight, double margin,
                        double eps, Eigen::Vector3d* grad) {
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_j = 0;
  Vec2 worst_grad = Vec2::Zero();
  for (std::size_t j = 0; j < robot_spheres.size(); ++j) {
    const SphereContact c = sphere_contact(robot_spheres[j], placed);
    if (c.md < worst) {
      worst = c.md;
      worst_j = j;
      worst_grad = c.gradient;
    }
  }
  const double s = worst - margin;
  const double sm = smooth_min0(s, eps);
  if (grad) {
    const double scale = 2.0 * weight * sm * smooth_min0_derivative(s, eps);
    const Vec2& o = robot_model.spheres[worst_j].offset;
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    const Vec2 dcenter_dtheta(-sn * o.x() - c * o.y(), c * o.x() - sn * o.y());
    (*grad)[0] += scale * worst_grad.x();
    (*grad)[1] += scale * worst_grad.y();
    (*grad)[2] += scale * worst_grad.dot(dcenter_dtheta);
  }
  return weight * sm * sm;
}

}  // namespace

std::string to_string(StageMode m) {
  switch (m) {
    case StageMode::kAbsolute:
      return "absolute";
    case StageMode::kStepLength:
      return "step_length";
    case StageMode::kGoalRelative:
      return "goal_relative";
  }
  return "unknown";
}

StageMode stage_mode_from_string(const std::string& s) {
  if (s == "absolute") return StageMode::kAbsolute;
  if (s == "step_length") return StageMode::kStepLength;
  if (s == "goal_relative") return StageMode::kGoalRelative;
  throw std::invalid_argument("unknown stage mode '" + s + "'");
}

void Weights::check() const {
  if (!M_x.allFinite() || !M_g.allFinite()) {
    throw std::invalid_argument("weight matrices must be finite");
  }
  const Eigen::Matrix3d sx = 0.5 * (M_x + M_x.transpose());
  const Eigen::Matrix3d sg = 0.5 * (M_g + M_g.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ex(sx, Eigen::EigenvaluesOnly);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eg(sg, Eigen::EigenvaluesOnly);
  if (ex.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("M_x must be positive semidefinite");
  }
  if (eg.eigenvalues().minCoeff() <= 1e-12) {
    throw std::invalid_argument("M_g must be positive definite");
  }
  if (!(w_x >= 0.0) || !(w_d >= 0.0)) {
    throw std::invalid_argument("w_x and w_d must be non-negative");
  }
}

void PlannerConfig::check() const {
  if (lookahead < 2) throw std::invalid_argument("lookahead must be at least 2");
  if (max_steps < lookahead) throw std::invalid_argument("max_steps must be at least lookahead");
  if (!(goal_tolerance.position > 0.0) || !(goal_tolerance.angle > 0.0)) {
    throw std::invalid_argument("goal tolerances must be positive");
  }
  if (!(smoothing_eps > 0.0)) throw std::invalid_argument("smoothing eps must be positive");
  if (!(fixed_margin >= 0.0)) throw std::invalid_argument("fixed margin must be non-negative");
  if (time_substeps < 1) throw std::invalid_argument("time_substeps must be at least 1");
  if (solver.max_iterations < 1 || !(solver.gradient_tolerance > 0.0) ||
      !(solver.backtrack > 0.0 && solver.backtrack < 1.0) || !(solver.armijo > 0.0) ||
      !(solver.initial_step > 0.0) || solver.max_backtracks < 1) {
    throw std::invalid_argument("invalid solver settings");
  }
}

GoalNotReached::GoalNotReached(double best)
    : PlannerError("goal not reached; closest approach " + std::to_string(best) + " m"),
      best_distance(best) {}

double state_term(const State& x, const PlanningProblem& p, Eigen::Vector3d* grad) {
  switch (p.config.stage_mode) {
    case StageMode::kAbsolute:
      return quad(as_vector(x), p.weights.M_x, grad);
    case StageMode::kGoalRelative:
      return quad(pose_error(x, p.goal), p.weights.M_x, grad);
    case StageMode::kStepLength:
      break;
  }
  if (grad) grad->setZero();
  return 0.0;
}

double overlap_term(const State& x, const PlanningProblem& p, Eigen::Vector3d* grad) {
  if (grad) grad->setZero();
  const auto robot_spheres = place_body(x, p.robot->bounding);
  double total = 0.0;
  for (const auto& o : p.obstacles) {
    total += obstacle_penalty(robot_spheres, p.robot->bounding, x.theta, place_obstacle(o), o.weight,
                              obstacle_margin(o, p.config), p.config.smoothing_eps, grad);
  }
  return total;
}

double stage_cost(const State& x, const PlanningProblem& p, Eigen::Vector3d* grad) {
  Eigen::Vector3d g1, g2;
  const double v = state_term(x, p, grad ? &g1 : nullptr) + overlap_term(x, p, grad ? &g2 : nullptr);
  if (grad) *grad = g1 + g2;
  return v;
}

double terminal_cost(const State& x, const State& goal, const Eigen::Matrix3d& M_g,
                     Eigen::Vector3d* grad) {
  return quad(pose_error(x, goal), M_g, grad);
}

double step_term(const State& prev, const State& next, const Eigen::Matrix3d& M_x,
                 Eigen::Vector3d* grad_prev, Eigen::Vector3d* grad_next) {
  Eigen::Vector3d g;
  const double v = quad(pose_error(next, prev), M_x, &g);
  if (grad_next) *grad_next = g;
  if (grad_prev) *grad_prev = -g;
  return v;
}

HorizonObjective::HorizonObjective(const PlanningProblem& problem, const State& x0)
    : problem_(problem), x0_(x0), robot_reach_(problem.robot->bounding.reach()) {
  placed_.reserve(problem.obstacles.size());
  margins_.reserve(problem.obstacles.size());
  for (const auto& o : problem.obstacles) {
    placed_.push_back(place_obstacle(o));
    margins_.push_back(obstacle_margin(o, problem.config));
  }
}

double HorizonObjective::value(const ControlSequence& u) const { return evaluate(u, nullptr); }

double HorizonObjective::value_and_gradient(const ControlSequence& u, ControlSequence& grad) const {
  grad.resize(3, u.cols());
  return evaluate(u, &grad);
}

double HorizonObjective::evaluate(const ControlSequence& u, ControlSequence* grad) const {
  const auto& p = problem_;
  const auto& model = p.robot->dynamics;
  const Eigen::Index L = u.cols();
  const bool step_mode = p.config.stage_mode == StageMode::kStepLength;

  std::vector<State> xs(static_cast<std::size_t>(L) + 1);
  xs[0] = x0_;
  for (Eigen::Index l = 0; l < L; ++l) {
    xs[l + 1] = step_raw(model, xs[l], u.col(l));
  }

  std::vector<Eigen::Vector3d> gx(xs.size(), Eigen::Vector3d::Zero());
  double total = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    const State& x = xs[l];
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    total += state_term(x, p, grad ? &g : nullptr);
    if (grad) gx[l] += g;
    if (step_mode) {
      Eigen::Vector3d gp, gn;
      total += step_term(x, xs[l + 1], p.weights.M_x, &gp, &gn);
      if (grad) {
        gx[l] += gp;
        gx[l + 1] += gn;
      }
    }
    const auto robot_spheres = place_body(x, p.robot->bounding);
    Eigen::Vector3d go = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < placed_.size(); ++i) {
      const double far = robot_reach_ + placed_[i].reach + margins_[i] + kPenaltyCutoff;
      if ((placed_[i].center - x.position()).squaredNorm() > far * far) continue;
      total += obstacle_penalty(robot_spheres, p.robot->bounding, x.theta, placed_[i],
                                p.obstacles[i].weight, margins_[i], p.config.smoothing_eps,
                                grad ? &go : nullptr);
    }
    if (grad) gx[l] += go;
  }
  Eigen::Vector3d gt;
  total += terminal_cost(xs[L], p.goal, p.weights.M_g, &gt);

  if (grad) {
    gx[L] += gt;
    Eigen::Vector3d lambda = gx[L];
    for (Eigen::Index l = L - 1; l >= 0; --l) {
      const StepJacobian j = step_jacobian(model, xs[l], u.col(l));
      grad->col(l) = j.B.transpose() * lambda;
      lambda = gx[l] + j.A.transpose() * lambda;
    }
  }
  return total;
}

void project_controls(const ControlBounds& bounds, ControlSequence& u) {
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    const auto [lo, hi] = bounds.limits[static_cast<std::size_t>(r)];
    u.row(r) = u.row(r).cwiseMax(lo).cwiseMin(hi);
  }
}

HorizonSolution solve_horizon(const PlanningProblem& problem, const State& x0,
                              const ControlSequence& warm_start) {
  const SolverConfig& cfg = problem.config.solver;
  const ControlBounds& bounds = problem.robot->dynamics.bounds;
  const HorizonObjective objective(problem, x0);

  HorizonSolution sol;
  ControlSequence u = warm_start;
  project_controls(bounds, u);
  ControlSequence g;
  double f = objective.value_and_gradient(u, g);
  sol.initial_value = f;

  double alpha = cfg.initial_step;
  ControlSequence trial(3, u.cols()), g_trial(3, u.cols());
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    trial = u - g;
    project_controls(bounds, trial);
    const double stationarity = (trial - u).cwiseAbs().maxCoeff();
    if (stationarity <= cfg.gradient_tolerance) {
      sol.converged = true;
      break;
    }
    bool accepted = false;
    double a = alpha;
    double f_trial = f;
    for (int b = 0; b < cfg.max_backtracks; ++b) {
      trial = u - a * g;
      project_controls(bounds, trial);
      const double decrease = (g.array() * (trial - u).array()).sum();
      f_trial = objective.value(trial);
      if (f_trial <= f + cfg.armijo * decrease) {
        accepted = true;
        break;
      }
      a *= cfg.backtrack;
    }
    if (!accepted) {
      // no descent left at machine precision
      sol.converged = stationarity <= 1e3 * cfg.gradient_tolerance;
      break;
    }
    f_trial = objective.value_and_gradient(trial, g_trial);
    const ControlSequence s = trial - u;
    const double sy = (s.array() * (g_trial - g).array()).sum();
    alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e3) : 1e3;
    u = trial;
    g = g_trial;
    f = f_trial;
    sol.accepted_values.push_back(f);
  }
  sol.controls = std::move(u);
  sol.value = f;
  sol.iterations = it;
  return sol;
}

std::vector<OverlapRecord> extract_overlaps(const Trajectory& trajectory, const Robot& robot,
                                            std::span<const Obstacle> obstacles, int substeps) {
  std::vector<OverlapRecord> records;
  if (trajectory.empty()) return records;
  std::vector<PlacedObstacle> placed;
  placed.reserve(obstacles.size());
  for (const auto& o : obstacles) placed.push_back(place_obstacle(o));
  const double robot_reach = robot.bounding.reach();

  auto scan = [&](const State& pose, int k, int sub) {
    const auto spheres = place_body(pose, robot.bounding);
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const double far = robot_reach + placed[i].reach;
      if ((placed[i].center - pose.position()).squaredNorm() > far * far) continue;
      for (std::size_t j = 0; j < spheres.size(); ++j) {
        const auto& rs = spheres[j];
        if (placed[i].collision == CollisionKind::kBox) {
          const SphereContact c = sphere_contact(rs, placed[i]);
          if (c.md < -kContactTolerance) {
            records.push_back({c.md, c.direction, k, sub, static_cast<int>(j), 0, obstacles[i].id,
                               rs.center});
          }
          continue;
        }
        for (std::size_t m = 0; m < placed[i].spheres.size(); ++m) {
          const auto& os = placed[i].spheres[m];
          const double md = sphere_overlap(rs, os);
          if (md < -kContactTolerance) {
            const Vec2 dir =
                unit_direction(rs.center, os.center, unit_direction(rs.center, placed[i].center));
            records.push_back({md, dir, k, sub, static_cast<int>(j), static_cast<int>(m),
                               obstacles[i].id, rs.center});
          }
        }
      }
    }
  };

  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    for (int s = 0; s < substeps; ++s) {
      const double t = static_cast<double>(s) / substeps;
      scan(interpolate(trajectory[k], trajectory[k + 1], t), static_cast<int>(k), s);
    }
  }
  scan(trajectory.back(), static_cast<int>(trajectory.size()) - 1, 0);
  return records;
}

RequiredMap required_displacements(const std::vector<OverlapRecord>& records,
                                   std::span<const Obstacle> obstacles) {
  RequiredMap out;
  for (const auto& o : obstacles) {
    if (!o.movable()) continue;
    const OverlapRecord* deepest = nullptr;
    for (const auto& r : records) {
      if (r.obstacle_id == o.id && (!deepest || -r.md > -deepest->md)) {
        deepest = &r;
      }
    }
    if (!deepest) continue;
    RequiredDisplacement req;
    req.obstacle_id = o.id;
    req.mode = o.mobility;
    req.depth = -deepest->md;
    req.direction = deepest->direction;
    req.source = *deepest;
    if (o.mobility == Mobility::kTranslate) {
      req.magnitude = req.depth;
    } else {
      // No closed form maps overlap depth to an angle; rotation search starts at zero.
      req.magnitude = 0.0;
      Vec2 arm = deepest->contact - o.pose.position();
      if (o.collision == CollisionKind::kSpheres) {
        arm = place_body(o.pose, o.bounding)[static_cast<std::size_t>(deepest->obstacle_sphere)].center -
              o.pose.position();
      }
      const double cross = arm.x() * req.direction.y() - arm.y() * req.direction.x();
      req.sign = cross >= 0.0 ? 1 : -1;
    }
    out.emplace(o.id, req);
  }
  return out;
}

bool at_goal(const State& x, const State& goal, const GoalTolerance& tol) {
  const Eigen::Vector3d e = pose_error(x, goal);
  return e.head<2>().norm() <= tol.position && std::abs(e[2]) <= tol.angle;
}

PlanResult plan(const Robot& robot, const State& start, const State& goal,
                std::span<const Obstacle> obstacles, const Weights& weights,
                const PlannerConfig& config, std::uint64_t seed) {
  config.check();
  weights.check();
  robot.dynamics.check();

  for (const auto& o : obstacles) {
    if (o.movable()) continue;
    const auto placed = place_obstacle(o);
    for (const auto& s : place_body(start, robot.bounding)) {
      if (sphere_contact(s, placed).md < -kContactTolerance) {
        throw InfeasibleStart("start pose intersects fixed obstacle '" + o.id + "'");
      }
    }
  }

  PlanningProblem problem{&robot, goal, obstacles, weights, config};
  PlanResult result;
  result.seed = seed;
  result.trajectory.push_back(start);

  const int L = config.lookahead;
  ControlSequence warm = ControlSequence::Zero(3, L);
  std::mt19937_64 rng(seed);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (int r = 0; r < 3; ++r) warm(r, l) = uniform(rng, -1e-3, 1e-3);
  }

  State x = start;
  double best = pose_error(x, goal).head<2>().norm();
  while (!at_goal(x, goal, config.goal_tolerance)) {
    if (static_cast<int>(result.controls.size()) >= config.max_steps) {
      throw GoalNotReached(best);
    }
    HorizonSolution sol = solve_horizon(problem, x, warm);
    if (!sol.converged) ++result.unconverged_solves;
    const Eigen::Vector3d u0 = sol.controls.col(0);

    Eigen::Vector3d g;
    double stage = stage_cost(x, problem, &g);
    const State next = step_raw(robot.dynamics, x, u0);
    if (config.stage_mode == StageMode::kStepLength) {
      stage += step_term(x, next, weights.M_x);
    }
    result.stage_costs.push_back(stage);
    result.horizon_values.push_back(sol.value);
    result.controls.emplace_back(Control(u0));
    result.trajectory.push_back(next);
    x = next;
    best = std::min(best, pose_error(x, goal).head<2>().norm());

    warm.leftCols(L - 1) = sol.controls.rightCols(L - 1);
    warm.col(L - 1) = sol.controls.col(L - 1);
  }
  result.terminal_cost = terminal_cost(x, goal, weights.M_g);

  result.overlaps = extract_overlaps(result.trajectory, robot, obstacles, config.time_substeps);
  for (const auto& r : result.overlaps) {
    const auto it = std::find_if(obstacles.begin(), obstacles.end(),
                                 [&](const Obstacle& o) { return o.id == r.obstacle_id; });
    if (it != obstacles.end() && !it->movable()) {
      throw PlannerError("trajectory penetrates fixed obstacle '" + r.obstacle_id + "' by " +
                         std::to_string(-r.md) + " m at step " + std::to_string(r.time_index));
    }
  }
  result.required = required_displacements(result.overlaps, obstacles);
  return result;
}

double sum_planning_cost(const PlanResult& result) {
  double total = result.terminal_cost;
  for (double c : result.stage_costs) total += c;
  return total;
}

}  // namespace mindisp
