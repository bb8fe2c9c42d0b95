#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mindisp/body.hpp"
#include "mindisp/dynamics.hpp"
#include "mindisp/geometry.hpp"

namespace mindisp {

/// What the per-stage state term ||.||^2_{M_x} is applied to.
enum class StageMode {
  kAbsolute,      // the state itself
  kStepLength,    // the step x_{l+1} - x_l taken from each stage
  kGoalRelative,  // x_l - goal
};
std::string to_string(StageMode m);
StageMode stage_mode_from_string(const std::string& s);

struct Weights {
  Eigen::Matrix3d M_x = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d M_g = Eigen::Matrix3d::Identity();
  double w_x = 1.0;
  double w_d = 1.0;

  void check() const;
  bool operator==(const Weights&) const = default;
};

struct SolverConfig {
  int max_iterations = 150;
  double gradient_tolerance = 1e-6;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double initial_step = 1e-2;

  bool operator==(const SolverConfig&) const = default;
};

struct GoalTolerance {
  double position = 0.05;
  double angle = 0.1;
  bool operator==(const GoalTolerance&) const = default;
};

struct PlannerConfig {
  int lookahead = 21;
  int max_steps = 400;
  GoalTolerance goal_tolerance;
  double smoothing_eps = kDefaultSmoothingEps;
  StageMode stage_mode = StageMode::kAbsolute;
  double fixed_margin = 0.05;  // clearance kept from fixed obstacles
  int time_substeps = 5;
  SolverConfig solver;

  void check() const;
  bool operator==(const PlannerConfig&) const = default;
};

struct RequiredDisplacement {
  std::string obstacle_id;
  Mobility mode = Mobility::kTranslate;
  double magnitude = 0.0;  // y: meters, or radians for rotation
  Vec2 direction = Vec2::UnitX();
  int sign = 1;            // rotation sense that pushes the deepest contact away
  double depth = 0.0;      // deepest overlap magnitude, meters
  OverlapRecord source;
};

using RequiredMap = std::map<std::string, RequiredDisplacement>;

struct PlanResult {
  Trajectory trajectory;
  std::vector<Control> controls;
  std::vector<double> stage_costs;     // realized stage cost at x_0 .. x_{T-1}
  std::vector<double> horizon_values;  // optimized J_k per receding-horizon solve
  double terminal_cost = 0.0;
  std::vector<OverlapRecord> overlaps;
  RequiredMap required;
  std::uint64_t seed = 0;
  int unconverged_solves = 0;
};

class PlannerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GoalNotReached : public PlannerError {
 public:
  explicit GoalNotReached(double best_distance);
  double best_distance;
};

class InfeasibleStart : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

/// Everything a horizon objective needs besides the control sequence.
struct PlanningProblem {
  const Robot* robot = nullptr;
  State goal;
  std::span<const Obstacle> obstacles;
  Weights weights;
  PlannerConfig config;
};

// ||x||^2_{M_x} (or relative to goal in kGoalRelative mode; zero in kStepLength mode).
double state_term(const State& x, const PlanningProblem& p, Eigen::Vector3d* grad = nullptr);

// sum_i M_i * softmin(worst overlap against obstacle i)^2.
double overlap_term(const State& x, const PlanningProblem& p, Eigen::Vector3d* grad = nullptr);

/// Stage cost of one state: state_term + overlap_term.
double stage_cost(const State& x, const PlanningProblem& p, Eigen::Vector3d* grad = nullptr);

/// ||x - goal||^2_{M_g}, heading difference wrapped.
double terminal_cost(const State& x, const State& goal, const Eigen::Matrix3d& M_g,
                     Eigen::Vector3d* grad = nullptr);

/// ||x_next - x_prev||^2_{M_x}; the path-length proxy of kStepLength mode.
double step_term(const State& prev, const State& next, const Eigen::Matrix3d& M_x,
                 Eigen::Vector3d* grad_prev = nullptr, Eigen::Vector3d* grad_next = nullptr);

using ControlSequence = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// L-step objective with the rollout constraint eliminated.
class HorizonObjective {
 public:
  HorizonObjective(const PlanningProblem& problem, const State& x0);

  double value(const ControlSequence& u) const;
  double value_and_gradient(const ControlSequence& u, ControlSequence& grad) const;
  const State& start() const { return x0_; }

 private:
  double evaluate(const ControlSequence& u, ControlSequence* grad) const;

  const PlanningProblem& problem_;
  State x0_;
  std::vector<PlacedObstacle> placed_;
  std::vector<double> margins_;
  double robot_reach_;
};

struct HorizonSolution {
  ControlSequence controls;
  double value = 0.0;
  double initial_value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> accepted_values;  // objective after each accepted iterate
};

/// Clamps every column into the model's control bounds.
void project_controls(const ControlBounds& bounds, ControlSequence& u);

/// Projected spectral-gradient descent with Armijo backtracking from `warm_start`.
HorizonSolution solve_horizon(const PlanningProblem& problem, const State& x0,
                              const ControlSequence& warm_start);

/// Every robot/obstacle sphere-pair overlap deeper than the contact tolerance along the
/// trajectory, sampled at `substeps` points per segment plus the final state.
std::vector<OverlapRecord> extract_overlaps(const Trajectory& trajectory, const Robot& robot,
                                            std::span<const Obstacle> obstacles, int substeps);

/// y^i per movable obstacle: the largest overlap magnitude among its records.
RequiredMap required_displacements(const std::vector<OverlapRecord>& records,
                                   std::span<const Obstacle> obstacles);

/// Receding-horizon planning phase from start to goal.
PlanResult plan(const Robot& robot, const State& start, const State& goal,
                std::span<const Obstacle> obstacles, const Weights& weights,
                const PlannerConfig& config, std::uint64_t seed = 0);

bool at_goal(const State& x, const State& goal, const GoalTolerance& tol);

/// Sum of realized stage costs plus the terminal cost.
double sum_planning_cost(const PlanResult& result);

}  // namespace mindisp
