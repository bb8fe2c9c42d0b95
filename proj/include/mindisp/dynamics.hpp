#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mindisp/geometry.hpp"

namespace mindisp {

using State = Pose;
using Control = Eigen::VectorXd;
using Trajectory = std::vector<State>;

enum class ModelKind {
  kPlanarHolonomic,  // body-frame velocities (u, v, omega), Euler-integrated over dt
  kDownCrossTurn,    // per-step displacements (D, C, T)
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct ControlBounds {
  std::vector<std::pair<double, double>> limits;

  static ControlBounds symmetric(std::size_t dim, double magnitude);
  bool contains(const Control& u, double slack = 1e-12) const;
  bool operator==(const ControlBounds&) const = default;
};

class InvalidControl : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DynamicsModel {
  ModelKind kind = ModelKind::kPlanarHolonomic;
  double dt = 0.1;
  ControlBounds bounds = ControlBounds::symmetric(3, 1.0);

  static constexpr int kControlDim = 3;

  void check() const;
  bool operator==(const DynamicsModel&) const = default;
};

/// Partial derivatives of one step: A = d x_{k+1} / d x_k, B = d x_{k+1} / d u_k.
struct StepJacobian {
  Eigen::Matrix3d A;
  Eigen::Matrix3d B;
};

/// One discrete step. Throws InvalidControl on wrong dimension or bounds violation.
State step(const DynamicsModel& model, const State& x, const Control& u);

/// Unchecked step used by the optimizer; control must already be feasible.
State step_raw(const DynamicsModel& model, const State& x, const Eigen::Vector3d& u);
StepJacobian step_jacobian(const DynamicsModel& model, const State& x, const Eigen::Vector3d& u);

/// states[0] = x0, states[k+1] = step(states[k], controls[k]).
Trajectory rollout(const DynamicsModel& model, const State& x0, std::span<const Control> controls);

/// Pose difference with the angular component wrapped, as a 3-vector.
Eigen::Vector3d pose_error(const State& a, const State& b);

/// Linear interpolation of position and shortest-arc interpolation of heading.
State interpolate(const State& a, const State& b, double t);

/// Largest ||states[k+1] - step(states[k], controls[k])|| (angles wrapped).
/// Returns +inf when the sizes are inconsistent.
double dynamics_residual(const DynamicsModel& model, const Trajectory& states,
                         std::span<const Control> controls);

}  // namespace mindisp
