#include "mindisp/dynamics.hpp"

#include <cmath>
#include <limits>

namespace mindisp {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kPlanarHolonomic:
      return "planar_holonomic";
    case ModelKind::kDownCrossTurn:
      return "down_cross_turn";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "planar_holonomic") return ModelKind::kPlanarHolonomic;
  if (s == "down_cross_turn") return ModelKind::kDownCrossTurn;
  throw std::invalid_argument("unknown dynamics kind '" + s + "'");
}

ControlBounds ControlBounds::symmetric(std::size_t dim, double magnitude) {
  return ControlBounds{std::vector<std::pair<double, double>>(dim, {-magnitude, magnitude})};
}

bool ControlBounds::contains(const Control& u, double slack) const {
  if (static_cast<std::size_t>(u.size()) != limits.size()) return false;
  for (std::size_t i = 0; i < limits.size(); ++i) {
    const double v = u[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(v) || v < limits[i].first - slack || v > limits[i].second + slack) {
      return false;
    }
  }
  return true;
}

void DynamicsModel::check() const {
  if (kind == ModelKind::kPlanarHolonomic && !(dt > 0.0)) {
    throw std::invalid_argument("dynamics dt must be positive");
  }
  if (bounds.limits.size() != kControlDim) {
    throw std::invalid_argument("control bounds must have 3 components");
  }
  for (const auto& [lo, hi] : bounds.limits) {
    if (!(lo <= hi)) throw std::invalid_argument("control bound min exceeds max");
  }
}

State step_raw(const DynamicsModel& model, const State& x, const Eigen::Vector3d& u) {
  switch (model.kind) {
    case ModelKind::kPlanarHolonomic: {
      const double c = std::cos(x.theta);
      const double s = std::sin(x.theta);
      return make_pose(x.x + model.dt * (u[0] * c - u[1] * s),
                       x.y + model.dt * (u[0] * s + u[1] * c), x.theta + model.dt * u[2]);
    }
    case ModelKind::kDownCrossTurn: {
      // cos(theta + (T + pi)/2) = -sin(a), sin(theta + (T + pi)/2) = cos(a)
      const double a = x.theta + 0.5 * u[2];
      const double ca = std::cos(a);
      const double sa = std::sin(a);
      return make_pose(x.x + u[0] * ca - u[1] * sa, x.y + u[0] * sa + u[1] * ca, x.theta + u[2]);
    }
  }
  return x;
}

StepJacobian step_jacobian(const DynamicsModel& model, const State& x, const Eigen::Vector3d& u) {
  StepJacobian j;
  j.A.setIdentity();
  j.B.setZero();
  switch (model.kind) {
    case ModelKind::kPlanarHolonomic: {
      const double c = std::cos(x.theta);
      const double s = std::sin(x.theta);
      const double dt = model.dt;
      j.A(0, 2) = dt * (-u[0] * s - u[1] * c);
      j.A(1, 2) = dt * (u[0] * c - u[1] * s);
      j.B << dt * c, -dt * s, 0.0,  //
          dt * s, dt * c, 0.0,      //
          0.0, 0.0, dt;
      break;
    }
    case ModelKind::kDownCrossTurn: {
      const double a = x.theta + 0.5 * u[2];
      const double ca = std::cos(a);
      const double sa = std::sin(a);
      const double dxa = -u[0] * sa - u[1] * ca;
      const double dya = u[0] * ca - u[1] * sa;
      j.A(0, 2) = dxa;
      j.A(1, 2) = dya;
      j.B << ca, -sa, 0.5 * dxa,  //
          sa, ca, 0.5 * dya,      //
          0.0, 0.0, 1.0;
      break;
    }
  }
  return j;
}

State step(const DynamicsModel& model, const State& x, const Control& u) {
  if (u.size() != DynamicsModel::kControlDim) {
    throw InvalidControl("control has " + std::to_string(u.size()) + " components, model " +
                         to_string(model.kind) + " expects 3");
  }
  if (!model.bounds.contains(u)) {
    throw InvalidControl("control outside bounds for model " + to_string(model.kind));
  }
  return step_raw(model, x, Eigen::Vector3d(u[0], u[1], u[2]));
}

Trajectory rollout(const DynamicsModel& model, const State& x0, std::span<const Control> controls) {
  Trajectory states;
  states.reserve(controls.size() + 1);
  states.push_back(x0);
  for (const auto& u : controls) {
    states.push_back(step(model, states.back(), u));
  }
  return states;
}

Eigen::Vector3d pose_error(const State& a, const State& b) {
  return {a.x - b.x, a.y - b.y, normalize_angle(a.theta - b.theta)};
}

State interpolate(const State& a, const State& b, double t) {
  const double dtheta = normalize_angle(b.theta - a.theta);
  return make_pose(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.theta + t * dtheta);
}

double dynamics_residual(const DynamicsModel& model, const Trajectory& states,
                         std::span<const Control> controls) {
  if (states.size() != controls.size() + 1) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    if (controls[k].size() != DynamicsModel::kControlDim) {
      return std::numeric_limits<double>::infinity();
    }
    const State next = step_raw(model, states[k], Eigen::Vector3d(controls[k][0], controls[k][1],
                                                                  controls[k][2]));
    worst = std::max(worst, pose_error(states[k + 1], next).norm());
  }
  return worst;
}

}  // namespace mindisp
