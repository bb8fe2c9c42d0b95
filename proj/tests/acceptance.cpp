// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.
// Usage: acceptance <source dir>   (the source dir holds data/ias_weight_pair.json)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "mindisp/cli.hpp"
#include "mindisp/scenario.hpp"
#include "single_obstacle.hpp"
#include "support.hpp"

using namespace mindisp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------------------
// Independent feasibility check. Everything below recomputes geometry and dynamics from
// the raw scenario fields instead of calling the library's collision or rollout code.

struct Circle {
  Vec2 c;
  double r;
};

struct OrientedRect {
  Vec2 c;
  Vec2 h;
  double th;

  Vec2 axis(int i) const {
    return i == 0 ? Vec2(std::cos(th), std::sin(th)) : Vec2(-std::sin(th), std::cos(th));
  }
  std::vector<Vec2> corners() const {
    std::vector<Vec2> out;
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) out.push_back(c + sx * h.x() * axis(0) + sy * h.y() * axis(1));
    }
    return out;
  }
};

Vec2 rot(const Vec2& v, double th) {
  return {std::cos(th) * v.x() - std::sin(th) * v.y(), std::sin(th) * v.x() + std::cos(th) * v.y()};
}

double wrap(double a) {
  a = std::fmod(a + M_PI, 2 * M_PI);
  if (a < 0) a += 2 * M_PI;
  return a - M_PI;
}

// Signed distance from a point to a filled rectangle.
double rect_sdf(const Vec2& p, const OrientedRect& r) {
  const Vec2 d = p - r.c;
  const Vec2 q(std::abs(d.dot(r.axis(0))) - r.h.x(), std::abs(d.dot(r.axis(1))) - r.h.y());
  const Vec2 outside = q.cwiseMax(0.0);
  return outside.norm() + std::min(std::max(q.x(), q.y()), 0.0);
}

// Penetration depth of two rectangles by separating axes (0 if disjoint).
double rect_penetration(const OrientedRect& a, const OrientedRect& b) {
  double depth = std::numeric_limits<double>::infinity();
  const auto ca = a.corners(), cb = b.corners();
  for (const Vec2& n : {a.axis(0), a.axis(1), b.axis(0), b.axis(1)}) {
    double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
    for (const auto& p : ca) amin = std::min(amin, p.dot(n)), amax = std::max(amax, p.dot(n));
    for (const auto& p : cb) bmin = std::min(bmin, p.dot(n)), bmax = std::max(bmax, p.dot(n));
    const double overlap = std::min(amax, bmax) - std::max(amin, bmin);
    if (overlap <= 0) return 0.0;
    depth = std::min(depth, overlap);
  }
  return depth;
}

struct Body {
  bool is_rect = false;
  OrientedRect rect;
  std::vector<Circle> circles;
};

Body body_at(const Obstacle& o, const Pose& p) {
  Body b;
  if (o.collision == CollisionKind::kBox) {
    const auto& part = o.shape.front();
    b.is_rect = true;
    b.rect = {p.position() + rot(part.offset, p.theta), part.half_extents, p.theta + part.theta};
  } else {
    for (const auto& s : o.bounding.spheres) b.circles.push_back({p.position() + rot(s.offset, p.theta), s.radius});
  }
  return b;
}

// Largest penetration between two obstacle bodies.
double penetration(const Body& a, const Body& b) {
  if (a.is_rect && b.is_rect) return rect_penetration(a.rect, b.rect);
  if (a.is_rect || b.is_rect) {
    const Body& r = a.is_rect ? a : b;
    const Body& s = a.is_rect ? b : a;
    double worst = 0.0;
    for (const auto& c : s.circles) worst = std::max(worst, c.r - rect_sdf(c.c, r.rect));
    return worst;
  }
  double worst = 0.0;
  for (const auto& x : a.circles) {
    for (const auto& y : b.circles) worst = std::max(worst, x.r + y.r - (x.c - y.c).norm());
  }
  return worst;
}

Pose step_model(const DynamicsModel& m, const Pose& x, const Eigen::VectorXd& u) {
  if (m.kind == ModelKind::kPlanarHolonomic) {
    const Vec2 v = rot(Vec2(u[0], u[1]), x.theta) * m.dt;
    return Pose{x.x + v.x(), x.y + v.y(), wrap(x.theta + m.dt * u[2])};
  }
  const double a = x.theta + u[2] / 2;
  return Pose{x.x + u[0] * std::cos(a) + u[1] * std::cos(a + M_PI / 2),
              x.y + u[0] * std::sin(a) + u[1] * std::sin(a + M_PI / 2), wrap(x.theta + u[2])};
}

// Conditions: endpoints and dynamics, mutual obstacle disjointness, robot-obstacle
// disjointness along the path sampled at `substeps` per step. Returns the problems found.
std::vector<std::string> independent_check(const Solution& sol, int substeps, double tol) {
  std::vector<std::string> issues;
  const Scenario& s = sol.scenario;
  const auto& traj = sol.plan.trajectory;
  const auto& us = sol.plan.controls;
  if (traj.empty() || traj.size() != us.size() + 1) {
    issues.push_back("trajectory/control length mismatch");
    return issues;
  }
  auto pose_gap = [](const Pose& a, const Pose& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(wrap(a.theta - b.theta))});
  };
  if (pose_gap(traj.front(), s.start) > 1e-9) issues.push_back("start mismatch");
  const Pose& last = traj.back();
  if (std::hypot(last.x - s.goal.x, last.y - s.goal.y) > s.planner.goal_tolerance.position ||
      std::abs(wrap(last.theta - s.goal.theta)) > s.planner.goal_tolerance.angle) {
    issues.push_back("goal not reached");
  }
  for (std::size_t k = 0; k < us.size(); ++k) {
    if (pose_gap(step_model(s.robot.dynamics, traj[k], us[k]), traj[k + 1]) > 1e-9) {
      issues.push_back("dynamics violated at step " + std::to_string(k));
      break;
    }
    for (int c = 0; c < us[k].size(); ++c) {
      const auto [lo, hi] = s.robot.dynamics.bounds.limits[c];
      if (us[k][c] < lo - 1e-12 || us[k][c] > hi + 1e-12) issues.push_back("control out of bounds");
    }
  }

  std::vector<Body> bodies;
  for (const auto& o : s.obstacles) {
    Pose p = o.pose;
    if (sol.refinement.displacements.count(o.id)) p = sol.refinement.displacements.at(o.id).realized_pose;
    bodies.push_back(body_at(o, p));
  }
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      if (penetration(bodies[i], bodies[j]) > tol) {
        issues.push_back("obstacles " + s.obstacles[i].id + " and " + s.obstacles[j].id + " overlap");
      }
    }
  }

  std::vector<bool> hit(bodies.size(), false);
  auto visit = [&](const Pose& x) {
    for (const auto& rs : s.robot.bounding.spheres) {
      const Vec2 c = x.position() + rot(rs.offset, x.theta);
      for (std::size_t i = 0; i < bodies.size(); ++i) {
        const Body& b = bodies[i];
        double pen = 0.0;
        if (b.is_rect) {
          pen = rs.radius - rect_sdf(c, b.rect);
        } else {
          for (const auto& oc : b.circles) pen = std::max(pen, rs.radius + oc.r - (c - oc.c).norm());
        }
        if (pen > tol) hit[i] = true;
      }
    }
  };
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    for (int j = 0; j < substeps; ++j) {
      const double a = static_cast<double>(j) / substeps;
      visit(Pose{traj[k].x + a * (traj[k + 1].x - traj[k].x), traj[k].y + a * (traj[k + 1].y - traj[k].y),
                 traj[k].theta + a * wrap(traj[k + 1].theta - traj[k].theta)});
    }
  }
  visit(traj.back());
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (hit[i]) issues.push_back("robot passes through " + s.obstacles[i].id);
  }
  return issues;
}

// (d - y) / delta integral and d >= y for every movable obstacle.
std::vector<std::string> arithmetic_issues(const Solution& sol) {
  std::vector<std::string> out;
  const double delta = sol.scenario.refinement.delta;
  for (const auto& [id, d] : sol.refinement.displacements) {
    const double y = sol.plan.required.count(id) ? sol.plan.required.at(id).magnitude : 0.0;
    const double k = (d.magnitude - y) / delta;
    if (d.magnitude < y) out.push_back(id + ": d < y");
    if (std::abs(k - std::round(k)) > 1e-9) out.push_back(id + ": (d - y)/delta = " + std::to_string(k));
  }
  return out;
}

// ---------------------------------------------------------------------------------------

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order at the end
std::vector<const Solution*> all_runs;
std::vector<std::unique_ptr<Solution>> kept;

const Solution& keep(Solution s) {
  kept.push_back(std::make_unique<Solution>(std::move(s)));
  all_runs.push_back(kept.back().get());
  return *kept.back();
}

void report(int n, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double t = seconds(t0);
  if (!o.pass) ++failures;
  char head[128];
  std::snprintf(head, sizeof head, "%-4s criterion %2d  %-40s ", o.pass ? "PASS" : "FAIL", n, title.c_str());
  lines[n] = head + o.detail + fmt("  (%.2f s)", t);
  std::fprintf(stderr, "criterion %d done\n", n);
}


Scenario with_weights(Scenario s, const json& list) {
  for (const auto& w : list) apply_weight_override(s, w.get<std::string>());
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path source = argc > 1 ? fs::path(argv[1]) : fs::current_path();

  report(1, "overlap metric oracle", [] {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      auto [a, b] = testing::overlapping_pair(rng);
      const double md = sphere_overlap(a, b);
      const Vec2 dir = (b.center - a.center).normalized();
      b.center += std::abs(md) * dir;
      worst = std::max(worst, std::abs(sphere_overlap(a, b)));
    }
    const double t = seconds(t0);
    return Outcome{worst <= 1e-9 && t < 1.0, fmt("max |md| after translation %.2e, %.3f s", worst, t)};
  });

  report(2, "stage/terminal gradient check", [] {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2);
    Robot robots[2];
    robots[0] = testing::point_robot(0.2, ModelKind::kPlanarHolonomic);
    robots[0].bounding.spheres = {BodySphere{{0, 0}, 0.21}, BodySphere{{0.35, 0}, 0.21}, BodySphere{{0, 0.35}, 0.21}};
    robots[1] = testing::point_robot(0.25, ModelKind::kDownCrossTurn);
    std::vector<Obstacle> obs{testing::disc("a", {0.3, 0.2}, 0.5), testing::disc("b", {-0.6, 0.4}, 0.3),
                              testing::box("w", {0.0, -0.7}, {1.5, 0.2})};
    Weights w;
    w.M_x = Eigen::Vector3d(0.3, 0.2, 0.1).asDiagonal();
    w.M_g = Eigen::Vector3d(2, 1, 0.5).asDiagonal();
    PlannerConfig c;
    c.stage_mode = StageMode::kGoalRelative;
    int tested = 0, bad = 0;
    double worst = 0.0;
    while (tested < 100) {
      const Robot& robot = robots[tested % 2];
      const State goal = testing::random_pose(rng, 1);
      const PlanningProblem p{&robot, goal, obs, w, c};
      const State x = testing::random_pose(rng, 1.2);
      auto fd = [&](double h, auto f) {
        Eigen::Vector3d g;
        for (int k = 0; k < 3; ++k) {
          State a = x, b = x;
          (k == 0 ? a.x : k == 1 ? a.y : a.theta) += h;
          (k == 0 ? b.x : k == 1 ? b.y : b.theta) -= h;
          g[k] = (f(a) - f(b)) / (2 * h);
        }
        return g;
      };
      auto sc = [&](const State& s) { return stage_cost(s, p); };
      auto tc = [&](const State& s) { return terminal_cost(s, goal, w.M_g); };
      // skip states where a min over sphere pairs switches inside the stencil
      if ((fd(1e-6, sc) - fd(1e-4, sc)).norm() > 1e-3 * std::max(1.0, fd(1e-6, sc).norm())) continue;
      Eigen::Vector3d gs, gt;
      stage_cost(x, p, &gs);
      terminal_cost(x, goal, w.M_g, &gt);
      const Eigen::Vector3d fs_ = fd(1e-6, sc), ft = fd(1e-6, tc);
      const double es = (gs - fs_).norm() / std::max(1.0, fs_.norm());
      const double et = (gt - ft).norm() / std::max(1.0, ft.norm());
      worst = std::max({worst, es, et});
      if (es > 1e-5 || et > 1e-5) ++bad;
      ++tested;
    }
    const double t = seconds(t0);
    return Outcome{bad == 0 && t < 5.0, fmt("100 states, worst relative error %.2e, %.3f s", worst, t)};
  });

  std::map<std::string, const Solution*> canonical;
  report(3, "feasibility on all builtins", [&] {
    Outcome o;
    for (const auto& name : builtin_names()) {
      const auto t0 = Clock::now();
      const Scenario s = builtin(name);
      const Solution& sol = keep(solve(s, kCanonicalSeed));
      canonical[name] = &sol;
      const double t = seconds(t0);
      const auto issues = independent_check(sol, 10 * s.planner.time_substeps, 1e-6);
      const bool ok = issues.empty() && t < 60.0;
      o.pass = o.pass && ok;
      std::ostringstream d;
      d.precision(3);
      d << name << (ok ? " ok" : " BAD") << " (" << std::fixed << t << " s";
      if (!issues.empty()) d << ", " << issues.size() << " issues: " << issues.front();
      d << ") ";
      o.detail += d.str();
    }
    // the checker must notice an obstacle parked on the path
    Solution tampered = *canonical.at("sofa");
    auto& moved = tampered.refinement.displacements.begin()->second;
    moved.realized_pose.x = tampered.plan.trajectory[tampered.plan.trajectory.size() / 2].x;
    moved.realized_pose.y = tampered.plan.trajectory[tampered.plan.trajectory.size() / 2].y;
    const bool caught = !independent_check(tampered, 50, 1e-6).empty();
    o.pass = o.pass && caught;
    o.detail += caught ? "tamper caught" : "TAMPER MISSED";
    return o;
  });

  report(5, "single-obstacle optimality", [] {
    const auto t0 = Clock::now();
    Outcome o;
    for (const auto& c : testing::single_obstacle_cases()) {
      const RequiredMap req = testing::required_for(c);
      RefinementConfig cfg;
      const auto r = refine(c.trajectory, c.robot, c.obstacles, req, cfg, 10.0);
      const double d = r.displacements.at("target").magnitude;
      const double best = testing::brute_force_min_displacement(c, cfg.delta / 4, 256, 3.0);
      const bool ok = std::abs(d - best) <= cfg.delta + 1e-12;
      o.pass = o.pass && ok;
      o.detail += c.name + fmt(" d=%.4f oracle=%.4f; ", d, best);
    }
    const double t = seconds(t0);
    o.pass = o.pass && t < 30.0;
    return o;
  });

  report(6, "l_corridor weight trend (M_i x10)", [] {
    const Scenario base = builtin("l_corridor");
    Scenario heavy = base;
    scale_overlap_weights(heavy, 10.0);
    const Solution& a = keep(solve(base, kCanonicalSeed));
    const Solution& b = keep(solve(heavy, kCanonicalSeed));
    const double da = a.summary.sum_displacement, db = b.summary.sum_displacement;
    return Outcome{db <= da, fmt("baseline sum_d=%.4f, x10 sum_d=%.4f", da, db)};
  });

  report(7, "ias displacement vs count pair", [&] {
    std::ifstream in(source / "data" / "ias_weight_pair.json");
    if (!in) return Outcome{false, "missing data/ias_weight_pair.json"};
    const json pair = json::parse(in);
    const auto seed = pair.at("seed").get<std::uint64_t>();
    const Scenario s = builtin(pair.at("scenario").get<std::string>(), seed);
    const Solution& a = keep(solve(with_weights(s, pair.at("A").at("weights")), seed));
    const Solution& b = keep(solve(with_weights(s, pair.at("B").at("weights")), seed));
    const double da = a.summary.sum_displacement, db = b.summary.sum_displacement;
    const int ca = a.summary.displaced_count, cb = b.summary.displaced_count;
    bool ok = da > db && ca < cb;
    // the replay also reproduces the recorded figures
    ok = ok && std::abs(da - pair["A"]["sum_d"].get<double>()) < 1e-3 &&
         std::abs(db - pair["B"]["sum_d"].get<double>()) < 1e-3 &&
         ca == pair["A"]["displaced_count"].get<int>() && cb == pair["B"]["displaced_count"].get<int>();
    return Outcome{ok, fmt("A sum_d=%.4f count=%.0f, B sum_d=%.4f count=%.0f", da, ca, db, cb)};
  });

  report(8, "rotation_blocks spheres vs rectangles", [] {
    const Scenario spheres = builtin("rotation_blocks");
    Scenario rects = spheres;
    for (auto& o : rects.obstacles) {
      if (o.movable()) o.collision = CollisionKind::kBox;
    }
    const Solution& a = keep(solve(spheres, kCanonicalSeed));
    const Solution& b = keep(solve(rects, kCanonicalSeed));
    const double da = a.summary.sum_displacement, db = b.summary.sum_displacement;
    const double rel = std::abs(da - db) / std::max(da, db);
    const bool feasible = independent_check(b, 10 * rects.planner.time_substeps, 1e-6).empty();
    return Outcome{rel <= 0.25 && da > 0 && feasible,
                   fmt("spheres sum_d=%.4f, rectangles sum_d=%.4f, relative gap %.1f%%", da, db, 100 * rel)};
  });

  report(4, "refinement arithmetic on every run", [] {
    std::size_t n = 0;
    std::vector<std::string> issues;
    for (const Solution* s : all_runs) {
      const auto i = arithmetic_issues(*s);
      issues.insert(issues.end(), i.begin(), i.end());
      n += s->refinement.displacements.size();
    }
    return Outcome{issues.empty() && n > 0,
                   std::to_string(all_runs.size()) + " runs, " + std::to_string(n) + " obstacles" +
                       (issues.empty() ? "" : ", first issue: " + issues.front())};
  });

  report(9, "determinism of plan output", [] {
    const fs::path root = fs::temp_directory_path() / "mindisp_acceptance";
    Outcome o;
    for (const auto& name : builtin_names()) {
      std::string docs[2];
      for (int r = 0; r < 2; ++r) {
        const fs::path dir = root / (name + std::to_string(r));
        fs::remove_all(dir);
        const std::string d = dir.string();
        const char* args[] = {"mindisp", "plan", "--builtin", name.c_str(), "--out", d.c_str()};
        std::ostringstream out, err;
        if (run_cli(6, args, out, err) != 0) return Outcome{false, name + ": plan failed " + err.str()};
        std::ifstream in(dir / "solution.json", std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        docs[r] = ss.str();
      }
      const bool same = !docs[0].empty() && docs[0] == docs[1];
      o.pass = o.pass && same;
      o.detail += name + (same ? " identical; " : " DIFFERS; ");
    }
    fs::remove_all(root);
    return o;
  });

  report(10, "obstacle-free sanity", [] {
    Outcome o;
    for (const auto& name : builtin_names()) {
      const Scenario s = without_obstacles(builtin(name));
      const Solution sol = solve(s, kCanonicalSeed);
      const double res = dynamics_residual(s.robot.dynamics, sol.plan.trajectory, sol.plan.controls);
      const bool ok = at_goal(sol.plan.trajectory.back(), s.goal, s.planner.goal_tolerance) &&
                      sol.plan.overlaps.empty() && res < 1e-9;
      o.pass = o.pass && ok;
      o.detail += name + fmt(" residual %.1e; ", res);
    }
    return o;
  });

  for (const auto& [n, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures == 0 ? 0 : 1;
}
