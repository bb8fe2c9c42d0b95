#include "mindisp/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mindisp/svg.hpp"

namespace mindisp {

using nlohmann::json;

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    if (used != item.size() || !std::isfinite(v)) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

Eigen::Matrix3d diagonal_from(const std::string& key, const std::string& text) {
  const auto v = parse_numbers(text);
  if (v.size() == 1) return Eigen::Vector3d::Constant(v[0]).asDiagonal();
  if (v.size() == 3) return Eigen::Vector3d(v[0], v[1], v[2]).asDiagonal();
  throw std::invalid_argument(key + " takes one value or three diagonal entries");
}

double scalar_from(const std::string& key, const std::string& text) {
  const auto v = parse_numbers(text);
  if (v.size() != 1) throw std::invalid_argument(key + " takes a single value");
  return v[0];
}

std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? env : "mindisp_out";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::ios_base::failure("failed writing '" + path.string() + "'");
}

// Maps the error families to exit statuses, printing a one-line diagnostic.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const SchemaError& e) {
    err << "error: invalid document: " << e.what() << '\n';
    return exit_code::kInput;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kInput;
  } catch (const json::exception& e) {
    err << "error: invalid document: " << e.what() << '\n';
    return exit_code::kInput;
  } catch (const PlannerError& e) {
    err << "error: planning failed: " << e.what() << '\n';
    return exit_code::kPlanner;
  } catch (const RefinementError& e) {
    err << "error: refinement failed: " << e.what() << '\n';
    return exit_code::kRefinement;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  }
}

struct Source {
  std::string path;
  std::string builtin;
  std::uint64_t seed = kCanonicalSeed;
  std::vector<std::string> weights;
};

void add_source_options(CLI::App* cmd, Source& src) {
  cmd->add_option("scenario", src.path, "Scenario JSON file");
  cmd->add_option("--builtin", src.builtin, "Bundled scenario: ias, l_corridor, rotation_blocks, sofa");
  cmd->add_option("--seed", src.seed, "Seed for the planner warm start and seeded layouts");
  cmd->add_option("--weights", src.weights, "Weight override key=value (M_i, M_i.<id>, M_x, M_g, w_x, w_d)");
}

Scenario load_source(const Source& src) {
  if (src.path.empty() == src.builtin.empty()) {
    throw std::invalid_argument("give exactly one of a scenario path or --builtin");
  }
  Scenario s = src.builtin.empty() ? read_scenario_file(src.path) : builtin(src.builtin, src.seed);
  for (const auto& w : src.weights) apply_weight_override(s, w);
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_plan(const Source& src, const std::string& out_dir, bool svg, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    const Scenario scenario = load_source(src);
    const auto t0 = std::chrono::steady_clock::now();
    const Solution solution = solve(scenario, src.seed);
    const RunReport report = make_report(solution, seconds_since(t0));

    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::ios_base::failure("cannot create '" + dir.string() + "': " + ec.message());
    write_json_file((dir / "solution.json").string(), save_solution(solution));
    write_json_file((dir / "report.json").string(), report_json(report));
    if (svg) {
      const auto poses = displaced_poses(solution);
      write_text(dir / "before.svg", render_before(scenario, solution.plan.trajectory));
      write_text(dir / "after.svg", render_after(scenario, solution.plan.trajectory, poses));
    }
    out << report_text(scenario.name, report);

    const auto issues = validate_solution(solution);
    for (const auto& i : issues) err << "violation: " << i << '\n';
    return issues.empty() ? exit_code::kOk : exit_code::kRefinement;
  });
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    json doc;
    try {
      in >> doc;
    } catch (const json::parse_error& e) {
      throw SchemaError("$", "malformed JSON in '" + path + "': " + e.what());
    }
    const Solution solution = load_solution(doc);
    const auto issues = validate_solution(solution);
    for (const auto& i : issues) out << "violation: " << i << '\n';
    if (!issues.empty()) {
      out << issues.size() << " violation(s)\n";
      return exit_code::kInvalid;
    }
    out << "ok: " << solution.scenario.name << " satisfies start/goal, dynamics, obstacle and robot"
        << " disjointness conditions\n";
    return exit_code::kOk;
  });
}

struct SweepRow {
  double scale = 0.0;
  bool ok = false;
  int status = exit_code::kOk;
  std::string failure;
  RunReport report;
};

int cmd_sweep(const Source& src, const std::string& scales_text, const std::string& out_dir,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto scales = parse_numbers(scales_text);
    if (scales.size() < 2) throw std::invalid_argument("--weight-scale needs at least two factors");
    for (double s : scales) {
      if (s < 0.0) throw std::invalid_argument("weight scales must be non-negative");
    }
    const Scenario base = load_source(src);

    std::vector<std::future<SweepRow>> jobs;
    for (double scale : scales) {
      jobs.push_back(std::async(std::launch::async, [&base, scale, seed = src.seed] {
        SweepRow row;
        row.scale = scale;
        Scenario s = base;
        scale_overlap_weights(s, scale);
        std::ostringstream sink;
        row.status = guarded(sink, [&] {
          const auto t0 = std::chrono::steady_clock::now();
          const Solution sol = solve(s, seed);
          row.report = make_report(sol, seconds_since(t0));
          const auto issues = validate_solution(sol);
          if (!issues.empty()) {
            sink << "infeasible: " << issues.front() << '\n';
            return exit_code::kRefinement;
          }
          return exit_code::kOk;
        });
        row.ok = row.status == exit_code::kOk;
        row.failure = sink.str();
        if (!row.failure.empty() && row.failure.back() == '\n') row.failure.pop_back();
        return row;
      }));
    }
    std::vector<SweepRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());

    out << std::left << std::setw(10) << "scale" << std::setw(12) << "sum_y" << std::setw(12)
        << "sum_d" << std::setw(11) << "displaced" << "C\n";
    json table = json::array();
    int status = exit_code::kOk;
    for (const auto& r : rows) {
      std::ostringstream scale;
      scale << r.scale;
      out << std::setw(10) << scale.str();
      if (r.ok) {
        out << std::fixed << std::setprecision(4) << std::setw(12) << r.report.sum_required
            << std::setw(12) << r.report.sum_displacement << std::setw(11)
            << r.report.displaced_count << r.report.total_cost << '\n'
            << std::defaultfloat;
        json row = report_json(r.report);
        row.erase("wall_time");
        row["scale"] = r.scale;
        table.push_back(row);
      } else {
        out << "FAILED  " << r.failure << '\n';
        table.push_back({{"scale", r.scale}, {"failed", true}, {"status", r.status}, {"error", r.failure}});
        if (status == exit_code::kOk) status = r.status;
      }
    }
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      write_json_file((std::filesystem::path(out_dir) / "sweep.json").string(),
                      {{"scenario", base.name}, {"seed", src.seed}, {"rows", table}});
    }
    return status;
  });
}

}  // namespace

RunReport make_report(const Solution& s, double wall_time) {
  RunReport r;
  r.sum_required = s.summary.sum_required;
  r.sum_displacement = s.summary.sum_displacement;
  r.displaced_count = s.summary.displaced_count;
  r.total_cost = s.summary.total_cost;
  r.wall_time = wall_time;
  r.unconverged_solves = s.plan.unconverged_solves;
  r.converged = r.unconverged_solves == 0;
  r.mixed_units = s.summary.mixed_units;
  return r;
}

json report_json(const RunReport& r) {
  return {{"sum_y", r.sum_required},
          {"sum_d", r.sum_displacement},
          {"displaced_count", r.displaced_count},
          {"C", r.total_cost},
          {"wall_time", r.wall_time},
          {"converged", r.converged},
          {"unconverged_solves", r.unconverged_solves},
          {"mixed_units", r.mixed_units}};
}

std::string report_text(const std::string& name, const RunReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << name << '\n'
     << "  planning displacement  sum y = " << r.sum_required << '\n'
     << "  final displacement     sum d = " << r.sum_displacement
     << (r.mixed_units ? "  (meters and radians mixed)" : "") << '\n'
     << "  obstacles displaced    " << r.displaced_count << '\n'
     << "  total cost             C = " << r.total_cost << '\n'
     << std::setprecision(2) << "  wall time              " << r.wall_time << " s\n"
     << "  horizon solves         "
     << (r.converged ? std::string("all converged")
                     : std::to_string(r.unconverged_solves) + " stopped at the iteration cap")
     << '\n';
  return os.str();
}

void apply_weight_override(Scenario& s, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("weight override must look like key=value: '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  if (key == "M_x") {
    s.weights.M_x = diagonal_from(key, value);
  } else if (key == "M_g") {
    s.weights.M_g = diagonal_from(key, value);
  } else if (key == "w_x") {
    s.weights.w_x = scalar_from(key, value);
  } else if (key == "w_d") {
    s.weights.w_d = scalar_from(key, value);
  } else if (key == "M_i") {
    const double w = scalar_from(key, value);
    for (auto& o : s.obstacles) {
      if (o.movable()) o.weight = w;
    }
  } else if (key.rfind("M_i.", 0) == 0) {
    const std::string id = key.substr(4);
    auto it = std::find_if(s.obstacles.begin(), s.obstacles.end(),
                           [&](const Obstacle& o) { return o.id == id; });
    if (it == s.obstacles.end()) throw std::invalid_argument("no obstacle '" + id + "'");
    it->weight = scalar_from(key, value);
  } else {
    throw std::invalid_argument("unknown weight '" + key + "'");
  }
  try {
    s.check();
  } catch (const SchemaError& e) {
    throw std::invalid_argument("weight override '" + assignment + "' rejected: " + e.what());
  }
}

void scale_overlap_weights(Scenario& s, double factor) {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("weight scale must be finite and non-negative");
  }
  for (auto& o : s.obstacles) {
    if (o.movable()) o.weight *= factor;
  }
}

std::vector<std::string> validate_solution(const Solution& s) {
  const auto poses = displaced_poses(s);
  FeasibilityQuery q;
  q.robot = &s.scenario.robot;
  q.start = s.scenario.start;
  q.goal = s.scenario.goal;
  q.goal_tolerance = s.scenario.planner.goal_tolerance;
  q.trajectory = &s.plan.trajectory;
  q.controls = s.plan.controls;
  q.obstacles = s.scenario.obstacles;
  q.poses = poses;
  q.substeps = 10 * s.scenario.planner.time_substeps;
  const FeasibilityReport report = check_feasibility(q);

  std::vector<std::string> issues;
  for (const auto& i : report.endpoint_issues) issues.push_back("endpoint/dynamics: " + i);
  for (const auto& i : report.obstacle_issues) issues.push_back("obstacle-obstacle: " + i);
  for (const auto& i : report.robot_issues) issues.push_back("robot-obstacle: " + i);

  const double delta = s.scenario.refinement.delta;
  for (const auto& o : s.scenario.obstacles) {
    const auto it = s.refinement.displacements.find(o.id);
    if (it == s.refinement.displacements.end()) continue;
    const DisplacementSpec& d = it->second;
    std::ostringstream os;
    os.precision(9);
    if (!o.movable()) {
      os << "displacement: fixed obstacle '" << o.id << "' has a displacement entry";
    } else if (d.mode != o.mobility) {
      os << "displacement: '" << o.id << "' moved in mode " << to_string(d.mode)
         << " but its mobility is " << to_string(o.mobility);
    } else {
      const auto rq = s.plan.required.find(o.id);
      const double y = rq == s.plan.required.end() ? 0.0 : rq->second.magnitude;
      const double steps = (d.magnitude - y) / delta;
      const double realized = d.mode == Mobility::kTranslate
                                  ? (d.realized_pose.position() - o.pose.position()).norm()
                                  : std::abs(normalize_angle(d.realized_pose.theta - o.pose.theta));
      const double expected = d.mode == Mobility::kTranslate
                                  ? d.magnitude
                                  : std::abs(normalize_angle(d.magnitude));
      const bool moved_wrong_way = d.mode == Mobility::kTranslate
                                       ? std::abs(normalize_angle(d.realized_pose.theta - o.pose.theta)) > 1e-9
                                       : (d.realized_pose.position() - o.pose.position()).norm() > 1e-9;
      if (d.magnitude < y - 1e-12) {
        os << "displacement: '" << o.id << "' d = " << d.magnitude << " below required y = " << y;
      } else if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, std::abs(steps))) {
        os << "displacement: '" << o.id << "' (d - y) / delta = " << steps << " is not an integer";
      } else if (std::abs(realized - expected) > 1e-9) {
        os << "displacement: '" << o.id << "' pose moved by " << realized << " but d = " << d.magnitude;
      } else if (moved_wrong_way) {
        os << "displacement: '" << o.id << "' pose change is not a pure " << to_string(d.mode);
      }
    }
    if (!os.str().empty()) issues.push_back(os.str());
  }
  return issues;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum-displacement motion planning among movable obstacles"};
  app.require_subcommand(1);

  Source plan_src;
  std::string plan_out = default_out_dir();
  bool svg = false;
  auto* plan = app.add_subcommand("plan", "Plan and refine a scenario, writing solution and report");
  add_source_options(plan, plan_src);
  plan->add_option("--out", plan_out, "Output directory (default $" + std::string(kOutDirEnv) + " or ./mindisp_out)");
  plan->add_flag("--svg", svg, "Also write before.svg and after.svg");

  std::string solution_path;
  auto* validate = app.add_subcommand("validate", "Check a solution document for feasibility");
  validate->add_option("solution", solution_path, "Solution JSON file")->required();

  Source sweep_src;
  std::string scales;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Compare runs under scaled overlap weights");
  add_source_options(sweep, sweep_src);
  sweep->add_option("--weight-scale", scales, "Comma-separated factors applied to every M_i")->required();
  sweep->add_option("--out", sweep_out, "Write sweep.json into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return exit_code::kUsage;
  }

  if (plan->parsed()) return cmd_plan(plan_src, plan_out, svg, out, err);
  if (validate->parsed()) return cmd_validate(solution_path, out, err);
  return cmd_sweep(sweep_src, scales, sweep_out, out, err);
}

}  // namespace mindisp
