#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mindisp/cli.hpp"
#include "support.hpp"

using namespace mindisp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mindisp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mindisp_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void write(const fs::path& p, const json& doc) { std::ofstream(p) << doc.dump(2); }

}  // namespace

TEST_CASE("plan writes the solution, report and figures") {
  const auto dir = scratch("plan");
  const auto r = run({"plan", "--builtin", "l_corridor", "--svg", "--out", dir.string()});
  CHECK(r.status == exit_code::kOk);
  CHECK(r.err.empty());
  for (const char* f : {"solution.json", "report.json", "before.svg", "after.svg"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }
  const json report = read_json(dir / "report.json");
  for (const char* k : {"sum_y", "sum_d", "displaced_count", "C", "wall_time", "converged"}) {
    CHECK(report.contains(k));
  }
  CHECK(report["sum_d"].get<double>() >= report["sum_y"].get<double>());
  CHECK(r.out.find("sum d =") != std::string::npos);
  CHECK(slurp(dir / "after.svg").rfind("<svg", 0) == 0);
  CHECK(run({"validate", (dir / "solution.json").string()}).status == exit_code::kOk);
}

TEST_CASE("plan output is byte-identical across runs") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(run({"plan", "--builtin", "sofa", "--svg", "--out", a.string()}).status == 0);
  REQUIRE(run({"plan", "--builtin", "sofa", "--svg", "--out", b.string()}).status == 0);
  CHECK(slurp(a / "solution.json") == slurp(b / "solution.json"));
  CHECK(slurp(a / "before.svg") == slurp(b / "before.svg"));
  CHECK(slurp(a / "after.svg") == slurp(b / "after.svg"));
}

TEST_CASE("plan reads a scenario file and honours the output directory variable") {
  const auto dir = scratch("file");
  write(dir / "s.json", save_scenario(builtin("rotation_blocks")));
  const auto out = dir / "env_out";
  setenv(kOutDirEnv, out.string().c_str(), 1);
  const auto r = run({"plan", (dir / "s.json").string()});
  unsetenv(kOutDirEnv);
  CHECK(r.status == exit_code::kOk);
  CHECK(fs::exists(out / "solution.json"));
}

TEST_CASE("input errors") {
  const auto missing = run({"plan", "/nonexistent/mindisp/scene.json"});
  CHECK(missing.status == exit_code::kInput);
  CHECK(missing.err.find("/nonexistent/mindisp/scene.json") != std::string::npos);

  const auto dir = scratch("bad");
  json doc = save_scenario(builtin("sofa"));
  doc["obstacles"][0]["mobility"] = "levitate";
  write(dir / "bad.json", doc);
  const auto bad = run({"plan", (dir / "bad.json").string(), "--out", dir.string()});
  CHECK(bad.status == exit_code::kInput);
  CHECK(bad.err.find("mobility") != std::string::npos);

  CHECK(run({"validate", "/nonexistent/solution.json"}).status == exit_code::kInput);
}

TEST_CASE("usage errors") {
  CHECK(run({}).status == exit_code::kUsage);
  CHECK(run({"fly"}).status == exit_code::kUsage);
  CHECK(run({"plan"}).status == exit_code::kUsage);
  CHECK(run({"plan", "--builtin", "nowhere"}).status == exit_code::kUsage);
  CHECK(run({"plan", "--builtin", "sofa", "--weights", "M_q=3"}).status == exit_code::kUsage);
  CHECK(run({"plan", "--builtin", "sofa", "--weights", "w_x=abc"}).status == exit_code::kUsage);
  CHECK(run({"sweep", "--builtin", "sofa", "--weight-scale", "1"}).status == exit_code::kUsage);
  CHECK(run({"sweep", "--builtin", "sofa", "--weight-scale", "1,-2"}).status == exit_code::kUsage);
}

TEST_CASE("validate catches tampered solutions") {
  const auto dir = scratch("tamper");
  REQUIRE(run({"plan", "--builtin", "l_corridor", "--out", dir.string()}).status == 0);
  const json good = read_json(dir / "solution.json");

  SUBCASE("obstacle dragged onto the path") {
    json doc = good;
    const auto& mid = doc["trajectory"][doc["trajectory"].size() / 2];
    for (auto& d : doc["displacements"]) {
      d["pose"]["x"] = mid["x"];
      d["pose"]["y"] = mid["y"];
      break;
    }
    write(dir / "moved.json", doc);
    const auto r = run({"validate", (dir / "moved.json").string()});
    CHECK(r.status == exit_code::kInvalid);
    CHECK(r.out.find("violation") != std::string::npos);
  }

  SUBCASE("trajectory cut short") {
    json doc = good;
    doc["trajectory"].erase(doc["trajectory"].size() - 1);
    write(dir / "short.json", doc);
    const auto r = run({"validate", (dir / "short.json").string()});
    CHECK(r.status == exit_code::kInvalid);
  }

  SUBCASE("state nudged off the dynamics") {
    json doc = good;
    doc["trajectory"][5]["x"] = doc["trajectory"][5]["x"].get<double>() + 1e-4;
    write(dir / "nudged.json", doc);
    CHECK(run({"validate", (dir / "nudged.json").string()}).status == exit_code::kInvalid);
  }

  SUBCASE("displacement below the required amount") {
    json doc = good;
    bool changed = false;
    for (auto& d : doc["displacements"]) {
      if (d["magnitude"].get<double>() > 0.05) {
        d["magnitude"] = 0.0;
        changed = true;
        break;
      }
    }
    REQUIRE(changed);
    write(dir / "short_d.json", doc);
    CHECK(run({"validate", (dir / "short_d.json").string()}).status == exit_code::kInvalid);
  }
}

TEST_CASE("sweep reports one row per scale") {
  const auto dir = scratch("sweep");
  const auto r = run({"sweep", "--builtin", "l_corridor", "--weight-scale", "1,10", "--out", dir.string()});
  CHECK(r.status == exit_code::kOk);
  const json doc = read_json(dir / "sweep.json");
  REQUIRE(doc["rows"].size() == 2);
  CHECK(doc["rows"][0]["scale"].get<double>() == 1.0);
  CHECK(doc["rows"][1]["scale"].get<double>() == 10.0);
  // the unscaled row agrees with a plain plan
  const auto plan_dir = scratch("sweep_plan");
  REQUIRE(run({"plan", "--builtin", "l_corridor", "--out", plan_dir.string()}).status == 0);
  const json report = read_json(plan_dir / "report.json");
  CHECK(doc["rows"][0]["sum_d"].get<double>() == report["sum_d"].get<double>());
}

TEST_CASE("sweep with the penalty switched off still ends feasible") {
  const auto dir = scratch("sweep_zero");
  const auto r = run({"sweep", "--builtin", "sofa", "--weight-scale", "0,1", "--out", dir.string()});
  CHECK(r.status == exit_code::kOk);
  const json doc = read_json(dir / "sweep.json");
  REQUIRE(doc["rows"].size() == 2);
  for (const auto& row : doc["rows"]) {
    CHECK_FALSE(row.contains("failed"));
    CHECK(row["sum_d"].get<double>() >= row["sum_y"].get<double>());
  }
  // with no overlap penalty the planner cuts deeper through the furniture
  CHECK(doc["rows"][0]["sum_y"].get<double>() > doc["rows"][1]["sum_y"].get<double>());
}

TEST_CASE("report fields are recomputable from the solution document") {
  const auto dir = scratch("recompute");
  REQUIRE(run({"plan", "--builtin", "rotation_blocks", "--out", dir.string()}).status == 0);
  const json sol = read_json(dir / "solution.json");
  const json report = read_json(dir / "report.json");
  double sum_y = 0.0, sum_d = 0.0;
  int count = 0;
  for (const auto& r : sol["required"]) sum_y += r["magnitude"].get<double>();
  for (const auto& d : sol["displacements"]) {
    sum_d += d["magnitude"].get<double>();
    count += d["magnitude"].get<double>() > 0 ? 1 : 0;
  }
  CHECK(report["sum_y"].get<double>() == doctest::Approx(sum_y));
  CHECK(report["sum_d"].get<double>() == doctest::Approx(sum_d));
  CHECK(report["displaced_count"].get<int>() == count);
  double planning = sol["terminal_cost"].get<double>();
  for (const auto& c : sol["stage_costs"]) planning += c.get<double>();
  CHECK(report["C"].get<double>() == doctest::Approx(planning + sum_d - sum_y));
}

TEST_CASE("weight overrides") {
  Scenario s = builtin("sofa");
  apply_weight_override(s, "M_i=3");
  for (const auto& o : s.obstacles) {
    if (o.movable()) CHECK(o.weight == 3.0);
  }
  apply_weight_override(s, "M_i.sofa2=7.5");
  for (const auto& o : s.obstacles) {
    if (o.id == "sofa2") CHECK(o.weight == 7.5);
  }
  apply_weight_override(s, "M_g=1,2,3");
  CHECK(s.weights.M_g(2, 2) == 3.0);
  apply_weight_override(s, "w_d=0.5");
  CHECK(s.weights.w_d == 0.5);
  CHECK_THROWS_AS(apply_weight_override(s, "M_i.nobody=1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_weight_override(s, "M_g=0"), std::invalid_argument);
  CHECK_THROWS_AS(apply_weight_override(s, "w_x"), std::invalid_argument);

  scale_overlap_weights(s, 2.0);
  for (const auto& o : s.obstacles) {
    if (o.id == "sofa2") CHECK(o.weight == 15.0);
  }
}

TEST_CASE("installed binary reports exit codes to the shell") {
  const char* bin = std::getenv("MINDISP_BIN");
  if (bin == nullptr) return;
  const std::string b = bin;
  CHECK(std::system((b + " --help > /dev/null").c_str()) == 0);
  const int missing = std::system((b + " validate /nonexistent/x.json 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(missing) == exit_code::kInput);
}

TEST_CASE("shipped scenario files match the builtins") {
  const char* src = std::getenv("MINDISP_SOURCE_DIR");
  if (src == nullptr) return;
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    CHECK(read_scenario_file((fs::path(src) / "scenarios" / (name + ".json")).string()) == builtin(name));
  }
}
