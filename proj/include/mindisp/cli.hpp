#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mindisp/scenario.hpp"

namespace mindisp {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInvalid = 1;  // validate: solution violates a feasibility condition
inline constexpr int kUsage = 2;
inline constexpr int kInput = 3;    // I/O or schema
inline constexpr int kPlanner = 4;
inline constexpr int kRefinement = 5;
}  // namespace exit_code

/// Environment variable naming the default output directory of `plan`.
inline constexpr const char* kOutDirEnv = "MINDISP_OUT_DIR";

struct RunReport {
  double sum_required = 0.0;
  double sum_displacement = 0.0;
  int displaced_count = 0;
  double total_cost = 0.0;
  double wall_time = 0.0;
  bool converged = false;  // every horizon solve met its stationarity tolerance
  int unconverged_solves = 0;
  bool mixed_units = false;
};

RunReport make_report(const Solution& s, double wall_time);
nlohmann::json report_json(const RunReport& r);
std::string report_text(const std::string& name, const RunReport& r);

/// Applies one `key=value` weight override. Keys: M_i (every movable obstacle),
/// M_i.<id>, M_x, M_g (one value or three diagonal entries), w_x, w_d.
/// Throws std::invalid_argument on an unknown key or malformed value.
void apply_weight_override(Scenario& s, const std::string& assignment);

/// Multiplies every movable obstacle's overlap weight.
void scale_overlap_weights(Scenario& s, double factor);

/// Feasibility of a stored solution plus the displacement bookkeeping (d >= y, integral
/// increments, displacement magnitudes match poses). One line per violation.
std::vector<std::string> validate_solution(const Solution& s);

/// Entry point of the command-line tool. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mindisp
