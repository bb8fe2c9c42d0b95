#pragma once

#include <span>
#include <string>

#include "mindisp/scenario.hpp"

namespace mindisp {

/// Scenario at its original poses with the trajectory overlaid.
std::string render_before(const Scenario& scenario, const Trajectory& trajectory);

/// Displaced obstacles in cyan over ghosted originals. `poses` is aligned with
/// scenario.obstacles.
std::string render_after(const Scenario& scenario, const Trajectory& trajectory,
                         std::span<const Pose> poses);

}  // namespace mindisp
