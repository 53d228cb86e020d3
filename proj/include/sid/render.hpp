#pragma once

#include "sid/scenario.hpp"
#include "sid/trajectory.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace sid {

// SVG drawing of a scenario: obstacles, start/goal markers, and executed
// trajectories color-coded per robot. Pass an empty trajectory list to
// render the bare scenario.
void render_svg(std::ostream& os, const ScenarioInstance& instance,
                const std::vector<Trajectory>& executed);

void save_svg(const std::string& path, const ScenarioInstance& instance,
              const std::vector<Trajectory>& executed);

}  // namespace sid
