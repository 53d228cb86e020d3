#pragma once

#include "sid/scenario.hpp"
#include "sid/training.hpp"

#include <cstdint>
#include <vector>

namespace sid {

struct ExpertOptions {
    int horizon = 64;
    double v_max = 0.05;
    int shortcut_attempts = 200;
    std::uint64_t seed = 0;
};

// Single-robot demonstrations: space-time A* on each instance's map for
// randomized start/goal pairs, lattice paths converted to H+1 waypoints
// and shortcut-smoothed while preserving single-robot feasibility.
Dataset expert_dataset(const std::vector<ScenarioInstance>& instances, int per_instance,
                       const ExpertOptions& opt = {});

}  // namespace sid
