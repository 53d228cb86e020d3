#pragma once

#include "sid/constraints.hpp"
#include "sid/geometry.hpp"
#include "sid/trajectory.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace sid {

// Discretized local planning problem: a node lattice over the map with
// time-indexed blocking from inflated obstacles and reference
// trajectories. Node (ix, iy) sits at origin + (ix, iy) * cell.
struct SpaceTimeGrid {
    Vec2 origin = Vec2(-1.0, -1.0);
    double cell = 0.05;
    int nx = 40;  // node indices run 0..nx
    int ny = 40;
    int horizon = 64;
    bool allow_diagonals = false;  // legal only when cell*sqrt(2) <= v_max

    // blocked(ix, iy, step); step-independent blocking repeats the last
    // reference position beyond its horizon.
    std::function<bool(int, int, int)> blocked;
    // Obstacle-only blocking; goal snapping ignores reference traffic so a
    // parked reference on the goal reads as unreachable, not a snap error.
    std::function<bool(int, int)> static_blocked;
    // Swap conflicts: moving from -> to over [step, step+1] while a
    // reference moves to -> from.
    std::function<bool(int, int, int, int, int)> edge_blocked;

    Vec2 node(int ix, int iy) const { return origin + Vec2(ix * cell, iy * cell); }

    // Production grid: obstacle inflation by the robot radius, reference
    // inflation by summed radii, cell-level swap conflicts.
    static SpaceTimeGrid build(const WorldMap& map, double radius, double v_max, int horizon,
                               const ReferenceSet& refs, double cell = 0.0);

    // Test grid over an abstract lattice with caller-supplied blocking.
    static SpaceTimeGrid synthetic(int nx, int ny, int horizon,
                                   std::function<bool(int, int, int)> blocked);
};

struct LatticeStep {
    int ix = 0;
    int iy = 0;
    int step = 0;
};

struct ArrivalResult {
    int arrival = 0;
    std::vector<LatticeStep> path;  // start at step 0 through arrival
};

// Space-time A* over (node, step) with moves {wait, 4-neighbors,
// diagonals when admissible}, unit time cost, heuristic
// ceil(euclidean / move_length). Returns the earliest step at the goal
// node within the horizon, or nullopt when unreachable. Throws
// SnapFailure when start (at step 0) or goal (statically) cannot snap to
// an unblocked node.
std::optional<ArrivalResult> earliest_arrival_path(const SpaceTimeGrid& grid, const Vec2& start,
                                                   const Vec2& goal);
std::optional<int> earliest_arrival(const SpaceTimeGrid& grid, const Vec2& start,
                                    const Vec2& goal);

// Lattice path -> H+1 waypoints, padded at the final position. Throws
// NonMonotonePath when steps are not consecutive or cells not adjacent.
Trajectory lattice_to_trajectory(const SpaceTimeGrid& grid, const std::vector<LatticeStep>& path,
                                 int horizon);

}  // namespace sid
