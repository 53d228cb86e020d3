#pragma once

#include "sid/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sid {

enum class MapFamily { Basic, Dense, Room, Shelf };

MapFamily parse_family(const std::string& name);  // throws SidError on bad name
std::string family_name(MapFamily family);

// Optional knobs for out-of-benchmark stress maps; defaults reproduce the
// standard families on a 2x2 map.
struct GenerateOptions {
    double map_size = 2.0;           // square bounds, centered at origin
    double robot_radius = 0.03;
    int obstacle_count = -1;         // -1: family default (10 basic / 20 dense)
    double obstacle_size_min = 0.1;  // circle diameter or square side
    double obstacle_size_max = 0.2;
    int max_attempts = 10000;        // per start/goal rejection budget
    double v_max = 0.05;             // used by the reachability screen
    int reach_steps = 256;           // BFS budget for the reachability screen
    // Extra pairwise spacing beyond the 2r invariant, applied between all
    // start and goal placements (including start-goal cross pairs).
    double placement_slack = 0.02;
};

// One benchmark problem: map plus matched start/goal lists.
struct ScenarioInstance {
    MapFamily family = MapFamily::Basic;
    std::uint64_t seed = 0;
    WorldMap map;
    std::vector<Vec2> starts;
    std::vector<Vec2> goals;
    double robot_radius = 0.03;

    int n_robots() const { return static_cast<int>(starts.size()); }
    void validate() const;  // throws SidError on any invariant break
};

// Seeded, deterministic generation. Starts/goals are rejection-sampled for
// clearance >= robot_radius, pairwise separation >= 2*robot_radius, and a
// lattice reachability screen from start to goal.
// Throws PlacementFailure when the rejection budget is exhausted.
ScenarioInstance generate_instance(MapFamily family, int n_robots, std::uint64_t seed,
                                   const GenerateOptions& opt = {});

// What robot i senses this round: neighbors within range plus the
// obstacles intersecting the sensing disk.
struct Observation {
    int self = 0;
    Vec2 position = Vec2::Zero();
    double range = 0.0;
    std::vector<int> neighbor_ids;          // ascending
    std::vector<Vec2> neighbor_positions;   // parallel to neighbor_ids
    std::vector<int> visible_obstacles;     // indices into map.obstacles
};

Observation observe(const ScenarioInstance& instance, const std::vector<Vec2>& positions,
                    int i, double range);

// Scenario JSON (lossless round-trip); schema documented in
// docs/scenario_schema.md.
std::string scenario_to_json(const ScenarioInstance& instance);
ScenarioInstance scenario_from_json(const std::string& text);
void save_scenario(const std::string& path, const ScenarioInstance& instance);
ScenarioInstance load_scenario(const std::string& path);

}  // namespace sid
