#pragma once

#include "sid/agent.hpp"
#include "sid/comm.hpp"
#include "sid/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sid {

struct RunConfig {
    ScenarioInstance instance;
    const ScoreModel* model = nullptr;
    int k = 8;        // execution window, 1 <= k < H
    int horizon = 64;
    double v_max = 0.05;
    double obs_range = 0.0;    // 0 -> 0.5 * map size
    int max_rounds = 0;        // 0 -> H / k
    double arrival_tol = 0.0;  // 0 -> robot_radius
    // Planning-side radius inflation. Plans are only feasible up to the
    // projection tolerance, and neighbors never follow their simulated
    // references exactly; the margin absorbs both so executed paths pass
    // the exact-radius audit.
    double separation_margin = 0.004;
    std::uint64_t seed = 0;
    SamplerConfig sampler;
    bool parallel_agents = false;

    void validate() const;
};

struct CollisionViolation {
    double time = 0.0;  // step index; fractional at interpolated sub-steps
    int id_a = -1;
    int id_b = -1;  // -1 = obstacle/bounds
    double depth = 0.0;
};

struct RoundTrace {
    int round = 0;
    int id = 0;
    std::vector<int> neighbors;
    int arrival_step = 0;
    bool converged = false;
    double violation = 0.0;
    int comm_events = 0;
};

struct InstanceReport {
    bool success = false;
    std::vector<std::optional<int>> arrivals;  // per robot, executed steps
    std::vector<double> smoothness_values;     // per robot, raw units
    int comm_events = 0;
    std::vector<Message> messages;
    std::vector<Trajectory> executed;
    std::vector<CollisionViolation> violations;
    std::string failure_cause = "none";  // collision | not-arrived | episode-failure
    std::vector<RoundTrace> traces;
    std::vector<BottleneckEpisode> episodes;
    int rounds_run = 0;
};

// Synchronized receding-horizon execution of one instance: per round all
// agents observe a frozen position snapshot, simulate, and plan; episodes
// resolve infeasibilities; commits execute k steps. Deterministic per seed.
InstanceReport run_instance(const RunConfig& config);

// Checks executed trajectories at every waypoint and at 4 interpolated
// sub-steps per segment. Waypoints must satisfy the exact clearances;
// sub-steps are checked against the analytic worst-case dip of linear
// interpolation between feasible waypoints (see collision_audit notes in
// the implementation).
std::vector<CollisionViolation> collision_audit(const std::vector<Trajectory>& executed,
                                                const WorldMap& map,
                                                const std::vector<double>& radii, double v_max,
                                                double tol = 1e-6);

struct BenchmarkCell {
    int total = 0;
    int successes = 0;
    double success_rate = 0.0;            // S, percent
    double comm_frequency = 0.0;          // C, mean over all instances
    std::optional<double> smoothness;     // A, 1e-2 units, successes only
    std::optional<double> travel_time;    // T, successes only
};

BenchmarkCell aggregate_metrics(const std::vector<InstanceReport>& reports);

std::string report_to_json(const InstanceReport& report);

}  // namespace sid
