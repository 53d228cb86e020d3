#pragma once

#include "sid/arrival.hpp"
#include "sid/constraints.hpp"
#include "sid/sampler.hpp"
#include "sid/scenario.hpp"
#include "sid/score_model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sid {

// Everything an agent may read besides its own state and observation:
// the static map, the shared model, the global task specification
// (goals are task knowledge, not communicated state), and run constants.
struct AgentContext {
    const WorldMap* map = nullptr;
    const ScoreModel* model = nullptr;
    std::vector<Vec2> goals;
    double radius = 0.03;
    double v_max = 0.05;
    int horizon = 64;
    double arrival_tol = 0.03;
    int exec_window = 8;  // k
    double grid_cell = 0.0;  // 0 -> v_max
    // Extra inflation applied to separation residuals while planning;
    // execution-time audits still use the bare radii.
    double separation_margin = 0.0;
    Eigen::VectorXd map_patch;
    SamplerConfig sampler;
    std::uint64_t run_seed = 0;
};

struct AgentState {
    int id = 0;
    Vec2 position = Vec2::Zero();
    Vec2 goal = Vec2::Zero();
    Trajectory current_plan;
    int steps_executed_in_plan = 0;
    bool has_plan = false;
    bool arrived = false;
    ReferenceSet stored_neighbor_sims;  // previous round's simulated refs
    int stored_round = -1;
};

struct PlanOutcome {
    std::optional<Trajectory> trajectory;  // set only when feasible
    Trajectory best;                       // best-effort iterate, always set
    std::vector<int> bottleneck_candidates;  // separation violators (robot ids)
    ResidualKind blocking_kind = ResidualKind::Obstacle;
    double violation = 0.0;
    int arrival_step = 0;

    bool feasible() const { return trajectory.has_value(); }
};

// Seed channels keep every sampler call in a run on its own stream.
namespace seed_channel {
constexpr std::uint64_t kOwnPlan = 0;
constexpr std::uint64_t kSimulate = 1000;
constexpr std::uint64_t kEpisode = 2000;
}  // namespace seed_channel

// Simulates each observed neighbor with the shared model under its
// Eq.-8-shaped constraint set (other neighbors' stored previous-round
// sims as fixed references). Neighbors within arrival tolerance of their
// goals are parked without sampling. Updates agent.stored_neighbor_sims.
ReferenceSet simulate_neighbors(AgentState& agent, const Observation& obs,
                                const AgentContext& ctx, int round);

// Conservative arrival step for the goal-holding pins: space-time A*
// against the given references, clamped below by ceil(dist/v_max).
// Returns horizon when the lattice search fails.
int conservative_arrival(const Vec2& position, const Vec2& goal, const ReferenceSet& refs,
                         const AgentContext& ctx);

// Builds the plan stack against this round's sims, adds goal-holding pins
// at the conservative arrival step, and samples a constrained trajectory.
PlanOutcome plan_own(AgentState& agent, const Observation& obs, const ReferenceSet& sims,
                     const AgentContext& ctx, int round);

// Identical machinery with explicit reference control; used by the
// communication fallback (episode members removed, communicated
// trajectories added). forced_arrival >= 0 overrides the lattice step.
PlanOutcome plan_with_references(AgentState& agent, const ReferenceSet& refs,
                                 const AgentContext& ctx, std::uint64_t sample_seed,
                                 int forced_arrival = -1);

// Advances the agent k waypoints along its plan; returns the newly
// occupied positions (exactly k of them). Throws NoPlan.
std::vector<Vec2> execute(AgentState& agent, int k, double arrival_tol);

}  // namespace sid
