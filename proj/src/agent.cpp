#include "sid/agent.hpp"

#include "sid/errors.hpp"
#include "sid/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sid {

namespace {

// Re-indexes a stored previous-round trajectory into this round's frame:
// k executed steps have passed, so step h now corresponds to stored step
// h + k (tail-padded).
Trajectory shift_reference(const Trajectory& traj, int k) {
    const int H = traj.horizon();
    std::vector<Vec2> pts(static_cast<size_t>(H) + 1);
    for (int h = 0; h <= H; ++h) pts[static_cast<size_t>(h)] = traj.at(std::min(h + k, H));
    return Trajectory(std::move(pts));
}

Conditioning make_conditioning(const AgentContext& ctx, const Vec2& start, const Vec2& goal) {
    Conditioning cond;
    cond.start = start;
    cond.goal = goal;
    cond.map_patch = ctx.map_patch;
    return cond;
}

}  // namespace

ReferenceSet simulate_neighbors(AgentState& agent, const Observation& obs,
                                const AgentContext& ctx, int round) {
    ReferenceSet sims;
    const bool have_stored = agent.stored_round == round - 1 && round > 0;
    const double ref_radius = ctx.radius + 0.5 * ctx.separation_margin;

    for (size_t n = 0; n < obs.neighbor_ids.size(); ++n) {
        const int j = obs.neighbor_ids[n];
        const Vec2 pos_j = obs.neighbor_positions[n];
        const Vec2 goal_j = ctx.goals[static_cast<size_t>(j)];

        if ((pos_j - goal_j).norm() <= ctx.arrival_tol) {
            // Parked at its goal; no sampling needed.
            sims.insert(j, parked(pos_j, ctx.horizon), ref_radius);
            continue;
        }

        ReferenceSet refs;
        if (have_stored) {
            for (const auto& [l, traj] : agent.stored_neighbor_sims.trajectories) {
                if (l == j) continue;
                // Only neighbors still observed this round stay relevant.
                if (std::find(obs.neighbor_ids.begin(), obs.neighbor_ids.end(), l) ==
                    obs.neighbor_ids.end()) {
                    continue;
                }
                refs.insert(l, shift_reference(traj, ctx.exec_window),
                            agent.stored_neighbor_sims.radii.at(l));
            }
        }

        // Simulation runs the full planning procedure for j (arrival step,
        // goal holding, projection) under the shared seed convention: the
        // stream for simulating robot j is the one j itself plans with this
        // round, so simulated and actual trajectories differ only through
        // their reference sets. Non-converged sims are kept best-effort.
        AgentState ghost;
        ghost.id = j;
        ghost.position = pos_j;
        ghost.goal = goal_j;
        const std::uint64_t seed = mix64(ctx.run_seed, static_cast<std::uint64_t>(round),
                                         static_cast<std::uint64_t>(j), seed_channel::kOwnPlan);
        PlanOutcome out = plan_with_references(ghost, refs, ctx, seed);
        sims.insert(j, std::move(out.best), ref_radius);
    }

    agent.stored_neighbor_sims = sims;
    agent.stored_round = round;
    return sims;
}

int conservative_arrival(const Vec2& position, const Vec2& goal, const ReferenceSet& refs,
                         const AgentContext& ctx) {
    const int H = ctx.horizon;
    int a = H;
    try {
        const double planning_radius = ctx.radius + 0.5 * ctx.separation_margin;
        SpaceTimeGrid grid =
            SpaceTimeGrid::build(*ctx.map, planning_radius, ctx.v_max, H, refs, ctx.grid_cell);
        if (auto res = earliest_arrival(grid, position, goal)) a = std::min(*res, H);
    } catch (const SnapFailure&) {
        a = H;  // fall back to a final-step pin; comm handles persistent failure
    }
    const double dist = (position - goal).norm();
    const int lower = static_cast<int>(std::ceil(dist / ctx.v_max - 1e-9));
    a = std::max(a, lower);
    a = std::min(a, H);

    // Holding at the goal from step a requires the goal to stay clear of
    // every reference from a onward; push a past any late crossings.
    const double ref_radius = ctx.radius + 0.5 * ctx.separation_margin;
    for (const auto& [id, traj] : refs.trajectories) {
        const double need = ref_radius + refs.radii.at(id);
        for (int h = H; h >= a; --h) {
            if ((traj.at(h) - goal).norm() < need) {
                a = std::min(h + 1, H);
                break;
            }
        }
    }
    return a;
}

PlanOutcome plan_with_references(AgentState& agent, const ReferenceSet& refs,
                                 const AgentContext& ctx, std::uint64_t sample_seed,
                                 int forced_arrival) {
    const int H = ctx.horizon;
    const double ref_radius = ctx.radius + 0.5 * ctx.separation_margin;
    ConstraintStack stack = build_plan_stack(*ctx.map, agent.id, refs, ref_radius, ctx.v_max,
                                             agent.position, H);

    int a = forced_arrival >= 0 ? forced_arrival
                                : conservative_arrival(agent.position, agent.goal, refs, ctx);
    const double dist = (agent.position - agent.goal).norm();
    PlanOutcome outcome;
    if (dist <= ctx.v_max * H) {
        a = std::max(a, 1);  // a start pin plus a step-0 goal pin would conflict
        add_goal_hold(stack, agent.goal, a);
        outcome.arrival_step = a;
    } else {
        // Goal not reachable within one horizon (oversized maps): plan
        // without holding pins and let later rounds close the distance.
        outcome.arrival_step = H;
    }

    SamplerConfig cfg = ctx.sampler;
    cfg.seed = sample_seed;
    auto [traj, converged] =
        sample_constrained(*ctx.model, make_conditioning(ctx, agent.position, agent.goal),
                           stack, cfg);

    const FlatTraj flat = flatten(traj);
    ResidualTag worst;
    outcome.violation = stack.free_violation(flat, worst);
    if (converged) {
        outcome.trajectory = traj;
    } else {
        outcome.blocking_kind = worst.kind;
        outcome.bottleneck_candidates =
            stack.violating_reference_ids(flat, ctx.sampler.projection.tol);
    }
    outcome.best = std::move(traj);
    return outcome;
}

PlanOutcome plan_own(AgentState& agent, const Observation& obs, const ReferenceSet& sims,
                     const AgentContext& ctx, int round) {
    (void)obs;
    const std::uint64_t seed =
        mix64(ctx.run_seed, static_cast<std::uint64_t>(round),
              static_cast<std::uint64_t>(agent.id), seed_channel::kOwnPlan);
    return plan_with_references(agent, sims, ctx, seed);
}

std::vector<Vec2> execute(AgentState& agent, int k, double arrival_tol) {
    if (!agent.has_plan) throw NoPlan("execute: agent has no current plan");
    std::vector<Vec2> walked;
    walked.reserve(static_cast<size_t>(k));
    const int H = agent.current_plan.horizon();
    for (int s = 0; s < k; ++s) {
        const int idx = std::min(agent.steps_executed_in_plan + 1, H);
        agent.position = agent.current_plan.at(idx);
        agent.steps_executed_in_plan = idx;
        walked.push_back(agent.position);
    }
    agent.arrived = (agent.position - agent.goal).norm() <= arrival_tol;
    return walked;
}

}  // namespace sid
