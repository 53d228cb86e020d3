#include "sid/comm.hpp"

#include "sid/errors.hpp"
#include "sid/rng.hpp"

#include <algorithm>
#include <functional>

namespace sid {

std::vector<int> detect_bottleneck(const PlanOutcome& outcome, int i,
                                   const std::vector<int>& observed_neighbors) {
    if (outcome.feasible()) {
        throw NotInfeasible("detect_bottleneck: outcome is feasible");
    }
    std::vector<int> members{i};
    for (int id : outcome.bottleneck_candidates) {
        if (std::find(observed_neighbors.begin(), observed_neighbors.end(), id) !=
            observed_neighbors.end()) {
            members.push_back(id);
        }
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    return members;
}

std::vector<std::vector<int>> merge_bottlenecks(const std::vector<std::vector<int>>& sets) {
    // Union-find over robot ids appearing in any set.
    std::map<int, int> parent;
    std::function<int(int)> find = [&](int x) {
        if (parent.find(x) == parent.end()) parent[x] = x;
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
    for (const auto& s : sets) {
        for (size_t k = 1; k < s.size(); ++k) unite(s[0], s[k]);
        if (!s.empty()) find(s[0]);
    }
    std::map<int, std::vector<int>> groups;
    for (const auto& [id, _] : parent) groups[find(id)].push_back(id);
    std::vector<std::vector<int>> merged;
    for (auto& [root, ids] : groups) {
        std::sort(ids.begin(), ids.end());
        merged.push_back(std::move(ids));
    }
    std::sort(merged.begin(), merged.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return merged;
}

EpisodeResolution resolve_episode(const std::vector<int>& members,
                                  std::vector<AgentState>& agents,
                                  const std::map<int, ReferenceSet>& round_sims,
                                  const AgentContext& ctx, int round) {
    if (members.empty()) throw SidError("resolve_episode: empty member set");

    EpisodeResolution res;
    res.episode.members = members;
    res.episode.round = round;

    // Rank by ascending distance to goal; ties broken by ascending id.
    std::vector<int> order = members;
    auto dist = [&](int id) {
        const auto& a = agents[static_cast<size_t>(id)];
        return (a.position - a.goal).norm();
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = dist(a), db = dist(b);
        if (da != db) return da < db;
        return a < b;
    });
    res.episode.order = order;
    for (int id : order) res.episode.d_values.push_back(dist(id));

    const double ref_radius = ctx.radius + 0.5 * ctx.separation_margin;
    std::map<int, Trajectory> communicated;

    for (size_t rank = 0; rank < order.size(); ++rank) {
        const int m = order[rank];
        AgentState& agent = agents[static_cast<size_t>(m)];

        Trajectory planned;
        if (agent.arrived) {
            // Parked robots hold their position; their exact trajectory is
            // what gets communicated.
            planned = parked(agent.position, ctx.horizon);
        } else {
            // Start from this round's sims, drop other members, then add the
            // exact trajectories received from earlier members.
            ReferenceSet refs;
            auto it = round_sims.find(m);
            if (it != round_sims.end()) {
                for (const auto& [id, traj] : it->second.trajectories) {
                    if (std::find(members.begin(), members.end(), id) != members.end()) {
                        continue;
                    }
                    refs.insert(id, traj, it->second.radii.at(id));
                }
            }
            for (const auto& [id, traj] : communicated) {
                refs.insert(id, traj, ref_radius);
            }

            const std::uint64_t seed =
                mix64(ctx.run_seed, static_cast<std::uint64_t>(round),
                      static_cast<std::uint64_t>(m), seed_channel::kEpisode);
            PlanOutcome out = plan_with_references(agent, refs, ctx, seed);
            if (!out.feasible()) {
                // Relaxed-arrival retry: hold only the final step.
                out = plan_with_references(agent, refs, ctx, mix64(seed, 1), ctx.horizon);
            }
            if (!out.feasible()) {
                throw EpisodeFailure("resolve_episode: robot " + std::to_string(m) +
                                     " infeasible after ordered replanning");
            }
            planned = std::move(*out.trajectory);
        }

        communicated[m] = planned;
        res.plans[m] = planned;

        Message msg;
        msg.sender = m;
        msg.round = round;
        msg.payload = planned;
        for (size_t later = rank + 1; later < order.size(); ++later) {
            msg.recipients.push_back(order[later]);
        }
        res.episode.messages.push_back(std::move(msg));
    }
    return res;
}

double comm_frequency(const std::vector<Message>& log, int n_robots) {
    if (n_robots <= 0) throw SidError("comm_frequency: n_robots must be positive");
    return static_cast<double>(log.size()) / n_robots;
}

}  // namespace sid
