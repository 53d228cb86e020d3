#pragma once

#include "sid/agent.hpp"

#include <map>
#include <vector>

namespace sid {

struct Message {
    int sender = -1;
    std::vector<int> recipients;  // later robots in the episode order
    Trajectory payload;
    int round = 0;
};

struct BottleneckEpisode {
    std::vector<int> members;   // merged bottleneck set, ascending id
    std::vector<int> order;     // members ranked by ascending distance-to-goal
    std::vector<double> d_values;  // parallel to order
    std::vector<Message> messages;
    int round = 0;
};

// Bottleneck set for robot i from a failed plan: {i} plus the observed
// neighbors whose separation residuals were active in the best iterate.
// Obstacle/kinematic-only failures degenerate to the singleton {i}.
// Throws NotInfeasible when the outcome is feasible.
std::vector<int> detect_bottleneck(const PlanOutcome& outcome, int i,
                                   const std::vector<int>& observed_neighbors);

// Union of overlapping bottleneck sets discovered in the same round; each
// merged episode is resolved once. Output episodes are sorted by smallest
// member id, members ascending.
std::vector<std::vector<int>> merge_bottlenecks(const std::vector<std::vector<int>>& sets);

struct EpisodeResolution {
    std::map<int, Trajectory> plans;  // replanned trajectory per member
    BottleneckEpisode episode;
};

// Algorithm-2 resolution: members ranked by ascending distance to goal
// (ties by id); each member drops separation constraints against other
// members, adds the exact communicated trajectories of all earlier
// members, recomputes its arrival step, replans, and broadcasts once.
// A member whose replan still fails after a relaxed-arrival retry raises
// EpisodeFailure.
EpisodeResolution resolve_episode(const std::vector<int>& members,
                                  std::vector<AgentState>& agents,
                                  const std::map<int, ReferenceSet>& round_sims,
                                  const AgentContext& ctx, int round);

// Broadcasts per robot: each message counts as one communication event.
double comm_frequency(const std::vector<Message>& log, int n_robots);

}  // namespace sid
