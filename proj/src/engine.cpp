#include "sid/engine.hpp"

#include "sid/errors.hpp"
#include "sid/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <map>

namespace sid {

using json = nlohmann::ordered_json;

void RunConfig::validate() const {
    if (model == nullptr) throw SidError("RunConfig: model is null");
    if (k < 1 || k >= horizon) throw SidError("RunConfig: need 1 <= k < H");
    if (model->dim() != 2 * (horizon + 1)) {
        throw DimensionMismatch("RunConfig: model dimension != 2*(H+1)");
    }
    instance.validate();
}

InstanceReport run_instance(const RunConfig& config) {
    config.validate();
    const ScenarioInstance& inst = config.instance;
    const int N = inst.n_robots();
    const int H = config.horizon;
    const int k = config.k;
    const int max_rounds = config.max_rounds > 0 ? config.max_rounds : H / k;
    const double obs_range =
        config.obs_range > 0.0 ? config.obs_range : 0.5 * inst.map.width();
    const double arrival_tol =
        config.arrival_tol > 0.0 ? config.arrival_tol : inst.robot_radius;

    AgentContext ctx;
    ctx.map = &inst.map;
    ctx.model = config.model;
    ctx.goals = inst.goals;
    ctx.radius = inst.robot_radius;
    ctx.v_max = config.v_max;
    ctx.horizon = H;
    ctx.arrival_tol = arrival_tol;
    ctx.exec_window = k;
    ctx.separation_margin = config.separation_margin;
    ctx.map_patch = occupancy_patch(inst.map);
    ctx.sampler = config.sampler;
    ctx.run_seed = mix64(config.seed, inst.seed);

    std::vector<AgentState> agents(static_cast<size_t>(N));
    std::vector<std::vector<Vec2>> executed(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        auto& a = agents[static_cast<size_t>(i)];
        a.id = i;
        a.position = inst.starts[static_cast<size_t>(i)];
        a.goal = inst.goals[static_cast<size_t>(i)];
        a.arrived = (a.position - a.goal).norm() <= arrival_tol;
        executed[static_cast<size_t>(i)].push_back(a.position);
    }

    InstanceReport report;
    bool episode_failed = false;

    for (int round = 0; round < max_rounds; ++round) {
        const bool all_arrived =
            std::all_of(agents.begin(), agents.end(), [](const auto& a) { return a.arrived; });
        if (all_arrived) break;
        report.rounds_run = round + 1;

        // Planning phase: agents read only the frozen snapshot.
        std::vector<Vec2> snapshot(static_cast<size_t>(N));
        for (int i = 0; i < N; ++i) snapshot[static_cast<size_t>(i)] =
            agents[static_cast<size_t>(i)].position;

        std::vector<Observation> observations(static_cast<size_t>(N));
        std::map<int, ReferenceSet> round_sims;
        std::vector<PlanOutcome> outcomes(static_cast<size_t>(N));
        std::vector<int> planning_ids;
        for (int i = 0; i < N; ++i) {
            if (!agents[static_cast<size_t>(i)].arrived) planning_ids.push_back(i);
        }

        // Keys preallocated so the planning phase only assigns mapped
        // values (no structural map mutation across threads).
        for (int i : planning_ids) round_sims[i] = ReferenceSet{};
        auto plan_one = [&](int i) {
            auto& agent = agents[static_cast<size_t>(i)];
            observations[static_cast<size_t>(i)] = observe(inst, snapshot, i, obs_range);
            ReferenceSet sims =
                simulate_neighbors(agent, observations[static_cast<size_t>(i)], ctx, round);
            outcomes[static_cast<size_t>(i)] =
                plan_own(agent, observations[static_cast<size_t>(i)], sims, ctx, round);
            round_sims.at(i) = std::move(sims);
        };

        if (config.parallel_agents) {
            std::vector<std::future<void>> futs;
            futs.reserve(planning_ids.size());
            for (int i : planning_ids) {
                futs.push_back(std::async(std::launch::async, plan_one, i));
            }
            for (auto& f : futs) f.get();
        } else {
            for (int i : planning_ids) plan_one(i);
        }

        // Communication phase: merge bottleneck sets, resolve in order.
        std::vector<std::vector<int>> sets;
        for (int i : planning_ids) {
            const auto& out = outcomes[static_cast<size_t>(i)];
            if (!out.feasible()) {
                sets.push_back(detect_bottleneck(
                    out, i, observations[static_cast<size_t>(i)].neighbor_ids));
            }
        }
        std::map<int, int> episode_events;  // per agent, for traces
        if (!sets.empty()) {
            try {
                for (const auto& members : merge_bottlenecks(sets)) {
                    EpisodeResolution res =
                        resolve_episode(members, agents, round_sims, ctx, round);
                    for (auto& [id, traj] : res.plans) {
                        outcomes[static_cast<size_t>(id)].trajectory = std::move(traj);
                    }
                    for (const auto& msg : res.episode.messages) {
                        episode_events[msg.sender] += 1;
                        report.messages.push_back(msg);
                    }
                    report.episodes.push_back(std::move(res.episode));
                }
            } catch (const EpisodeFailure&) {
                episode_failed = true;
            }
        }

        // Trace what each planner saw before committing.
        for (int i : planning_ids) {
            RoundTrace tr;
            tr.round = round;
            tr.id = i;
            tr.neighbors = observations[static_cast<size_t>(i)].neighbor_ids;
            tr.arrival_step = outcomes[static_cast<size_t>(i)].arrival_step;
            tr.converged = outcomes[static_cast<size_t>(i)].feasible();
            tr.violation = outcomes[static_cast<size_t>(i)].violation;
            tr.comm_events = episode_events.count(i) ? episode_events[i] : 0;
            report.traces.push_back(std::move(tr));
        }

        if (episode_failed) break;

        // Commit phase: sequential by id.
        for (int i = 0; i < N; ++i) {
            auto& agent = agents[static_cast<size_t>(i)];
            auto& path = executed[static_cast<size_t>(i)];
            if (agent.arrived) {
                for (int s = 0; s < k; ++s) path.push_back(agent.position);
                continue;
            }
            agent.current_plan = *outcomes[static_cast<size_t>(i)].trajectory;
            agent.steps_executed_in_plan = 0;
            agent.has_plan = true;
            for (const Vec2& p : execute(agent, k, arrival_tol)) path.push_back(p);
        }
    }

    for (auto& path : executed) report.executed.emplace_back(std::move(path));

    const std::vector<double> radii(static_cast<size_t>(N), inst.robot_radius);
    report.violations = collision_audit(report.executed, inst.map, radii, config.v_max);
    report.comm_events = static_cast<int>(report.messages.size());

    bool all_arrived = true;
    for (int i = 0; i < N; ++i) {
        const auto& traj = report.executed[static_cast<size_t>(i)];
        auto arr = traj.horizon() >= 1
                       ? travel_time(traj, inst.goals[static_cast<size_t>(i)], arrival_tol)
                       : std::optional<int>{0};
        report.arrivals.push_back(arr);
        if (!arr) all_arrived = false;
        report.smoothness_values.push_back(traj.horizon() >= 2 ? smoothness(traj) : 0.0);
    }

    if (episode_failed) {
        report.failure_cause = "episode-failure";
    } else if (!report.violations.empty()) {
        report.failure_cause = "collision";
    } else if (!all_arrived) {
        report.failure_cause = "not-arrived";
    } else {
        report.failure_cause = "none";
    }
    report.success = report.failure_cause == "none";
    return report;
}

std::vector<CollisionViolation> collision_audit(const std::vector<Trajectory>& executed,
                                                const WorldMap& map,
                                                const std::vector<double>& radii, double v_max,
                                                double tol) {
    std::vector<CollisionViolation> out;
    if (executed.empty()) return out;
    const int N = static_cast<int>(executed.size());
    const int H = executed.front().horizon();
    for (const auto& t : executed) {
        if (t.horizon() != H) throw DimensionMismatch("collision_audit: unequal lengths");
    }

    // Linear interpolation between Eq.-2-feasible waypoints can dip below
    // the waypoint thresholds mid-segment even when nothing passes through:
    //   obstacles: >= sqrt(r^2 - (v/2)^2)   (worst case: point obstacle)
    //   robots:    >= sqrt((ri+rj)^2 - v^2) (relative motion up to 2v)
    // Sub-step checks use those bounds; waypoints use the exact values.
    auto sub_obstacle_bound = [&](double r) {
        return std::sqrt(std::max(0.0, r * r - 0.25 * v_max * v_max));
    };
    auto sub_pair_bound = [&](double rr) {
        return std::sqrt(std::max(0.0, rr * rr - v_max * v_max));
    };

    const int subs = 4;
    for (int h = 0; h <= H; ++h) {
        for (int i = 0; i < N; ++i) {
            const double r = radii[static_cast<size_t>(i)];
            const double c = signed_clearance(map, executed[static_cast<size_t>(i)].at(h));
            if (c < r - tol) {
                out.push_back({static_cast<double>(h), i, -1, r - c});
            }
            for (int j = i + 1; j < N; ++j) {
                const double rr = r + radii[static_cast<size_t>(j)];
                const double d = (executed[static_cast<size_t>(i)].at(h) -
                                  executed[static_cast<size_t>(j)].at(h))
                                     .norm();
                if (d < rr - tol) {
                    out.push_back({static_cast<double>(h), i, j, rr - d});
                }
            }
        }
        if (h == H) break;
        for (int s = 1; s <= subs; ++s) {
            const double a = static_cast<double>(s) / (subs + 1);
            for (int i = 0; i < N; ++i) {
                const double r = radii[static_cast<size_t>(i)];
                const Vec2 pi = (1.0 - a) * executed[static_cast<size_t>(i)].at(h) +
                                a * executed[static_cast<size_t>(i)].at(h + 1);
                const double c = signed_clearance(map, pi);
                const double cb = sub_obstacle_bound(r);
                if (c < cb - tol) {
                    out.push_back({h + a, i, -1, cb - c});
                }
                for (int j = i + 1; j < N; ++j) {
                    const double rr = r + radii[static_cast<size_t>(j)];
                    const Vec2 pj = (1.0 - a) * executed[static_cast<size_t>(j)].at(h) +
                                    a * executed[static_cast<size_t>(j)].at(h + 1);
                    const double bound = sub_pair_bound(rr);
                    const double d = (pi - pj).norm();
                    if (d < bound - tol) {
                        out.push_back({h + a, i, j, bound - d});
                    }
                }
            }
        }
    }
    return out;
}

BenchmarkCell aggregate_metrics(const std::vector<InstanceReport>& reports) {
    if (reports.empty()) throw SidError("aggregate_metrics: no reports");
    BenchmarkCell cell;
    cell.total = static_cast<int>(reports.size());
    double comm_sum = 0.0, smooth_sum = 0.0, travel_sum = 0.0;
    int travel_count = 0;
    for (const auto& rep : reports) {
        const int n = static_cast<int>(rep.executed.size());
        comm_sum += n > 0 ? static_cast<double>(rep.comm_events) / n : 0.0;
        if (!rep.success) continue;
        cell.successes += 1;
        double s = 0.0, t = 0.0;
        for (double v : rep.smoothness_values) s += v;
        for (const auto& arr : rep.arrivals) t += static_cast<double>(arr.value());
        smooth_sum += s / n;
        travel_sum += t / n;
        travel_count += 1;
    }
    cell.success_rate = 100.0 * cell.successes / cell.total;
    cell.comm_frequency = comm_sum / cell.total;
    if (travel_count > 0) {
        // Smoothness appears in tables in 1e-2 units; raw values stay in
        // the reports.
        cell.smoothness = (smooth_sum / travel_count) * 100.0;
        cell.travel_time = travel_sum / travel_count;
    }
    return cell;
}

std::string report_to_json(const InstanceReport& report) {
    json j;
    j["success"] = report.success;
    j["failure_cause"] = report.failure_cause;
    j["rounds_run"] = report.rounds_run;
    j["comm_events"] = report.comm_events;
    json arrivals = json::array();
    for (const auto& a : report.arrivals) {
        if (a) {
            arrivals.push_back(*a);
        } else {
            arrivals.push_back(nullptr);
        }
    }
    j["arrivals"] = arrivals;
    j["smoothness"] = report.smoothness_values;
    json msgs = json::array();
    for (const auto& m : report.messages) {
        msgs.push_back({{"round", m.round}, {"sender", m.sender}, {"recipients", m.recipients}});
    }
    j["messages"] = msgs;
    json episodes = json::array();
    for (const auto& e : report.episodes) {
        episodes.push_back({{"round", e.round},
                            {"members", e.members},
                            {"order", e.order},
                            {"d_values", e.d_values}});
    }
    j["episodes"] = episodes;
    json viols = json::array();
    for (const auto& v : report.violations) {
        viols.push_back(
            {{"time", v.time}, {"id_a", v.id_a}, {"id_b", v.id_b}, {"depth", v.depth}});
    }
    j["violations"] = viols;
    json traces = json::array();
    for (const auto& t : report.traces) {
        traces.push_back({{"round", t.round},
                          {"id", t.id},
                          {"neighbors", t.neighbors},
                          {"a_i", t.arrival_step},
                          {"converged", t.converged},
                          {"violation", t.violation},
                          {"comm_events", t.comm_events}});
    }
    j["traces"] = traces;
    json trajs = json::array();
    for (const auto& t : report.executed) {
        json pts = json::array();
        for (const auto& p : t.points) pts.push_back({p.x(), p.y()});
        trajs.push_back(std::move(pts));
    }
    j["executed"] = trajs;
    return j.dump(2) + "\n";
}

}  // namespace sid
