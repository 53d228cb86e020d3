#include "sid/expert.hpp"

#include "sid/arrival.hpp"
#include "sid/errors.hpp"
#include "sid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sid {

namespace {

// Replaces waypoints i..j by a uniform resampling of the straight segment
// when every new waypoint keeps clearance and the step length stays under
// v_max. Returns true when applied.
bool try_shortcut(std::vector<Vec2>& pts, int i, int j, const WorldMap& map, double radius,
                  double v_max) {
    if (j - i < 2) return false;
    const Vec2 a = pts[static_cast<size_t>(i)];
    const Vec2 b = pts[static_cast<size_t>(j)];
    const int steps = j - i;
    if ((b - a).norm() / steps > v_max + 1e-12) return false;
    std::vector<Vec2> replacement(static_cast<size_t>(steps) - 1);
    for (int s = 1; s < steps; ++s) {
        const Vec2 p = a + (b - a) * (static_cast<double>(s) / steps);
        if (signed_clearance(map, p) < radius) return false;
        replacement[static_cast<size_t>(s) - 1] = p;
    }
    for (int s = 1; s < steps; ++s) {
        pts[static_cast<size_t>(i + s)] = replacement[static_cast<size_t>(s) - 1];
    }
    return true;
}

}  // namespace

Dataset expert_dataset(const std::vector<ScenarioInstance>& instances, int per_instance,
                       const ExpertOptions& opt) {
    if (instances.empty()) throw EmptyDataset("expert_dataset: no instances");
    Dataset dataset;
    dataset.horizon = opt.horizon;
    std::string hash_src;
    for (const auto& inst : instances) hash_src += scenario_to_json(inst);
    dataset.map_hash = fnv1a_64(hash_src);

    for (const auto& inst : instances) {
        const WorldMap& map = inst.map;
        const double r = inst.robot_radius;
        const Eigen::VectorXd patch = occupancy_patch(map);
        SpaceTimeGrid grid =
            SpaceTimeGrid::build(map, r, opt.v_max, opt.horizon, ReferenceSet{});
        std::mt19937_64 rng = make_rng(mix64(opt.seed, inst.seed, 0xda7aULL));
        std::uniform_real_distribution<double> px(map.lo.x() + r, map.hi.x() - r);
        std::uniform_real_distribution<double> py(map.lo.y() + r, map.hi.y() - r);

        int emitted = 0;
        int budget = per_instance * 200;
        while (emitted < per_instance && budget-- > 0) {
            const Vec2 start(px(rng), py(rng));
            const Vec2 goal(px(rng), py(rng));
            if (signed_clearance(map, start) < r || signed_clearance(map, goal) < r) continue;

            std::optional<ArrivalResult> res;
            try {
                res = earliest_arrival_path(grid, start, goal);
            } catch (const SnapFailure&) {
                continue;
            }
            if (!res) continue;

            Trajectory traj = lattice_to_trajectory(grid, res->path, opt.horizon);
            std::vector<Vec2>& pts = traj.points;
            const int arrival = res->arrival;

            // Deterministic full-span shortcut first (straightens empty maps
            // completely), then random local ones.
            try_shortcut(pts, 0, arrival, map, r, opt.v_max);
            std::uniform_int_distribution<int> idx(0, arrival);
            for (int attempt = 0; attempt < opt.shortcut_attempts; ++attempt) {
                int i = idx(rng), j = idx(rng);
                if (i > j) std::swap(i, j);
                try_shortcut(pts, i, j, map, r, opt.v_max);
            }

            TrainingSample sample;
            sample.x0 = flatten(traj);
            // Condition on the lattice endpoints the trajectory actually
            // uses (snapping may shift the drawn points by under a cell).
            sample.cond.start = traj.at(0);
            sample.cond.goal = traj.at(arrival);
            sample.cond.map_patch = patch;
            dataset.samples.push_back(std::move(sample));
            ++emitted;
        }
        if (emitted < per_instance) {
            throw PlacementFailure("expert_dataset: could not generate requested samples");
        }
    }
    return dataset;
}

}  // namespace sid
