#include "sid/scenario.hpp"

#include "sid/errors.hpp"
#include "sid/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

namespace sid {

using json = nlohmann::ordered_json;

MapFamily parse_family(const std::string& name) {
    if (name == "basic") return MapFamily::Basic;
    if (name == "dense") return MapFamily::Dense;
    if (name == "room") return MapFamily::Room;
    if (name == "shelf") return MapFamily::Shelf;
    throw SidError("unknown map family: " + name);
}

std::string family_name(MapFamily family) {
    switch (family) {
        case MapFamily::Basic: return "basic";
        case MapFamily::Dense: return "dense";
        case MapFamily::Room: return "room";
        case MapFamily::Shelf: return "shelf";
    }
    return "basic";
}

void ScenarioInstance::validate() const {
    map.validate();
    if (starts.size() != goals.size() || starts.empty()) {
        throw SidError("ScenarioInstance: |starts| must equal |goals| and be >= 1");
    }
    if (!(robot_radius > 0.0)) throw SidError("ScenarioInstance: robot_radius <= 0");
    const double eps = 1e-12;
    auto check_point = [&](const Vec2& p, const char* what) {
        if (signed_clearance(map, p) + eps < robot_radius) {
            throw SidError(std::string("ScenarioInstance: ") + what +
                           " clearance below robot_radius");
        }
    };
    for (const auto& s : starts) check_point(s, "start");
    for (const auto& g : goals) check_point(g, "goal");
    for (size_t i = 0; i < starts.size(); ++i) {
        for (size_t j = i + 1; j < starts.size(); ++j) {
            if ((starts[i] - starts[j]).norm() + eps < 2.0 * robot_radius) {
                throw SidError("ScenarioInstance: start-start separation below 2r");
            }
            if ((goals[i] - goals[j]).norm() + eps < 2.0 * robot_radius) {
                throw SidError("ScenarioInstance: goal-goal separation below 2r");
            }
        }
    }
}

namespace {

// Coarse lattice BFS used only as a generation-time screen: rejects
// start/goal pairs whose goal sits in a walled-off pocket.
bool statically_reachable(const WorldMap& map, const Vec2& start, const Vec2& goal,
                          double radius, double cell, int max_steps) {
    const int nx = static_cast<int>(std::round(map.width() / cell));
    const int ny = static_cast<int>(std::round(map.height() / cell));
    auto node = [&](int ix, int iy) {
        return Vec2(map.lo.x() + ix * cell, map.lo.y() + iy * cell);
    };
    auto blocked = [&](int ix, int iy) {
        return signed_clearance(map, node(ix, iy)) < radius;
    };
    auto snap = [&](const Vec2& p, int& ix, int& iy) {
        ix = std::clamp(static_cast<int>(std::round((p.x() - map.lo.x()) / cell)), 0, nx);
        iy = std::clamp(static_cast<int>(std::round((p.y() - map.lo.y()) / cell)), 0, ny);
        if (!blocked(ix, iy)) return true;
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                const int jx = ix + dx, jy = iy + dy;
                if (jx < 0 || jy < 0 || jx > nx || jy > ny || blocked(jx, jy)) continue;
                ix = jx;
                iy = jy;
                return true;
            }
        }
        return false;
    };
    int sx, sy, gx, gy;
    if (!snap(start, sx, sy) || !snap(goal, gx, gy)) return false;
    std::vector<int> dist(static_cast<size_t>((nx + 1) * (ny + 1)), -1);
    auto idx = [&](int ix, int iy) { return iy * (nx + 1) + ix; };
    std::deque<std::pair<int, int>> q;
    dist[static_cast<size_t>(idx(sx, sy))] = 0;
    q.emplace_back(sx, sy);
    const int moves[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    while (!q.empty()) {
        auto [ix, iy] = q.front();
        q.pop_front();
        const int d = dist[static_cast<size_t>(idx(ix, iy))];
        if (ix == gx && iy == gy) return true;
        if (d >= max_steps) continue;
        for (const auto& m : moves) {
            const int jx = ix + m[0], jy = iy + m[1];
            if (jx < 0 || jy < 0 || jx > nx || jy > ny) continue;
            if (dist[static_cast<size_t>(idx(jx, jy))] >= 0 || blocked(jx, jy)) continue;
            dist[static_cast<size_t>(idx(jx, jy))] = d + 1;
            q.emplace_back(jx, jy);
        }
    }
    return false;
}

std::vector<Obstacle> make_obstacles(MapFamily family, const GenerateOptions& opt,
                                     std::mt19937_64& rng) {
    std::vector<Obstacle> obs;
    const double half = opt.map_size / 2.0;
    if (family == MapFamily::Room) {
        // Two facing walls with a central doorway gap along y = 0.
        const double wall_len = 1.0, wall_thick = 0.2;
        obs.push_back(Obstacle::rect(Vec2(-0.5 * wall_len - 0.1, 0.0),
                                     Vec2(wall_len / 2.0, wall_thick / 2.0)));
        obs.push_back(Obstacle::rect(Vec2(0.5 * wall_len + 0.1, 0.0),
                                     Vec2(wall_len / 2.0, wall_thick / 2.0)));
        return obs;
    }
    if (family == MapFamily::Shelf) {
        // Two parallel vertical aisles, symmetric about x = 0.
        const double shelf_len = 1.0, shelf_thick = 0.2;
        obs.push_back(
            Obstacle::rect(Vec2(-0.4, 0.0), Vec2(shelf_thick / 2.0, shelf_len / 2.0)));
        obs.push_back(
            Obstacle::rect(Vec2(0.4, 0.0), Vec2(shelf_thick / 2.0, shelf_len / 2.0)));
        return obs;
    }
    const int count =
        opt.obstacle_count >= 0 ? opt.obstacle_count : (family == MapFamily::Dense ? 20 : 10);
    std::uniform_real_distribution<double> size_dist(opt.obstacle_size_min,
                                                     opt.obstacle_size_max);
    std::uniform_real_distribution<double> pos_dist(-half, half);
    std::uniform_int_distribution<int> shape_dist(0, 1);
    for (int k = 0; k < count; ++k) {
        const double size = size_dist(rng);
        const Vec2 c(pos_dist(rng), pos_dist(rng));
        if (shape_dist(rng) == 0) {
            obs.push_back(Obstacle::circle(c, size / 2.0));
        } else {
            obs.push_back(Obstacle::rect(c, Vec2(size / 2.0, size / 2.0)));
        }
    }
    return obs;
}

}  // namespace

ScenarioInstance generate_instance(MapFamily family, int n_robots, std::uint64_t seed,
                                   const GenerateOptions& opt) {
    if (n_robots < 1) throw SidError("generate_instance: n_robots must be >= 1");
    std::mt19937_64 rng(
        mix64(seed, static_cast<std::uint64_t>(family), static_cast<std::uint64_t>(n_robots)));

    ScenarioInstance inst;
    inst.family = family;
    inst.seed = seed;
    inst.robot_radius = opt.robot_radius;
    const double half = opt.map_size / 2.0;
    inst.map = WorldMap(Vec2(-half, -half), Vec2(half, half));
    inst.map.obstacles = make_obstacles(family, opt, rng);

    const double r = opt.robot_radius;
    // Placement keeps a slack above the bare 2r invariant so that parked
    // robots and margin-inflated planning thresholds stay feasible around
    // every start and goal.
    const double spacing = 2.0 * r + opt.placement_slack;
    std::uniform_real_distribution<double> pos_dist(-half + r, half - r);
    auto clear = [&](const Vec2& p) { return signed_clearance(inst.map, p) >= r; };
    auto separated = [&](const Vec2& p, const std::vector<Vec2>& pts) {
        for (const auto& q : pts) {
            if ((p - q).norm() < spacing) return false;
        }
        return true;
    };
    auto draw = [&](const std::vector<Vec2>& peers, const std::vector<Vec2>& cross,
                    const char* what) {
        for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
            const Vec2 p(pos_dist(rng), pos_dist(rng));
            if (clear(p) && separated(p, peers) && separated(p, cross)) return p;
        }
        throw PlacementFailure(std::string("generate_instance: could not place ") + what +
                               " after attempt budget");
    };

    for (int i = 0; i < n_robots; ++i) {
        const Vec2 s = draw(inst.starts, inst.goals, "start");
        // Goal re-drawn until the straight lattice screen says it is
        // reachable from this start; keeps generated instances solvable.
        Vec2 g;
        bool ok = false;
        for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
            g = draw(inst.goals, inst.starts, "goal");
            ok = statically_reachable(inst.map, s, g, r, opt.v_max, opt.reach_steps);
        }
        if (!ok) {
            throw PlacementFailure("generate_instance: no reachable goal for start");
        }
        inst.starts.push_back(s);
        inst.goals.push_back(g);
    }
    inst.validate();
    return inst;
}

Observation observe(const ScenarioInstance& instance, const std::vector<Vec2>& positions,
                    int i, double range) {
    if (range <= 0.0) throw SidError("observe: range must be positive");
    if (positions.size() != instance.starts.size()) {
        throw DimensionMismatch("observe: positions length != robot count");
    }
    Observation obs;
    obs.self = i;
    obs.position = positions[static_cast<size_t>(i)];
    obs.range = range;
    for (int j = 0; j < instance.n_robots(); ++j) {
        if (j == i) continue;
        if ((positions[static_cast<size_t>(j)] - obs.position).norm() <= range) {
            obs.neighbor_ids.push_back(j);
            obs.neighbor_positions.push_back(positions[static_cast<size_t>(j)]);
        }
    }
    for (int k = 0; k < static_cast<int>(instance.map.obstacles.size()); ++k) {
        if (instance.map.obstacles[static_cast<size_t>(k)].signed_distance(obs.position) <=
            range) {
            obs.visible_obstacles.push_back(k);
        }
    }
    return obs;
}

namespace {

json obstacle_to_json(const Obstacle& o) {
    json j;
    if (o.shape == Obstacle::Shape::Circle) {
        j["type"] = "circle";
        j["center"] = {o.center.x(), o.center.y()};
        j["radius"] = o.radius;
    } else {
        j["type"] = "rect";
        j["center"] = {o.center.x(), o.center.y()};
        j["half_extents"] = {o.half_extents.x(), o.half_extents.y()};
    }
    return j;
}

Obstacle obstacle_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    const Vec2 c(j.at("center")[0].get<double>(), j.at("center")[1].get<double>());
    if (type == "circle") return Obstacle::circle(c, j.at("radius").get<double>());
    if (type == "rect") {
        return Obstacle::rect(
            c, Vec2(j.at("half_extents")[0].get<double>(), j.at("half_extents")[1].get<double>()));
    }
    throw SidError("scenario: unknown obstacle type " + type);
}

json points_to_json(const std::vector<Vec2>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x(), p.y()});
    return arr;
}

std::vector<Vec2> points_from_json(const json& arr) {
    std::vector<Vec2> pts;
    for (const auto& p : arr) pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    return pts;
}

}  // namespace

std::string scenario_to_json(const ScenarioInstance& instance) {
    json j;
    j["family"] = family_name(instance.family);
    j["seed"] = instance.seed;
    j["bounds"] = {instance.map.lo.x(), instance.map.lo.y(), instance.map.hi.x(),
                   instance.map.hi.y()};
    json obs = json::array();
    for (const auto& o : instance.map.obstacles) obs.push_back(obstacle_to_json(o));
    j["obstacles"] = obs;
    j["starts"] = points_to_json(instance.starts);
    j["goals"] = points_to_json(instance.goals);
    j["robot_radius"] = instance.robot_radius;
    return j.dump(2) + "\n";
}

ScenarioInstance scenario_from_json(const std::string& text) {
    const json j = json::parse(text);
    ScenarioInstance inst;
    inst.family = parse_family(j.at("family").get<std::string>());
    inst.seed = j.at("seed").get<std::uint64_t>();
    const auto& b = j.at("bounds");
    inst.map = WorldMap(Vec2(b[0].get<double>(), b[1].get<double>()),
                        Vec2(b[2].get<double>(), b[3].get<double>()));
    for (const auto& o : j.at("obstacles")) {
        inst.map.obstacles.push_back(obstacle_from_json(o));
    }
    inst.starts = points_from_json(j.at("starts"));
    inst.goals = points_from_json(j.at("goals"));
    inst.robot_radius = j.at("robot_radius").get<double>();
    return inst;
}

void save_scenario(const std::string& path, const ScenarioInstance& instance) {
    std::ofstream f(path);
    if (!f) throw SidError("cannot open for write: " + path);
    f << scenario_to_json(instance);
}

ScenarioInstance load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SidError("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return scenario_from_json(ss.str());
}

}  // namespace sid
