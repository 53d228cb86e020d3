#include "sid/arrival.hpp"

#include "sid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

namespace sid {

SpaceTimeGrid SpaceTimeGrid::build(const WorldMap& map, double radius, double v_max,
                                   int horizon, const ReferenceSet& refs, double cell) {
    SpaceTimeGrid grid;
    grid.cell = cell > 0.0 ? cell : v_max;
    if (grid.cell > v_max + 1e-12) throw SidError("SpaceTimeGrid: cell must be <= v_max");
    grid.allow_diagonals = grid.cell * std::sqrt(2.0) <= v_max + 1e-12;
    grid.origin = map.lo;
    grid.nx = static_cast<int>(std::floor(map.width() / grid.cell + 1e-9));
    grid.ny = static_cast<int>(std::floor(map.height() / grid.cell + 1e-9));
    grid.horizon = horizon;

    // Static occupancy precomputed once; dynamic blocking scans references.
    auto static_blocked = std::make_shared<std::vector<bool>>(
        static_cast<size_t>((grid.nx + 1) * (grid.ny + 1)), false);
    for (int iy = 0; iy <= grid.ny; ++iy) {
        for (int ix = 0; ix <= grid.nx; ++ix) {
            (*static_blocked)[static_cast<size_t>(iy * (grid.nx + 1) + ix)] =
                signed_clearance(map, grid.node(ix, iy)) < radius;
        }
    }

    struct RefBlock {
        Eigen::Matrix2Xd points;
        double inflate;
    };
    auto ref_blocks = std::make_shared<std::vector<RefBlock>>();
    for (const auto& [id, traj] : refs.trajectories) {
        RefBlock rb;
        rb.inflate = radius + refs.radii.at(id);
        rb.points.resize(2, traj.horizon() + 1);
        for (int h = 0; h <= traj.horizon(); ++h) rb.points.col(h) = traj.at(h);
        ref_blocks->push_back(std::move(rb));
    }

    const int nx = grid.nx;
    const Vec2 origin = grid.origin;
    const double c = grid.cell;
    grid.static_blocked = [static_blocked, nx](int ix, int iy) {
        return (*static_blocked)[static_cast<size_t>(iy * (nx + 1) + ix)];
    };
    grid.blocked = [static_blocked, ref_blocks, nx, origin, c](int ix, int iy, int step) {
        if ((*static_blocked)[static_cast<size_t>(iy * (nx + 1) + ix)]) return true;
        const Vec2 p = origin + Vec2(ix * c, iy * c);
        for (const auto& rb : *ref_blocks) {
            const int h = std::min<int>(step, static_cast<int>(rb.points.cols()) - 1);
            if ((p - Vec2(rb.points.col(h))).norm() < rb.inflate) return true;
        }
        return false;
    };
    grid.edge_blocked = [ref_blocks, origin, c](int fx, int fy, int tx, int ty, int step) {
        if (ref_blocks->empty()) return false;
        const Vec2 from = origin + Vec2(fx * c, fy * c);
        const Vec2 to = origin + Vec2(tx * c, ty * c);
        for (const auto& rb : *ref_blocks) {
            const int last = static_cast<int>(rb.points.cols()) - 1;
            const Vec2 q0 = rb.points.col(std::min(step, last));
            const Vec2 q1 = rb.points.col(std::min(step + 1, last));
            // Swap: the reference crosses our edge in the opposite direction.
            if ((q0 - to).norm() < 0.5 * c && (q1 - from).norm() < 0.5 * c) return true;
        }
        return false;
    };
    return grid;
}

SpaceTimeGrid SpaceTimeGrid::synthetic(int nx, int ny, int horizon,
                                       std::function<bool(int, int, int)> blocked) {
    SpaceTimeGrid grid;
    grid.origin = Vec2::Zero();
    grid.cell = 1.0;
    grid.nx = nx;
    grid.ny = ny;
    grid.horizon = horizon;
    grid.allow_diagonals = false;
    grid.blocked = std::move(blocked);
    const auto blocked_fn = grid.blocked;
    const int h = horizon;
    grid.static_blocked = [blocked_fn, h](int ix, int iy) { return blocked_fn(ix, iy, h); };
    grid.edge_blocked = [](int, int, int, int, int) { return false; };
    return grid;
}

namespace {

struct Node {
    int f;
    int step;
    int ix;
    int iy;
    bool operator>(const Node& o) const {
        if (f != o.f) return f > o.f;
        if (step != o.step) return step > o.step;
        if (ix != o.ix) return ix > o.ix;
        return iy > o.iy;
    }
};

bool snap_to_unblocked(const SpaceTimeGrid& grid, const Vec2& p, int step_for_block, int& ix,
                       int& iy) {
    ix = std::clamp(static_cast<int>(std::round((p.x() - grid.origin.x()) / grid.cell)), 0,
                    grid.nx);
    iy = std::clamp(static_cast<int>(std::round((p.y() - grid.origin.y()) / grid.cell)), 0,
                    grid.ny);
    if (!grid.blocked(ix, iy, step_for_block)) return true;
    // Nearest unblocked node in the immediate neighborhood.
    int best_ix = -1, best_iy = -1;
    double best_d = std::numeric_limits<double>::max();
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int jx = ix + dx, jy = iy + dy;
            if (jx < 0 || jy < 0 || jx > grid.nx || jy > grid.ny) continue;
            if (grid.blocked(jx, jy, step_for_block)) continue;
            const double d = (grid.node(jx, jy) - p).norm();
            if (d < best_d) {
                best_d = d;
                best_ix = jx;
                best_iy = jy;
            }
        }
    }
    if (best_ix < 0) return false;
    ix = best_ix;
    iy = best_iy;
    return true;
}

}  // namespace

std::optional<ArrivalResult> earliest_arrival_path(const SpaceTimeGrid& grid, const Vec2& start,
                                                   const Vec2& goal) {
    int sx, sy, gx, gy;
    if (!snap_to_unblocked(grid, start, 0, sx, sy)) {
        throw SnapFailure("earliest_arrival: start node blocked");
    }
    // Goal snap is static: dynamic blocking there means "unreachable", not
    // a snap error.
    {
        const int tx = std::clamp(
            static_cast<int>(std::round((goal.x() - grid.origin.x()) / grid.cell)), 0, grid.nx);
        const int ty = std::clamp(
            static_cast<int>(std::round((goal.y() - grid.origin.y()) / grid.cell)), 0, grid.ny);
        gx = tx;
        gy = ty;
        double best_d = std::numeric_limits<double>::max();
        // Statically blocked goal: try the immediate neighborhood, then fail.
        auto static_free = [&](int ix, int iy) { return !grid.static_blocked(ix, iy); };
        if (!static_free(gx, gy)) {
            int bx = -1, by = -1;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int jx = tx + dx, jy = ty + dy;
                    if (jx < 0 || jy < 0 || jx > grid.nx || jy > grid.ny) continue;
                    if (!static_free(jx, jy)) continue;
                    const double d = (grid.node(jx, jy) - goal).norm();
                    if (d < best_d) {
                        best_d = d;
                        bx = jx;
                        by = jy;
                    }
                }
            }
            if (bx < 0) throw SnapFailure("earliest_arrival: goal node statically blocked");
            gx = bx;
            gy = by;
        }
    }

    const int stride = grid.nx + 1;
    const int layer = stride * (grid.ny + 1);
    std::vector<int> parent(static_cast<size_t>(layer) * (grid.horizon + 1), -2);
    auto key = [&](int ix, int iy, int step) { return step * layer + iy * stride + ix; };

    const double move_len = grid.allow_diagonals ? grid.cell * std::sqrt(2.0) : grid.cell;
    auto heuristic = [&](int ix, int iy) {
        const double d = (grid.node(ix, iy) - grid.node(gx, gy)).norm();
        return static_cast<int>(std::ceil(d / move_len - 1e-9));
    };

    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    parent[static_cast<size_t>(key(sx, sy, 0))] = -1;
    open.push({heuristic(sx, sy), 0, sx, sy});

    static const int moves4[5][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    static const int moves8[9][2] = {{0, 0}, {1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                     {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    const auto* moves = grid.allow_diagonals ? &moves8[0] : &moves4[0];
    const int n_moves = grid.allow_diagonals ? 9 : 5;

    while (!open.empty()) {
        const Node cur = open.top();
        open.pop();
        if (cur.ix == gx && cur.iy == gy) {
            ArrivalResult res;
            res.arrival = cur.step;
            int k = key(cur.ix, cur.iy, cur.step);
            int ix = cur.ix, iy = cur.iy, step = cur.step;
            while (k >= 0) {
                res.path.push_back({ix, iy, step});
                const int pk = parent[static_cast<size_t>(k)];
                if (pk < 0) break;
                step = pk / layer;
                iy = (pk % layer) / stride;
                ix = pk % stride;
                k = pk;
            }
            std::reverse(res.path.begin(), res.path.end());
            return res;
        }
        if (cur.step >= grid.horizon) continue;
        for (int m = 0; m < n_moves; ++m) {
            const int jx = cur.ix + moves[m][0];
            const int jy = cur.iy + moves[m][1];
            if (jx < 0 || jy < 0 || jx > grid.nx || jy > grid.ny) continue;
            const int jstep = cur.step + 1;
            const int jkey = key(jx, jy, jstep);
            if (parent[static_cast<size_t>(jkey)] != -2) continue;
            if (grid.blocked(jx, jy, jstep)) continue;
            if (m != 0 && grid.edge_blocked(cur.ix, cur.iy, jx, jy, cur.step)) continue;
            parent[static_cast<size_t>(jkey)] = key(cur.ix, cur.iy, cur.step);
            open.push({jstep + heuristic(jx, jy), jstep, jx, jy});
        }
    }
    return std::nullopt;
}

std::optional<int> earliest_arrival(const SpaceTimeGrid& grid, const Vec2& start,
                                    const Vec2& goal) {
    auto res = earliest_arrival_path(grid, start, goal);
    if (!res) return std::nullopt;
    return res->arrival;
}

Trajectory lattice_to_trajectory(const SpaceTimeGrid& grid, const std::vector<LatticeStep>& path,
                                 int horizon) {
    if (path.empty()) throw NonMonotonePath("lattice_to_trajectory: empty path");
    for (size_t i = 1; i < path.size(); ++i) {
        if (path[i].step != path[i - 1].step + 1) {
            throw NonMonotonePath("lattice_to_trajectory: steps not consecutive");
        }
        const int dx = std::abs(path[i].ix - path[i - 1].ix);
        const int dy = std::abs(path[i].iy - path[i - 1].iy);
        if (dx > 1 || dy > 1 || (!grid.allow_diagonals && dx + dy > 1)) {
            throw NonMonotonePath("lattice_to_trajectory: cells not adjacent");
        }
    }
    std::vector<Vec2> pts;
    pts.reserve(static_cast<size_t>(horizon) + 1);
    for (const auto& c : path) pts.push_back(grid.node(c.ix, c.iy));
    while (static_cast<int>(pts.size()) < horizon + 1) pts.push_back(pts.back());
    if (static_cast<int>(pts.size()) > horizon + 1) {
        throw NonMonotonePath("lattice_to_trajectory: path longer than horizon");
    }
    return Trajectory(std::move(pts));
}

}  // namespace sid
