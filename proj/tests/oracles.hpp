// Independent oracles for the test suite. Everything here re-derives
// expected values from first principles (brute force, enumeration, finite
// differences) and must stay independent of the implementation paths it
// checks.
#pragma once

#include "sid/arrival.hpp"
#include "sid/constraints.hpp"
#include "sid/geometry.hpp"
#include "sid/trajectory.hpp"

#include <cmath>
#include <array>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracles {

using sid::Vec2;

// Dense sampling of an obstacle boundary; distance to the nearest sample.
inline double rect_boundary_distance(const Vec2& p, const Vec2& center, const Vec2& he,
                                     int samples_per_edge = 20000) {
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i <= samples_per_edge; ++i) {
        const double a = -1.0 + 2.0 * i / samples_per_edge;
        const Vec2 pts[4] = {
            center + Vec2(a * he.x(), he.y()),
            center + Vec2(a * he.x(), -he.y()),
            center + Vec2(he.x(), a * he.y()),
            center + Vec2(-he.x(), a * he.y()),
        };
        for (const auto& q : pts) best = std::min(best, (p - q).norm());
    }
    return best;
}

// Direct per-step feasibility check of the three trajectory constraints
// (obstacle clearance, speed bound, pairwise separation against
// references). Deliberately written as plain loops over waypoints.
inline bool eq2_feasible(const sid::WorldMap& map, const sid::Trajectory& traj, double radius,
                         double v_max,
                         const std::vector<std::pair<sid::Trajectory, double>>& refs,
                         double tol = 0.0) {
    const int H = traj.horizon();
    for (int h = 0; h <= H; ++h) {
        if (sid::signed_clearance(map, traj.at(h)) < radius - tol) return false;
    }
    for (int h = 0; h < H; ++h) {
        if ((traj.at(h + 1) - traj.at(h)).norm() > v_max + tol) return false;
    }
    for (const auto& [ref, rr] : refs) {
        for (int h = 0; h <= H; ++h) {
            if ((traj.at(h) - ref.at(h)).norm() < radius + rr - tol) return false;
        }
    }
    return true;
}

// Central finite difference of a scalar function.
inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double eps = 1e-6) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + eps;
        const double fp = f(xp);
        xp[i] = x[i] - eps;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * eps);
    }
    return g;
}

// Layered breadth-first search over the same space-time lattice; optimal
// earliest arrival because every move costs one step.
inline std::optional<int> bfs_earliest_arrival(const sid::SpaceTimeGrid& grid, int sx, int sy,
                                               int gx, int gy) {
    const int stride = grid.nx + 1;
    const int layer = stride * (grid.ny + 1);
    std::vector<bool> seen(static_cast<size_t>(layer) * (grid.horizon + 1), false);
    std::deque<std::array<int, 3>> q;
    if (grid.blocked(sx, sy, 0)) return std::nullopt;
    q.push_back({sx, sy, 0});
    seen[static_cast<size_t>(sy * stride + sx)] = true;
    const int moves[5][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    while (!q.empty()) {
        auto [ix, iy, step] = q.front();
        q.pop_front();
        if (ix == gx && iy == gy) return step;
        if (step >= grid.horizon) continue;
        for (const auto& m : moves) {
            const int jx = ix + m[0], jy = iy + m[1];
            if (jx < 0 || jy < 0 || jx > grid.nx || jy > grid.ny) continue;
            const size_t key = static_cast<size_t>((step + 1) * layer + jy * stride + jx);
            if (seen[key] || grid.blocked(jx, jy, step + 1)) continue;
            if (grid.edge_blocked && grid.edge_blocked(ix, iy, jx, jy, step)) continue;
            seen[key] = true;
            q.push_back({jx, jy, step + 1});
        }
    }
    return std::nullopt;
}

// Exact Euclidean projection onto the intersection of speed-bound sets
// via Dykstra's alternating projections (convex case only). Pins are a
// coordinate subspace, handled as one more convex set.
inline Eigen::VectorXd dykstra_speed_projection(const Eigen::VectorXd& x, int horizon,
                                                double v_max,
                                                const std::vector<std::pair<int, double>>& pins,
                                                int sweeps = 4000) {
    const int n_sets = horizon + 1;  // speed sets plus the pin subspace
    std::vector<Eigen::VectorXd> corrections(
        static_cast<size_t>(n_sets), Eigen::VectorXd::Zero(x.size()));
    Eigen::VectorXd y = x;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int s = 0; s < n_sets; ++s) {
            const Eigen::VectorXd z = y + corrections[static_cast<size_t>(s)];
            Eigen::VectorXd pz = z;
            if (s == horizon) {
                for (const auto& [coord, value] : pins) pz[coord] = value;
            } else {
                const Vec2 a(z[2 * s], z[2 * s + 1]);
                const Vec2 b(z[2 * s + 2], z[2 * s + 3]);
                const Vec2 d = b - a;
                const double len = d.norm();
                if (len > v_max) {
                    const Vec2 mid = 0.5 * (a + b);
                    const Vec2 u = d / len;
                    const Vec2 na = mid - 0.5 * v_max * u;
                    const Vec2 nb = mid + 0.5 * v_max * u;
                    pz[2 * s] = na.x();
                    pz[2 * s + 1] = na.y();
                    pz[2 * s + 2] = nb.x();
                    pz[2 * s + 3] = nb.y();
                }
            }
            corrections[static_cast<size_t>(s)] = z - pz;
            y = pz;
        }
    }
    return y;
}

}  // namespace oracles
