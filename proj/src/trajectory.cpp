#include "sid/trajectory.hpp"

#include "sid/errors.hpp"

#include <cmath>

namespace sid {

Trajectory::Trajectory(std::vector<Vec2> pts) : points(std::move(pts)) {}

void Trajectory::validate() const {
    if (points.size() < 2) {
        throw HorizonTooShort("Trajectory: needs at least 2 points (H >= 1)");
    }
    for (const auto& p : points) {
        if (!p.allFinite()) throw SidError("Trajectory: non-finite coordinate");
    }
}

FlatTraj flatten(const Trajectory& traj) {
    FlatTraj flat(2 * traj.points.size());
    for (size_t i = 0; i < traj.points.size(); ++i) {
        flat[2 * i] = traj.points[i].x();
        flat[2 * i + 1] = traj.points[i].y();
    }
    return flat;
}

Trajectory unflatten(const FlatTraj& flat) {
    if (flat.size() % 2 != 0 || flat.size() < 4) {
        throw DimensionMismatch("unflatten: length must be even and >= 4");
    }
    std::vector<Vec2> pts(static_cast<size_t>(flat.size() / 2));
    for (size_t i = 0; i < pts.size(); ++i) {
        pts[i] = Vec2(flat[2 * i], flat[2 * i + 1]);
    }
    return Trajectory(std::move(pts));
}

Trajectory straight_line(const Vec2& start, const Vec2& goal, int horizon) {
    std::vector<Vec2> pts(static_cast<size_t>(horizon) + 1);
    for (int h = 0; h <= horizon; ++h) {
        const double a = static_cast<double>(h) / horizon;
        pts[static_cast<size_t>(h)] = (1.0 - a) * start + a * goal;
    }
    return Trajectory(std::move(pts));
}

Trajectory parked(const Vec2& p, int horizon) {
    return Trajectory(std::vector<Vec2>(static_cast<size_t>(horizon) + 1, p));
}

double smoothness(const Trajectory& traj, double dt) {
    const int H = traj.horizon();
    if (H < 2) throw HorizonTooShort("smoothness: H < 2");
    double acc = 0.0;
    const double dt2 = dt * dt;
    for (int t = 0; t + 2 <= H; ++t) {
        const Vec2 d2 = (traj.at(t + 2) - 2.0 * traj.at(t + 1) + traj.at(t)) / dt2;
        acc += d2.squaredNorm();
    }
    return dt * acc;
}

std::optional<int> travel_time(const Trajectory& traj, const Vec2& goal, double tol) {
    const int H = traj.horizon();
    if ((traj.at(H) - goal).norm() > tol) return std::nullopt;
    int h = H;
    while (h > 0 && (traj.at(h - 1) - goal).norm() <= tol) --h;
    return h;
}

double max_step_speed(const Trajectory& traj) {
    double v = 0.0;
    for (int h = 0; h < traj.horizon(); ++h) {
        v = std::max(v, (traj.at(h + 1) - traj.at(h)).norm());
    }
    return v;
}

void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajs) {
    os << "step,robot_id,x,y\n";
    if (trajs.empty()) return;
    const int H = trajs.front().horizon();
    for (int h = 0; h <= H; ++h) {
        for (size_t i = 0; i < trajs.size(); ++i) {
            os << h << ',' << i << ',' << trajs[i].at(h).x() << ',' << trajs[i].at(h).y()
               << '\n';
        }
    }
}

}  // namespace sid
