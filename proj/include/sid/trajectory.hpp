#pragma once

#include "sid/geometry.hpp"

#include <Eigen/Core>

#include <optional>
#include <ostream>
#include <vector>

namespace sid {

// Flattened trajectory: (x0, y0, x1, y1, ...) of length 2*(H+1).
using FlatTraj = Eigen::VectorXd;

// Fixed-horizon waypoint sequence p^0..p^H for one robot.
struct Trajectory {
    std::vector<Vec2> points;

    Trajectory() = default;
    explicit Trajectory(std::vector<Vec2> pts);

    int horizon() const { return static_cast<int>(points.size()) - 1; }
    const Vec2& at(int step) const { return points[static_cast<size_t>(step)]; }

    void validate() const;  // length >= 2 and all coordinates finite
};

FlatTraj flatten(const Trajectory& traj);
Trajectory unflatten(const FlatTraj& flat);

// Straight start->goal line sampled at H+1 equally spaced waypoints.
Trajectory straight_line(const Vec2& start, const Vec2& goal, int horizon);

// A trajectory parked at a single point for the whole horizon.
Trajectory parked(const Vec2& p, int horizon);

// Integral of squared discrete acceleration:
//   dt * sum_t || (p^{t+2} - 2 p^{t+1} + p^t) / dt^2 ||^2.
// Throws HorizonTooShort when H < 2.
double smoothness(const Trajectory& traj, double dt = 1.0);

// Smallest step h such that every point from h through H lies within tol
// of the goal; nullopt when the final point is outside tol (not arrived).
std::optional<int> travel_time(const Trajectory& traj, const Vec2& goal, double tol);

// Maximum consecutive-waypoint displacement.
double max_step_speed(const Trajectory& traj);

// CSV export, one row per step: step,robot_id,x,y.
void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajs);

}  // namespace sid
