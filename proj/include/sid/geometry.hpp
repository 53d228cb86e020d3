#pragma once

#include <Eigen/Core>

#include <vector>

namespace sid {

using Vec2 = Eigen::Vector2d;

// A single static obstacle: circle or axis-aligned rectangle.
struct Obstacle {
    enum class Shape { Circle, Rect };

    Shape shape = Shape::Circle;
    Vec2 center = Vec2::Zero();
    double radius = 0.0;               // circle only
    Vec2 half_extents = Vec2::Zero();  // rect only

    static Obstacle circle(const Vec2& center, double radius);
    static Obstacle rect(const Vec2& center, const Vec2& half_extents);

    // Signed distance from p to the obstacle boundary: positive outside,
    // negative inside. Exact for both shapes.
    double signed_distance(const Vec2& p) const;

    // Gradient of signed_distance wrt p (unit vector away from the
    // obstacle; a fixed subgradient is returned on the medial axis).
    Vec2 signed_distance_gradient(const Vec2& p) const;

    // Conservative check that the footprint touches [lo, hi].
    bool intersects_box(const Vec2& lo, const Vec2& hi) const;
};

// Static environment: rectangular bounds plus an obstacle set. The bounds
// act as an outer obstacle so clearance goes negative outside the map.
struct WorldMap {
    Vec2 lo = Vec2(-1.0, -1.0);
    Vec2 hi = Vec2(1.0, 1.0);
    std::vector<Obstacle> obstacles;

    WorldMap() = default;
    WorldMap(const Vec2& lo, const Vec2& hi, std::vector<Obstacle> obs = {});

    double width() const { return hi.x() - lo.x(); }
    double height() const { return hi.y() - lo.y(); }

    // Distance to the nearest bounds wall, positive inside the map.
    double bounds_clearance(const Vec2& p) const;
    Vec2 bounds_clearance_gradient(const Vec2& p) const;

    void validate() const;  // throws SidError on invariant breaks
};

// Minimum over obstacles and bounds of the signed boundary distance.
// Total and continuous; 1-Lipschitz.
double signed_clearance(const WorldMap& map, const Vec2& p);

// Subgradient of signed_clearance (gradient of the active minimizer).
Vec2 signed_clearance_gradient(const WorldMap& map, const Vec2& p);

}  // namespace sid
