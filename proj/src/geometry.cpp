#include "sid/geometry.hpp"

#include "sid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sid {

Obstacle Obstacle::circle(const Vec2& center, double radius) {
    Obstacle o;
    o.shape = Shape::Circle;
    o.center = center;
    o.radius = radius;
    return o;
}

Obstacle Obstacle::rect(const Vec2& center, const Vec2& half_extents) {
    Obstacle o;
    o.shape = Shape::Rect;
    o.center = center;
    o.half_extents = half_extents;
    return o;
}

double Obstacle::signed_distance(const Vec2& p) const {
    if (shape == Shape::Circle) {
        return (p - center).norm() - radius;
    }
    // Axis-aligned rectangle: q holds the per-axis distance past the face.
    const Vec2 q = (p - center).cwiseAbs() - half_extents;
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(std::max(q.x(), q.y()), 0.0);
    return outside + inside;
}

Vec2 Obstacle::signed_distance_gradient(const Vec2& p) const {
    if (shape == Shape::Circle) {
        const Vec2 d = p - center;
        const double n = d.norm();
        if (n < 1e-300) return Vec2(1.0, 0.0);  // subgradient at the center
        return d / n;
    }
    const Vec2 d = p - center;
    const Vec2 q = d.cwiseAbs() - half_extents;
    const Vec2 sgn(d.x() >= 0.0 ? 1.0 : -1.0, d.y() >= 0.0 ? 1.0 : -1.0);
    if (q.x() > 0.0 && q.y() > 0.0) {
        // Past a corner: smooth radial distance to the corner point.
        const Vec2 qp = q.cwiseMax(0.0);
        return (qp / qp.norm()).cwiseProduct(sgn);
    }
    // Nearest face is along the axis with the larger (less negative) q.
    if (q.x() >= q.y()) return Vec2(sgn.x(), 0.0);
    return Vec2(0.0, sgn.y());
}

bool Obstacle::intersects_box(const Vec2& lo, const Vec2& hi) const {
    Vec2 r = shape == Shape::Circle ? Vec2(radius, radius) : half_extents;
    return center.x() + r.x() >= lo.x() && center.x() - r.x() <= hi.x() &&
           center.y() + r.y() >= lo.y() && center.y() - r.y() <= hi.y();
}

WorldMap::WorldMap(const Vec2& lo_, const Vec2& hi_, std::vector<Obstacle> obs)
    : lo(lo_), hi(hi_), obstacles(std::move(obs)) {}

double WorldMap::bounds_clearance(const Vec2& p) const {
    const double dx = std::min(p.x() - lo.x(), hi.x() - p.x());
    const double dy = std::min(p.y() - lo.y(), hi.y() - p.y());
    return std::min(dx, dy);
}

Vec2 WorldMap::bounds_clearance_gradient(const Vec2& p) const {
    const double dxl = p.x() - lo.x(), dxh = hi.x() - p.x();
    const double dyl = p.y() - lo.y(), dyh = hi.y() - p.y();
    const double m = std::min(std::min(dxl, dxh), std::min(dyl, dyh));
    if (m == dxl) return Vec2(1.0, 0.0);
    if (m == dxh) return Vec2(-1.0, 0.0);
    if (m == dyl) return Vec2(0.0, 1.0);
    return Vec2(0.0, -1.0);
}

void WorldMap::validate() const {
    if (!(width() > 0.0) || !(height() > 0.0)) {
        throw SidError("WorldMap: bounds must have positive extent");
    }
    for (const auto& o : obstacles) {
        if (o.shape == Obstacle::Shape::Circle && !(o.radius > 0.0)) {
            throw SidError("Obstacle: circle radius must be positive");
        }
        if (o.shape == Obstacle::Shape::Rect &&
            (!(o.half_extents.x() > 0.0) || !(o.half_extents.y() > 0.0))) {
            throw SidError("Obstacle: rect half-extents must be positive");
        }
        if (!o.intersects_box(lo, hi)) {
            throw SidError("Obstacle: footprint does not intersect map bounds");
        }
    }
}

double signed_clearance(const WorldMap& map, const Vec2& p) {
    double d = map.bounds_clearance(p);
    for (const auto& o : map.obstacles) {
        d = std::min(d, o.signed_distance(p));
    }
    return d;
}

Vec2 signed_clearance_gradient(const WorldMap& map, const Vec2& p) {
    double best = map.bounds_clearance(p);
    int best_idx = -1;
    for (int i = 0; i < static_cast<int>(map.obstacles.size()); ++i) {
        const double d = map.obstacles[i].signed_distance(p);
        if (d < best) {
            best = d;
            best_idx = i;
        }
    }
    if (best_idx < 0) return map.bounds_clearance_gradient(p);
    return map.obstacles[best_idx].signed_distance_gradient(p);
}

}  // namespace sid
