#include "sid/constraints.hpp"

#include "sid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sid {

void ReferenceSet::insert(int id, Trajectory traj, double radius) {
    trajectories[id] = std::move(traj);
    radii[id] = radius;
}

ConstraintStack::ConstraintStack(const WorldMap* map, int horizon, double radius, double v_max)
    : map_(map), horizon_(horizon), radius_(radius), v_max_(v_max) {
    if (horizon < 1) throw HorizonTooShort("ConstraintStack: horizon must be >= 1");
    pinned_.assign(static_cast<size_t>(dim()), false);
    fact_pinned_.assign(static_cast<size_t>(dim()), false);
    pin_values_.assign(static_cast<size_t>(dim()), 0.0);
    rebuild_tags();
}

void ConstraintStack::rebuild_tags() {
    tags_.clear();
    tags_.reserve(static_cast<size_t>((horizon_ + 1) + horizon_ +
                                      static_cast<int>(refs_.size()) * (horizon_ + 1)));
    for (int h = 0; h <= horizon_; ++h) {
        tags_.push_back({ResidualKind::Obstacle, h, -1});
    }
    for (int h = 0; h < horizon_; ++h) {
        tags_.push_back({ResidualKind::Speed, h, -1});
    }
    for (const auto& ref : refs_) {
        for (int h = 0; h <= horizon_; ++h) {
            tags_.push_back({ResidualKind::Separation, h, ref.id});
        }
    }
}

int ConstraintStack::num_residuals() const { return static_cast<int>(tags_.size()); }

void ConstraintStack::add_reference(int id, const Trajectory& traj, double radius) {
    if (traj.horizon() != horizon_) {
        throw HorizonMismatch("ConstraintStack: reference horizon != stack horizon");
    }
    Reference ref;
    ref.id = id;
    ref.radius = radius;
    ref.points.resize(2, horizon_ + 1);
    for (int h = 0; h <= horizon_; ++h) ref.points.col(h) = traj.at(h);
    // Keep references ordered by id so residual layout is deterministic.
    auto it = std::upper_bound(refs_.begin(), refs_.end(), id,
                               [](int lhs, const Reference& r) { return lhs < r.id; });
    refs_.insert(it, std::move(ref));
    ref_ids_.clear();
    for (const auto& r : refs_) ref_ids_.push_back(r.id);
    rebuild_tags();
}

void ConstraintStack::pin_point(int step, const Vec2& p, bool fact) {
    if (step < 0 || step > horizon_) throw StepOutOfRange("pin_point: step outside 0..H");
    for (int axis = 0; axis < 2; ++axis) {
        const int c = 2 * step + axis;
        const double v = axis == 0 ? p.x() : p.y();
        if (pinned_[static_cast<size_t>(c)] &&
            std::abs(pin_values_[static_cast<size_t>(c)] - v) > 1e-12) {
            throw ConflictingPins("pin_point: coordinate already pinned to a different value");
        }
        pinned_[static_cast<size_t>(c)] = true;
        if (fact) fact_pinned_[static_cast<size_t>(c)] = true;
        pin_values_[static_cast<size_t>(c)] = v;
    }
}

bool ConstraintStack::row_is_fact(int row) const {
    const auto& tag = tags_[static_cast<size_t>(row)];
    auto fact_at = [&](int step) {
        return fact_pinned_[static_cast<size_t>(2 * step)] &&
               fact_pinned_[static_cast<size_t>(2 * step + 1)];
    };
    switch (tag.kind) {
        case ResidualKind::Obstacle:
        case ResidualKind::Separation:
            return fact_at(tag.step);
        case ResidualKind::Speed:
            return fact_at(tag.step) && fact_at(tag.step + 1);
    }
    return false;
}

double ConstraintStack::free_violation(const FlatTraj& y) const {
    ResidualTag worst;
    return free_violation(y, worst);
}

double ConstraintStack::free_violation(const FlatTraj& y, ResidualTag& worst) const {
    const Eigen::VectorXd r = residuals(y);
    double m = 0.0;
    worst = ResidualTag{};
    for (int i = 0; i < num_residuals(); ++i) {
        if (r[i] <= m || row_is_fact(i)) continue;
        m = r[i];
        worst = tags_[static_cast<size_t>(i)];
    }
    return m;
}

double ConstraintStack::free_violation_of(const Eigen::VectorXd& r) const {
    double m = 0.0;
    for (int i = 0; i < num_residuals(); ++i) {
        if (r[i] > m && !row_is_fact(i)) m = r[i];
    }
    return m;
}

int ConstraintStack::free_dim() const {
    int n = 0;
    for (bool b : pinned_) n += b ? 0 : 1;
    return n;
}

void ConstraintStack::apply_pins(FlatTraj& y) const {
    if (y.size() != dim()) throw DimensionMismatch("apply_pins: dimension mismatch");
    for (int c = 0; c < dim(); ++c) {
        if (pinned_[static_cast<size_t>(c)]) y[c] = pin_values_[static_cast<size_t>(c)];
    }
}

Eigen::VectorXd ConstraintStack::residuals(const FlatTraj& y) const {
    if (y.size() != dim()) throw DimensionMismatch("residuals: dimension mismatch");
    Eigen::VectorXd r(num_residuals());
    int k = 0;
    for (int h = 0; h <= horizon_; ++h) {
        const Vec2 p(y[2 * h], y[2 * h + 1]);
        r[k++] = radius_ - signed_clearance(*map_, p);
    }
    for (int h = 0; h < horizon_; ++h) {
        const Vec2 a(y[2 * h], y[2 * h + 1]);
        const Vec2 b(y[2 * h + 2], y[2 * h + 3]);
        r[k++] = (b - a).norm() - v_max_;
    }
    for (const auto& ref : refs_) {
        for (int h = 0; h <= horizon_; ++h) {
            const Vec2 p(y[2 * h], y[2 * h + 1]);
            r[k++] = (radius_ + ref.radius) - (p - ref.points.col(h)).norm();
        }
    }
    return r;
}

double ConstraintStack::max_violation(const FlatTraj& y) const {
    ResidualTag worst;
    return max_violation(y, worst);
}

double ConstraintStack::max_violation(const FlatTraj& y, ResidualTag& worst) const {
    const Eigen::VectorXd r = residuals(y);
    int idx = 0;
    const double m = r.maxCoeff(&idx);
    worst = tags_[static_cast<size_t>(idx)];
    return std::max(0.0, m);
}

void ConstraintStack::accumulate_weighted_gradient(const FlatTraj& y, const Eigen::VectorXd& w,
                                                   Eigen::VectorXd& grad) const {
    if (w.size() != num_residuals()) {
        throw DimensionMismatch("accumulate_weighted_gradient: weight size");
    }
    int k = 0;
    for (int h = 0; h <= horizon_; ++h, ++k) {
        if (w[k] == 0.0) continue;
        const Vec2 p(y[2 * h], y[2 * h + 1]);
        const Vec2 g = -signed_clearance_gradient(*map_, p);
        grad[2 * h] += w[k] * g.x();
        grad[2 * h + 1] += w[k] * g.y();
    }
    for (int h = 0; h < horizon_; ++h, ++k) {
        if (w[k] == 0.0) continue;
        Vec2 d(y[2 * h + 2] - y[2 * h], y[2 * h + 3] - y[2 * h + 1]);
        const double n = d.norm();
        if (n < 1e-300) continue;  // subgradient 0 at coincident points
        d /= n;
        grad[2 * h + 2] += w[k] * d.x();
        grad[2 * h + 3] += w[k] * d.y();
        grad[2 * h] -= w[k] * d.x();
        grad[2 * h + 1] -= w[k] * d.y();
    }
    for (const auto& ref : refs_) {
        for (int h = 0; h <= horizon_; ++h, ++k) {
            if (w[k] == 0.0) continue;
            Vec2 d(y[2 * h] - ref.points(0, h), y[2 * h + 1] - ref.points(1, h));
            const double n = d.norm();
            if (n < 1e-300) continue;
            d /= n;
            grad[2 * h] -= w[k] * d.x();
            grad[2 * h + 1] -= w[k] * d.y();
        }
    }
}

Eigen::VectorXd ConstraintStack::gradient_row(const FlatTraj& y, int row) const {
    if (row < 0 || row >= num_residuals()) throw DimensionMismatch("gradient_row: bad row");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(num_residuals());
    w[row] = 1.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim());
    accumulate_weighted_gradient(y, w, grad);
    return grad;
}

std::vector<int> ConstraintStack::violating_reference_ids(const FlatTraj& y, double tol) const {
    std::vector<int> out;
    const Eigen::VectorXd r = residuals(y);
    for (int i = 0; i < num_residuals(); ++i) {
        const auto& tag = tags_[static_cast<size_t>(i)];
        if (tag.kind != ResidualKind::Separation || r[i] <= tol || row_is_fact(i)) continue;
        if (std::find(out.begin(), out.end(), tag.ref_id) == out.end()) {
            out.push_back(tag.ref_id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

ConstraintStack build_sim_stack(const WorldMap& map, int j, const ReferenceSet& refs,
                                double radius, double v_max, const Vec2& start, int horizon) {
    ConstraintStack stack(&map, horizon, radius, v_max);
    for (const auto& [id, traj] : refs.trajectories) {
        if (id == j) throw SidError("build_sim_stack: reference set includes the target robot");
        stack.add_reference(id, traj, refs.radii.at(id));
    }
    stack.pin_point(0, start, /*fact=*/true);
    return stack;
}

ConstraintStack build_plan_stack(const WorldMap& map, int i, const ReferenceSet& simulated,
                                 double radius, double v_max, const Vec2& start, int horizon) {
    return build_sim_stack(map, i, simulated, radius, v_max, start, horizon);
}

void add_goal_hold(ConstraintStack& stack, const Vec2& goal, int arrival_step) {
    if (arrival_step < 0 || arrival_step > stack.horizon()) {
        throw StepOutOfRange("add_goal_hold: arrival step outside 0..H");
    }
    for (int h = arrival_step; h <= stack.horizon(); ++h) {
        stack.pin_point(h, goal);
    }
}

StackEvaluation eval_stack(const ConstraintStack& stack, const FlatTraj& y) {
    StackEvaluation ev;
    ev.residuals = stack.residuals(y);
    ev.max_violation = std::max(0.0, ev.residuals.maxCoeff());
    return ev;
}

}  // namespace sid
