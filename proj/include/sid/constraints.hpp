#pragma once

#include "sid/geometry.hpp"
#include "sid/trajectory.hpp"

#include <map>
#include <vector>

namespace sid {

// Inequality residual tags. Residuals are stored in tag order:
// obstacle h=0..H, speed h=0..H-1, then separation per reference
// (references in ascending robot id), h=0..H each.
enum class ResidualKind { Obstacle, Speed, Separation };

struct ResidualTag {
    ResidualKind kind = ResidualKind::Obstacle;
    int step = 0;
    int ref_id = -1;  // robot id of the reference for separation residuals
};

// Fixed trajectories other robots are expected to follow (simulated,
// communicated, or stored from the previous round), keyed by robot id.
struct ReferenceSet {
    std::map<int, Trajectory> trajectories;
    std::map<int, double> radii;

    bool empty() const { return trajectories.empty(); }
    void insert(int id, Trajectory traj, double radius);
};

// Differentiable inequality stack h(y) <= 0 over a flat trajectory, plus
// equality pins (start, goal-holding) enforced by variable elimination:
// pinned coordinates are excluded from the free variables, never penalized.
class ConstraintStack {
public:
    ConstraintStack() = default;
    ConstraintStack(const WorldMap* map, int horizon, double radius, double v_max);

    int horizon() const { return horizon_; }
    int dim() const { return 2 * (horizon_ + 1); }
    int num_residuals() const;
    const std::vector<ResidualTag>& tags() const { return tags_; }

    double radius() const { return radius_; }
    double v_max() const { return v_max_; }
    const WorldMap* map() const { return map_; }

    // References this stack separates against (id order fixed at build).
    const std::vector<int>& reference_ids() const { return ref_ids_; }

    void add_reference(int id, const Trajectory& traj, double radius);

    // Equality pins. Throws ConflictingPins when a coordinate is pinned
    // twice with different values. A "fact" pin marks coordinates that
    // record the present state (the start position) rather than a planning
    // choice; residuals supported entirely on fact pins are constants the
    // solver can neither violate nor repair, so feasibility accounting
    // skips them.
    void pin_point(int step, const Vec2& p, bool fact = false);
    bool is_pinned(int coord) const { return pinned_[static_cast<size_t>(coord)]; }
    int free_dim() const;
    void apply_pins(FlatTraj& y) const;

    // True when every coordinate the residual row touches is fact-pinned.
    bool row_is_fact(int row) const;

    // max(0, max residual) over rows the solver can actually influence;
    // this is the projection solver's convergence measure.
    double free_violation(const FlatTraj& y) const;
    double free_violation(const FlatTraj& y, ResidualTag& worst) const;
    double free_violation_of(const Eigen::VectorXd& residuals) const;

    // All inequality residuals in tag order (feasible iff every entry <= 0).
    Eigen::VectorXd residuals(const FlatTraj& y) const;

    // max(0, max residual); 0 means feasible.
    double max_violation(const FlatTraj& y) const;
    // Same, but also reports the argmax tag.
    double max_violation(const FlatTraj& y, ResidualTag& worst) const;

    // Accumulates sum_r w_r * grad h_r(y) in one pass. Used by the
    // projection solver; w typically holds nu + rho*max(0, h).
    void accumulate_weighted_gradient(const FlatTraj& y, const Eigen::VectorXd& w,
                                      Eigen::VectorXd& grad) const;

    // Dense gradient of one residual row (test/diagnostic path).
    Eigen::VectorXd gradient_row(const FlatTraj& y, int row) const;

    // Separation residuals above tol at y, reported as reference robot ids
    // (bottleneck candidates for the communication mechanism).
    std::vector<int> violating_reference_ids(const FlatTraj& y, double tol) const;

private:
    struct Reference {
        int id = -1;
        double radius = 0.0;
        Eigen::Matrix2Xd points;  // H+1 columns
    };

    const WorldMap* map_ = nullptr;
    int horizon_ = 0;
    double radius_ = 0.0;
    double v_max_ = 0.0;
    std::vector<Reference> refs_;
    std::vector<int> ref_ids_;
    std::vector<ResidualTag> tags_;
    std::vector<bool> pinned_;
    std::vector<bool> fact_pinned_;
    std::vector<double> pin_values_;

    void rebuild_tags();
};

// Constraint set for simulating neighbor j (Eq.-8 shape): obstacle
// clearance, speed bound, separation against the other neighbors' stored
// trajectories, start pinned at j's observed position.
ConstraintStack build_sim_stack(const WorldMap& map, int j, const ReferenceSet& refs,
                                double radius, double v_max, const Vec2& start, int horizon);

// Robot i's own planning constraint set; separation references are the
// freshly simulated neighbor trajectories.
ConstraintStack build_plan_stack(const WorldMap& map, int i, const ReferenceSet& simulated,
                                 double radius, double v_max, const Vec2& start, int horizon);

// Appends goal-holding pins p^h = goal for h = a..H.
void add_goal_hold(ConstraintStack& stack, const Vec2& goal, int arrival_step);

// Full evaluation: residual vector, max violation.
struct StackEvaluation {
    Eigen::VectorXd residuals;
    double max_violation = 0.0;
};
StackEvaluation eval_stack(const ConstraintStack& stack, const FlatTraj& y);

}  // namespace sid
