#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sid/constraints.hpp"
#include "sid/errors.hpp"
#include "sid/scenario.hpp"

#include <random>

using namespace sid;

namespace {

constexpr double kRadius = 0.03;
constexpr double kVmax = 0.05;

FlatTraj random_flat(int horizon, std::mt19937_64& rng, double scale = 0.9) {
    std::uniform_real_distribution<double> u(-scale, scale);
    FlatTraj x(2 * (horizon + 1));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
    return x;
}

Trajectory random_walk(const Vec2& start, int horizon, double step, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, step);
    std::vector<Vec2> pts{start};
    for (int h = 0; h < horizon; ++h) {
        pts.push_back(pts.back() + Vec2(n(rng), n(rng)));
    }
    return Trajectory(std::move(pts));
}

}  // namespace

TEST_CASE("empty reference set: residual counts follow the stack layout") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 16;
    auto stack = build_sim_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(0, 0), H);
    CHECK(stack.num_residuals() == (H + 1) + H);
    int obstacle = 0, speed = 0, separation = 0;
    for (const auto& tag : stack.tags()) {
        if (tag.kind == ResidualKind::Obstacle) ++obstacle;
        if (tag.kind == ResidualKind::Speed) ++speed;
        if (tag.kind == ResidualKind::Separation) ++separation;
    }
    CHECK(obstacle == H + 1);
    CHECK(speed == H);
    CHECK(separation == 0);
}

TEST_CASE("residual tag counts for random neighborhood sizes 0..8") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 8;
    std::mt19937_64 rng(2);
    for (int n = 0; n <= 8; ++n) {
        ReferenceSet refs;
        for (int l = 0; l < n; ++l) {
            refs.insert(l + 1, random_walk(Vec2(0.2, 0.2), H, 0.01, rng), kRadius);
        }
        auto stack = build_sim_stack(map, 0, refs, kRadius, kVmax, Vec2(0, 0), H);
        CHECK(stack.num_residuals() == (H + 1) + H + n * (H + 1));
        CHECK(static_cast<int>(stack.reference_ids().size()) == n);
    }
}

TEST_CASE("separation residual arithmetic: parked reference at contact distance") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 4;
    ReferenceSet refs;
    refs.insert(7, parked(Vec2(0, 0), H), kRadius);
    auto stack = build_sim_stack(map, 0, refs, kRadius, kVmax, Vec2(0.04, 0), H);
    // Candidate trajectory parked at (0.04, 0): separation residual at every
    // step is 0.06 - 0.04 = +0.02 (violated).
    const FlatTraj y = flatten(parked(Vec2(0.04, 0), H));
    const auto ev = eval_stack(stack, y);
    int row = 0;
    for (const auto& tag : stack.tags()) {
        if (tag.kind == ResidualKind::Separation) {
            CHECK(ev.residuals[row] == doctest::Approx(0.02).epsilon(1e-12));
        }
        ++row;
    }
    CHECK(ev.max_violation == doctest::Approx(0.02));
}

TEST_CASE("feasible straight line in empty map: all residuals nonpositive") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 16;
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(-0.4, 0), H);
    const auto line = straight_line(Vec2(-0.4, 0), Vec2(0.4, 0), H);  // speed 0.05
    CHECK(max_step_speed(line) <= kVmax + 1e-12);
    const auto ev = eval_stack(stack, flatten(line));
    CHECK(ev.max_violation == doctest::Approx(0.0));
    CHECK(ev.residuals.maxCoeff() <= 1e-12);
}

TEST_CASE("eval_stack max violation equals direct per-step checking on 500 random cases") {
    std::mt19937_64 rng(3);
    auto inst = generate_instance(MapFamily::Basic, 3, 21);
    const int H = 12;
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int trial = 0; trial < 500; ++trial) {
        // Mix of near-feasible walks and wild trajectories.
        Trajectory traj = (trial % 2 == 0)
                              ? random_walk(Vec2(u(rng), u(rng)), H, 0.02, rng)
                              : unflatten(random_flat(H, rng));
        ReferenceSet refs;
        std::vector<std::pair<Trajectory, double>> oracle_refs;
        const int n_refs = static_cast<int>(rng() % 3);
        for (int l = 0; l < n_refs; ++l) {
            Trajectory ref = random_walk(Vec2(u(rng), u(rng)), H, 0.02, rng);
            refs.insert(10 + l, ref, kRadius);
            oracle_refs.emplace_back(ref, kRadius);
        }
        auto stack = build_sim_stack(inst.map, 0, refs, kRadius, kVmax, traj.at(0), H);
        const auto ev = eval_stack(stack, flatten(traj));
        const bool stack_feasible = ev.max_violation == 0.0;
        const bool direct = oracles::eq2_feasible(inst.map, traj, kRadius, kVmax, oracle_refs);
        CHECK(stack_feasible == direct);
    }
}

TEST_CASE("residual gradients match central finite differences") {
    std::mt19937_64 rng(4);
    auto inst = generate_instance(MapFamily::Basic, 3, 9);
    const int H = 6;
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 120; ++trial) {
        ReferenceSet refs;
        refs.insert(5, random_walk(Vec2(0.1, 0.1), H, 0.02, rng), kRadius);
        auto stack = build_sim_stack(inst.map, 0, refs, kRadius, kVmax, Vec2(0, 0), H);
        const FlatTraj y = random_flat(H, rng);
        for (int row = 0; row < stack.num_residuals(); row += 3) {
            auto f = [&](const Eigen::VectorXd& x) { return stack.residuals(x)[row]; };
            const Eigen::VectorXd fd = oracles::finite_difference(f, y);
            const Eigen::VectorXd an = stack.gradient_row(y, row);
            // Obstacle rows sit on a medial axis when the two-sided stencil
            // straddles the minimizing obstacle; the averaged fd direction
            // then has norm != 1 and the row is skipped.
            if (stack.tags()[static_cast<size_t>(row)].kind == ResidualKind::Obstacle &&
                std::abs(fd.norm() - 1.0) > 1e-4) {
                continue;
            }
            CHECK((an - fd).norm() <= 1e-5 * std::max(1.0, an.norm()) + 1e-7);
            ++checked;
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("goal-hold pins: counts and free-variable elimination") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 64;
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(-0.5, 0), H);
    const int free_before = stack.free_dim();
    CHECK(free_before == 2 * (H + 1) - 2);  // start pin already applied

    add_goal_hold(stack, Vec2(0.5, 0), 40);
    // Steps 40..64 pinned: 25 steps, 50 scalars.
    CHECK(free_before - stack.free_dim() == 50);

    FlatTraj y = FlatTraj::Zero(stack.dim());
    stack.apply_pins(y);
    for (int h = 40; h <= H; ++h) {
        CHECK(y[2 * h] == doctest::Approx(0.5));
        CHECK(y[2 * h + 1] == doctest::Approx(0.0));
    }
    CHECK(y[0] == doctest::Approx(-0.5));
}

TEST_CASE("goal-hold: a == H pins exactly the final step") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 8;
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(-0.5, 0), H);
    const int free_before = stack.free_dim();
    add_goal_hold(stack, Vec2(0.5, 0), H);
    CHECK(free_before - stack.free_dim() == 2);
}

TEST_CASE("goal-hold: a == 0 with start != goal raises ConflictingPins") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(-0.5, 0), 8);
    CHECK_THROWS_AS(add_goal_hold(stack, Vec2(0.5, 0), 0), ConflictingPins);
    // Consistent pins are fine.
    auto stack2 = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(0.5, 0), 8);
    CHECK_NOTHROW(add_goal_hold(stack2, Vec2(0.5, 0), 0));
}

TEST_CASE("horizon mismatch between stack and reference") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    ReferenceSet refs;
    refs.insert(3, parked(Vec2(0, 0), 8), kRadius);
    CHECK_THROWS_AS(build_sim_stack(map, 0, refs, kRadius, kVmax, Vec2(0.5, 0), 16),
                    HorizonMismatch);
}

TEST_CASE("eval_stack rejects wrong dimensions") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(0, 0), 8);
    CHECK_THROWS_AS(eval_stack(stack, FlatTraj::Zero(4)), DimensionMismatch);
}

TEST_CASE("obstacle residual arithmetic: point 0.01 inside an obstacle") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    map.obstacles.push_back(Obstacle::circle(Vec2(0.5, 0), 0.2));
    const int H = 1;
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(0.31, 0), H);
    // Point at distance 0.19 from the circle center: 0.01 inside the
    // boundary, so clearance is -0.01 and the residual is r + 0.01 = 0.04.
    const FlatTraj y = flatten(parked(Vec2(0.31, 0), H));
    const auto ev = eval_stack(stack, y);
    CHECK(ev.residuals[0] == doctest::Approx(0.04).epsilon(1e-9));
}

TEST_CASE("fact-pinned rows are excluded from free violation but not from eval") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 4;
    ReferenceSet refs;
    refs.insert(1, parked(Vec2(0.0, 0.0), H), kRadius);
    // Start pinned 0.05 from the parked reference: separation at step 0 is
    // violated but unfixable (a fact), later steps can escape.
    auto stack = build_sim_stack(map, 0, refs, kRadius, kVmax, Vec2(0.05, 0), H);
    FlatTraj y = flatten(straight_line(Vec2(0.05, 0), Vec2(0.25, 0), H));
    stack.apply_pins(y);
    CHECK(stack.max_violation(y) > 0.0);        // full eval reports the fact
    CHECK(stack.free_violation(y) == doctest::Approx(0.0));  // solver view
}
