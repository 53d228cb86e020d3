#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sid/projection.hpp"
#include "sid/scenario.hpp"

#include <random>

using namespace sid;

namespace {

constexpr double kRadius = 0.03;
constexpr double kVmax = 0.05;

FlatTraj perturbed_line(const Vec2& a, const Vec2& b, int H, double sigma,
                        std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, sigma);
    FlatTraj x = flatten(straight_line(a, b, H));
    for (Eigen::Index i = 2; i < x.size(); ++i) x[i] += n(rng);  // keep the start pin intact
    return x;
}

}  // namespace

TEST_CASE("projection identity on already-feasible input") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 16;
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(-0.4, 0), H);
    const FlatTraj x = flatten(straight_line(Vec2(-0.4, 0), Vec2(0.4, 0), H));
    auto res = project(stack, x, ProjectionConfig{});
    CHECK(res.converged);
    CHECK((res.y - x).norm() <= 1e-9);
    CHECK(res.max_violation == doctest::Approx(0.0));
}

TEST_CASE("1D halfspace stand-in: single active constraint projects to the boundary") {
    // Speed constraint as the halfspace analogue: 2 points pinned at one
    // end, the free end must move to distance v_max.
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 1;
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, 1.0, Vec2(0, 0), H);
    FlatTraj x(4);
    x << 0.0, 0.0, 1.2, 0.0;  // step length 1.2 > v_max = 1.0
    auto res = project(stack, x, ProjectionConfig{});
    CHECK(res.converged);
    // Analytic halfspace oracle: free endpoint moves to x = 1.0.
    CHECK(res.y[2] == doctest::Approx(1.0).epsilon(2e-4));
    CHECK(std::abs(res.y[3]) < 1e-6);
}

TEST_CASE("circle obstacle: interior point projects radially to clearance") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    map.obstacles.push_back(Obstacle::circle(Vec2(0, 0), 0.2));
    const int H = 1;
    // Start pin far away, second point 0.01 inside the needed clearance
    // ring (distance 0.22 needed, point at 0.21 from center).
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, 1.0, Vec2(0.8, 0), H);
    FlatTraj x(4);
    x << 0.8, 0.0, 0.21, 0.0;
    auto res = project(stack, x, ProjectionConfig{});
    CHECK(res.converged);
    // Closed-form radial projection: the point moves outward along +x to
    // the ring radius 0.2 + 0.03 (within tolerance).
    const double dist = Vec2(res.y[2], res.y[3]).norm();
    CHECK(dist >= 0.23 - 2e-4);
    CHECK(std::abs(res.y[3]) < 1e-6);  // stays on the radial direction
}

TEST_CASE("convex proximity: speed-only stacks match the Dykstra oracle within 1e-4") {
    WorldMap map(Vec2(-10, -10), Vec2(10, 10));  // bounds never active
    const int H = 4;                              // 5-step toy trajectories
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 start(u(rng), u(rng));
        auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, start, H);
        FlatTraj x(2 * (H + 1));
        x[0] = start.x();
        x[1] = start.y();
        for (Eigen::Index i = 2; i < x.size(); ++i) x[i] = u(rng);

        ProjectionConfig cfg;
        cfg.outer_rounds = 40;  // convex case: let the multipliers settle
        cfg.inner_steps = 200;
        auto res = project(stack, x, cfg);
        REQUIRE(res.converged);

        const Eigen::VectorXd oracle = oracles::dykstra_speed_projection(
            x, H, kVmax, {{0, start.x()}, {1, start.y()}});
        const double d_solver = (res.y - x).norm();
        const double d_oracle = (oracle - x).norm();
        CHECK(std::abs(d_solver - d_oracle) <= 1e-4);
    }
}

TEST_CASE("violation never increases over 1000 randomized pairs") {
    std::mt19937_64 rng(7);
    auto inst = generate_instance(MapFamily::Basic, 3, 77);
    const int H = 12;
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec2 a(u(rng), u(rng)), b(u(rng), u(rng));
        ReferenceSet refs;
        if (trial % 3 == 0) {
            refs.insert(4, straight_line(Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), H),
                        kRadius);
        }
        auto stack = build_sim_stack(inst.map, 0, refs, kRadius, kVmax, a, H);
        FlatTraj x = perturbed_line(a, b, H, 0.05, rng);
        stack.apply_pins(x);
        const double before = stack.free_violation(x);
        ProjectionConfig cfg;
        cfg.outer_rounds = 3;  // deliberately small budget
        cfg.inner_steps = 12;
        auto res = project(stack, x, cfg);
        CHECK(res.max_violation <= before + 1e-12);
    }
}

TEST_CASE("monotone duals: multipliers stay nonnegative (boundary-riding case)") {
    // The dual update nu <- max(0, nu + rho h) keeps nu >= 0 by
    // construction; this exercises it through a projection that rides the
    // constraint boundary, then verifies convergence.
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    map.obstacles.push_back(Obstacle::circle(Vec2(0, 0), 0.3));
    const int H = 24;
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(-0.7, 0.0), H);
    std::mt19937_64 rng(9);
    FlatTraj x = perturbed_line(Vec2(-0.7, 0.0), Vec2(0.7, 0.0), H, 0.02, rng);
    auto res = project(stack, x, ProjectionConfig{});
    CHECK(res.converged);
    CHECK(res.max_violation <= 1e-4);
}

TEST_CASE("is_feasible agrees with eval_stack max violation on 500 random cases") {
    std::mt19937_64 rng(13);
    auto inst = generate_instance(MapFamily::Dense, 3, 5);
    const int H = 8;
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int trial = 0; trial < 500; ++trial) {
        const Vec2 a(u(rng), u(rng));
        auto stack = build_sim_stack(inst.map, 0, ReferenceSet{}, kRadius, kVmax, a, H);
        FlatTraj x = perturbed_line(a, Vec2(u(rng), u(rng)), H, 0.03, rng);
        const double tol = 1e-4;
        CHECK(is_feasible(stack, x, tol) == (eval_stack(stack, x).max_violation <= tol));
    }
}

TEST_CASE("speed violation flagged: one 0.06 step against v_max 0.05") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    const int H = 2;
    auto stack = build_plan_stack(map, 0, ReferenceSet{}, kRadius, kVmax, Vec2(0, 0), H);
    FlatTraj x(6);
    x << 0.0, 0.0, 0.06, 0.0, 0.08, 0.0;
    CHECK_FALSE(is_feasible(stack, x, 1e-4));
    CHECK(is_feasible(stack, flatten(straight_line(Vec2(0, 0), Vec2(0.08, 0), H)), 1e-4));
}

TEST_CASE("feasibility preservation on 200 randomized feasible inputs") {
    std::mt19937_64 rng(23);
    auto inst = generate_instance(MapFamily::Basic, 3, 3);
    const int H = 10;
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    int done = 0;
    for (int trial = 0; trial < 2000 && done < 200; ++trial) {
        const Vec2 a(u(rng), u(rng));
        auto stack = build_sim_stack(inst.map, 0, ReferenceSet{}, kRadius, kVmax, a, H);
        FlatTraj x = perturbed_line(a, a + Vec2(u(rng) * 0.3, u(rng) * 0.3), H, 0.005, rng);
        stack.apply_pins(x);
        if (stack.free_violation(x) > 0.0) continue;
        auto res = project(stack, x, ProjectionConfig{});
        CHECK((res.y - x).norm() <= 1e-9);
        ++done;
    }
    CHECK(done == 200);
}
