#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sid/errors.hpp"
#include "sid/rng.hpp"
#include "sid/scenario.hpp"

#include <algorithm>
#include <random>

using namespace sid;

TEST_CASE("signed clearance: circle obstacles") {
    WorldMap map(Vec2(-2, -2), Vec2(2, 2));
    map.obstacles.push_back(Obstacle::circle(Vec2(1, 0), 0.2));
    CHECK(signed_clearance(map, Vec2(0, 0)) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(signed_clearance(map, Vec2(1, 0)) == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("signed clearance: rectangle matches dense boundary oracle") {
    WorldMap map(Vec2(-2, -2), Vec2(2, 2));
    map.obstacles.push_back(Obstacle::rect(Vec2(0, 0), Vec2(0.1, 0.5)));
    const Vec2 p(0.05, 0.30);
    CHECK(signed_clearance(map, p) == doctest::Approx(-0.05).epsilon(1e-9));
    const double oracle = oracles::rect_boundary_distance(p, Vec2(0, 0), Vec2(0.1, 0.5));
    CHECK(std::abs(signed_clearance(map, p)) == doctest::Approx(oracle).epsilon(1e-3));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 50; ++i) {
        const Vec2 q(u(rng), u(rng));
        const double d = map.obstacles[0].signed_distance(q);
        if (d <= 1e-6) continue;  // oracle sampling is exterior-exact only
        const double o = oracles::rect_boundary_distance(q, Vec2(0, 0), Vec2(0.1, 0.5));
        CHECK(d == doctest::Approx(o).epsilon(1e-3));
    }
}

TEST_CASE("signed clearance: bounds act as outer obstacle") {
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    CHECK(signed_clearance(map, Vec2(0, 0)) == doctest::Approx(1.0));
    CHECK(signed_clearance(map, Vec2(0.9, 0)) == doctest::Approx(0.1));
    CHECK(signed_clearance(map, Vec2(1.2, 0)) == doctest::Approx(-0.2));
}

TEST_CASE("signed clearance is 1-Lipschitz along segments") {
    auto inst = generate_instance(MapFamily::Dense, 3, 11);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec2 a(u(rng), u(rng)), b(u(rng), u(rng));
        const double da = signed_clearance(inst.map, a);
        const double db = signed_clearance(inst.map, b);
        const double dist = (a - b).norm();
        if (dist < 1e-9) continue;
        CHECK(std::abs(da - db) / dist <= 1.0 + 1e-6);
    }
}

TEST_CASE("clearance gradient matches finite differences away from kinks") {
    auto inst = generate_instance(MapFamily::Basic, 3, 5);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 100; ++trial) {
        const Vec2 p(u(rng), u(rng));
        auto f = [&](const Eigen::VectorXd& x) {
            return signed_clearance(inst.map, Vec2(x[0], x[1]));
        };
        Eigen::VectorXd x(2);
        x << p.x(), p.y();
        const Eigen::VectorXd fd = oracles::finite_difference(f, x);
        if (std::abs(fd.norm() - 1.0) > 1e-4) continue;  // medial axis
        const Vec2 g = signed_clearance_gradient(inst.map, p);
        CHECK((g - Vec2(fd[0], fd[1])).norm() < 1e-5);
        ++checked;
    }
    CHECK(checked >= 50);
}

TEST_CASE("generate_instance: determinism and family parameters") {
    auto a = generate_instance(MapFamily::Basic, 3, 7);
    auto b = generate_instance(MapFamily::Basic, 3, 7);
    CHECK(scenario_to_json(a) == scenario_to_json(b));
    CHECK(a.map.obstacles.size() == 10);
    CHECK(a.map.width() == doctest::Approx(2.0));
    CHECK(a.robot_radius == doctest::Approx(0.03));

    auto dense = generate_instance(MapFamily::Dense, 9, 42);
    CHECK(dense.map.obstacles.size() == 20);

    auto room = generate_instance(MapFamily::Room, 3, 1);
    REQUIRE(room.map.obstacles.size() == 2);
    for (const auto& o : room.map.obstacles) {
        CHECK(o.shape == Obstacle::Shape::Rect);
        CHECK(2.0 * o.half_extents.minCoeff() == doctest::Approx(0.2));
        CHECK(2.0 * o.half_extents.maxCoeff() == doctest::Approx(1.0));
    }
    auto shelf = generate_instance(MapFamily::Shelf, 3, 1);
    REQUIRE(shelf.map.obstacles.size() == 2);

    for (const auto& o : a.map.obstacles) {
        const double size = o.shape == Obstacle::Shape::Circle ? 2.0 * o.radius
                                                               : 2.0 * o.half_extents.x();
        CHECK(size >= 0.1);
        CHECK(size <= 0.2);
    }
}

TEST_CASE("generate_instance: start/goal clearance verified with the clearance oracle") {
    auto inst = generate_instance(MapFamily::Basic, 3, 7);
    for (const auto& p : inst.starts) CHECK(signed_clearance(inst.map, p) >= 0.03);
    for (const auto& p : inst.goals) CHECK(signed_clearance(inst.map, p) >= 0.03);
}

TEST_CASE("generate_instance invariants hold for 100 seeds per family") {
    for (auto family :
         {MapFamily::Basic, MapFamily::Dense, MapFamily::Room, MapFamily::Shelf}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto inst = generate_instance(family, 4, seed);
            CHECK_NOTHROW(inst.validate());
        }
    }
}

TEST_CASE("generate_instance: over-dense configuration raises PlacementFailure") {
    GenerateOptions opt;
    opt.map_size = 0.4;
    opt.obstacle_count = 0;
    opt.max_attempts = 200;
    CHECK_THROWS_AS(generate_instance(MapFamily::Basic, 30, 1, opt), PlacementFailure);
}

TEST_CASE("observe: pairwise ranges") {
    auto inst = generate_instance(MapFamily::Basic, 2, 3);
    std::vector<Vec2> close{Vec2(0.6, 0.62), Vec2(0.6, 0.22)};  // 0.4 apart
    CHECK(observe(inst, close, 0, 0.5).neighbor_ids == std::vector<int>{1});
    CHECK(observe(inst, close, 1, 0.5).neighbor_ids == std::vector<int>{0});

    std::vector<Vec2> far{Vec2(-0.6, 0.0), Vec2(0.6, 0.0)};  // 1.2 apart
    CHECK(observe(inst, far, 0, 0.5).neighbor_ids.empty());
    CHECK(observe(inst, far, 1, 0.5).neighbor_ids.empty());
}

TEST_CASE("observe matches brute-force distance filter and is symmetric") {
    auto inst = generate_instance(MapFamily::Basic, 3, 7);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    std::uniform_real_distribution<double> ru(0.1, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec2> pos;
        for (int i = 0; i < 3; ++i) pos.emplace_back(u(rng), u(rng));
        const double range = ru(rng);
        std::vector<Observation> obs;
        for (int i = 0; i < 3; ++i) obs.push_back(observe(inst, pos, i, range));
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                const bool expected = (pos[static_cast<size_t>(i)] -
                                       pos[static_cast<size_t>(j)]).norm() <= range;
                auto has = [&](int a, int b) {
                    const auto& ids = obs[static_cast<size_t>(a)].neighbor_ids;
                    return std::find(ids.begin(), ids.end(), b) != ids.end();
                };
                CHECK(has(i, j) == expected);
                CHECK(has(i, j) == has(j, i));
            }
        }
    }
}

TEST_CASE("scenario JSON round-trip is lossless") {
    auto inst = generate_instance(MapFamily::Shelf, 5, 99);
    const std::string text = scenario_to_json(inst);
    auto back = scenario_from_json(text);
    CHECK(scenario_to_json(back) == text);
    REQUIRE(back.starts.size() == inst.starts.size());
    for (size_t i = 0; i < inst.starts.size(); ++i) {
        CHECK(back.starts[i] == inst.starts[i]);  // bit-exact round-trip
        CHECK(back.goals[i] == inst.goals[i]);
    }
}

TEST_CASE("map validation rejects broken inputs") {
    WorldMap bad(Vec2(1, 1), Vec2(-1, -1));
    CHECK_THROWS_AS(bad.validate(), SidError);
    WorldMap map(Vec2(-1, -1), Vec2(1, 1));
    map.obstacles.push_back(Obstacle::circle(Vec2(5, 5), 0.1));
    CHECK_THROWS_AS(map.validate(), SidError);
}
