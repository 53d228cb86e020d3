#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sid/errors.hpp"
#include "sid/trajectory.hpp"

#include <random>
#include <sstream>

using namespace sid;

namespace {

Trajectory random_traj(int horizon, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<Vec2> pts;
    for (int h = 0; h <= horizon; ++h) pts.emplace_back(u(rng), u(rng));
    return Trajectory(std::move(pts));
}

}  // namespace

TEST_CASE("flatten/unflatten round-trip on randomized trajectories") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const int H = 1 + static_cast<int>(rng() % 64);
        Trajectory t = random_traj(H, rng);
        Trajectory back = unflatten(flatten(t));
        REQUIRE(back.horizon() == H);
        for (int h = 0; h <= H; ++h) {
            CHECK(back.at(h) == t.at(h));
        }
    }
}

TEST_CASE("flat layout is row-major interleaved") {
    Trajectory t(std::vector<Vec2>{Vec2(1, 2), Vec2(3, 4)});
    const FlatTraj f = flatten(t);
    REQUIRE(f.size() == 4);
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 2.0);
    CHECK(f[2] == 3.0);
    CHECK(f[3] == 4.0);
}

TEST_CASE("smoothness: constant-velocity line vanishes") {
    for (double dt : {0.5, 1.0, 2.0}) {
        CHECK(smoothness(straight_line(Vec2(0, 0), Vec2(1, 1), 10), dt) ==
              doctest::Approx(0.0));
    }
}

TEST_CASE("smoothness: hand-evaluated kink equals 2") {
    Trajectory t(std::vector<Vec2>{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1)});
    // Second difference (1,1) - 2(1,0) + (0,0) = (-1,1); squared norm 2.
    CHECK(smoothness(t, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("smoothness: quadratic homogeneity under coordinate doubling") {
    std::mt19937_64 rng(2);
    Trajectory t = random_traj(16, rng);
    Trajectory doubled = t;
    for (auto& p : doubled.points) p *= 2.0;
    CHECK(smoothness(doubled) == doctest::Approx(4.0 * smoothness(t)).epsilon(1e-12));
}

TEST_CASE("smoothness: invariant under global translation") {
    std::mt19937_64 rng(3);
    Trajectory t = random_traj(32, rng);
    Trajectory moved = t;
    for (auto& p : moved.points) p += Vec2(0.37, -1.4);
    CHECK(smoothness(moved) == doctest::Approx(smoothness(t)).epsilon(1e-9));
}

TEST_CASE("smoothness: requires H >= 2") {
    Trajectory t(std::vector<Vec2>{Vec2(0, 0), Vec2(1, 0)});
    CHECK_THROWS_AS(smoothness(t), HorizonTooShort);
}

TEST_CASE("travel_time: settles at goal from step 40") {
    const Vec2 goal(0.5, 0.5);
    std::vector<Vec2> pts;
    for (int h = 0; h <= 64; ++h) {
        pts.push_back(h < 40 ? Vec2(-1 + 0.03 * h, 0) : goal);
    }
    auto arr = travel_time(Trajectory(pts), goal, 0.03);
    REQUIRE(arr.has_value());
    CHECK(*arr == 40);
}

TEST_CASE("travel_time: never-arriving trajectory returns nullopt") {
    auto t = straight_line(Vec2(0, 0), Vec2(1, 0), 8);
    CHECK_FALSE(travel_time(t, Vec2(0, 1), 0.03).has_value());
}

TEST_CASE("travel_time: only the final point inside tolerance gives H") {
    auto t = straight_line(Vec2(0, 0), Vec2(1, 0), 10);
    auto arr = travel_time(t, Vec2(1, 0), 0.01);
    REQUIRE(arr.has_value());
    CHECK(*arr == 10);
}

TEST_CASE("max_step_speed basics") {
    Trajectory pair(std::vector<Vec2>{Vec2(0, 0), Vec2(0.05, 0)});
    CHECK(max_step_speed(pair) == doctest::Approx(0.05));
    Trajectory still(std::vector<Vec2>(12, Vec2(0.3, -0.2)));
    CHECK(max_step_speed(still) == doctest::Approx(0.0));
}

TEST_CASE("max_step_speed equals brute-force loop oracle") {
    std::mt19937_64 rng(4);
    Trajectory t = random_traj(64, rng);
    double expect = 0.0;
    for (int h = 0; h < 64; ++h) {
        expect = std::max(expect, (t.at(h + 1) - t.at(h)).norm());
    }
    CHECK(max_step_speed(t) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("CSV export shape") {
    std::vector<Trajectory> trajs{straight_line(Vec2(0, 0), Vec2(1, 0), 2),
                                  straight_line(Vec2(0, 1), Vec2(1, 1), 2)};
    std::ostringstream os;
    write_trajectories_csv(os, trajs);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "step,robot_id,x,y");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 6);  // 3 steps x 2 robots
}

TEST_CASE("validate rejects non-finite coordinates") {
    Trajectory t(std::vector<Vec2>{Vec2(0, 0), Vec2(std::nan(""), 0)});
    CHECK_THROWS_AS(t.validate(), SidError);
}
