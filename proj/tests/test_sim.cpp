#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support/fixtures.hpp"
#include "vtube/errors.hpp"
#include "vtube/pipeline.hpp"
#include "vtube/scenario.hpp"
#include "vtube/swarm_sim.hpp"

using namespace vtube;

namespace {

Scenario load_scenario(const std::string& name) {
    return Scenario::from_file(std::string(VTUBE_SCENARIO_DIR) + "/" + name);
}

SimConfig basic_config() {
    SimConfig config;
    config.r_s = 0.4;
    config.r_a = 1.0;
    config.v_sat = 4.0;
    return config;
}

/// Straight-corridor tube in free space for the single-robot tests.
VirtualTube straight_tube() {
    ObstacleMap map;
    map.bounds_min = Vec3(-2, -6, -6);
    map.bounds_max = Vec3(14, 6, 6);
    std::vector<Vec3> start{Vec3(0, 3.4, 0), Vec3(0, -1.7, 2.94), Vec3(0, -1.7, -2.94)};
    std::vector<Vec3> goal;
    for (const auto& v : start) goal.push_back(v + Vec3(12, 0, 0));
    PlannerParams params;
    params.v_max = Eigen::Vector3d::Constant(2.0);
    params.corridor.max_radius = 4.0;
    return plan_tube(map, Terminals(start, goal), params, 3).tube;
}

std::vector<RobotState> spawn_robots(const VirtualTube& tube, int count, double spacing,
                                     const SimConfig& config) {
    const auto starts = spawn_positions(tube.terminals(), count, spacing);
    std::vector<RobotState> robots(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        robots[i].position = starts[i];
        robots[i].theta = tube.assign(starts[i]);
        robots[i].r_s = config.r_s;
        robots[i].r_a = config.r_a;
    }
    return robots;
}

}  // namespace

TEST_CASE("command equals the feedforward when on the trajectory alone") {
    const VirtualTube tube = straight_tube();
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    const PiecewiseBezier traj = tube.trajectory(theta);
    RobotState robot;
    robot.position = traj.eval(2.0);
    const Vec3 v = control_step(robot, traj.eval(2.0), traj.eval(2.0, 1), {},
                                basic_config(), 99);
    CHECK((v - traj.eval(2.0, 1)).norm() == 0.0);
}

TEST_CASE("command vanishes at rest on the goal") {
    RobotState robot;
    robot.position = Vec3(1, 2, 3);
    const Vec3 v = control_step(robot, robot.position, Vec3::Zero(), {}, basic_config(), 1);
    CHECK(v.norm() == 0.0);
}

TEST_CASE("head-on avoidance commands are antisymmetric") {
    const SimConfig config = basic_config();
    RobotState a, b;
    a.position = Vec3(0, 0, 0);
    b.position = Vec3(1.0, 0, 0);  // inside r_a + r_s = 1.4
    const Vec3 va = control_step(a, a.position, Vec3::Zero(), {b}, config, 5);
    const Vec3 vb = control_step(b, b.position, Vec3::Zero(), {a}, config, 5);
    CHECK((va + vb).norm() < 1e-12);
    CHECK(va.x() < 0.0);
    // Magnitude is the linear penetration law.
    CHECK(va.norm() == doctest::Approx(config.k_a * (1.4 - 1.0)));
}

TEST_CASE("coincident robots separate deterministically without NaNs") {
    const SimConfig config = basic_config();
    RobotState a, b;
    a.position = b.position = Vec3(1, 1, 1);
    const Vec3 v1 = control_step(a, a.position, Vec3::Zero(), {b}, config, 1234);
    const Vec3 v2 = control_step(a, a.position, Vec3::Zero(), {b}, config, 1234);
    CHECK(std::isfinite(v1.x()));
    CHECK(v1.norm() > 0.0);
    CHECK((v1 - v2).norm() == 0.0);
}

TEST_CASE("commands saturate at the configured speed") {
    SimConfig config = basic_config();
    RobotState robot;
    robot.position = Vec3(0, 0, 0);
    const Vec3 v = control_step(robot, Vec3(100, 0, 0), Vec3(3, 0, 0), {}, config, 2);
    CHECK(v.norm() == doctest::Approx(config.v_sat));
}

TEST_CASE("spawn lattice fits the region with the requested spacing") {
    const VirtualTube tube = straight_tube();
    const auto starts = spawn_positions(tube.terminals(), 4, 1.2);
    REQUIRE(starts.size() == 4);
    for (std::size_t i = 0; i < starts.size(); ++i)
        for (std::size_t j = i + 1; j < starts.size(); ++j)
            CHECK((starts[i] - starts[j]).norm() >= 1.2 - 1e-9);
    // All spawns are assignable within the boundary-start hull.
    for (const auto& s : starts) CHECK(tube.assign(s).minCoeff() >= -1e-9);
    CHECK_THROWS_AS(spawn_positions(tube.terminals(), 500, 1.2), ConfigError);
}

TEST_CASE("single robot tracks the straight tube and arrives on time") {
    const VirtualTube tube = straight_tube();
    SimConfig config = basic_config();
    config.seed = 5;

    std::vector<RobotState> robots(1);
    robots[0].position = tube.terminals().start_centroid() + Vec3(0, 0.2, 0.0);
    robots[0].theta = tube.assign(tube.terminals().start_centroid());
    robots[0].r_s = config.r_s;
    robots[0].r_a = config.r_a;

    const PiecewiseBezier reference = tube.trajectory(robots[0].theta);
    const SimLog log = simulate(tube, robots, config, ObstacleMap{});
    CHECK(log.all_arrived);
    CHECK(log.flight_time <= 1.1 * reference.total_time());

    // Tracking error decays monotonically after the transient until it hits
    // the integration floor, and stays there.
    std::vector<double> errors;
    for (const auto& row : log.rows) {
        const double t = std::min(row.t, reference.total_time());
        errors.push_back((row.position - reference.eval(t)).norm());
    }
    const double floor = 6e-3;
    const std::size_t skip = static_cast<std::size_t>(2.0 / config.dt);
    for (std::size_t i = skip; i + 1 < errors.size(); ++i) {
        if (errors[i] > floor)
            CHECK(errors[i + 1] <= errors[i] + 1e-9);
        else
            CHECK(errors[i + 1] <= floor);
    }
    CHECK(errors.back() < 0.02);
}

TEST_CASE("three robots through the corridor keep the safety distance") {
    const VirtualTube tube = straight_tube();
    SimConfig config = basic_config();
    config.seed = 6;
    const auto robots = spawn_robots(tube, 3, 1.5, config);
    const SimLog log = simulate(tube, robots, config, ObstacleMap{});
    CHECK(log.all_arrived);
    CHECK(log.min_inter_robot >= 2.0 * config.r_s - 0.01);
    CHECK(log.violations.empty());
}

TEST_CASE("identical seeds reproduce the exact log") {
    const VirtualTube tube = straight_tube();
    SimConfig config = basic_config();
    config.seed = 42;
    const auto robots = spawn_robots(tube, 3, 1.5, config);
    const SimLog a = simulate(tube, robots, config, ObstacleMap{});
    const SimLog b = simulate(tube, robots, config, ObstacleMap{});
    std::ostringstream csv_a, csv_b;
    a.write_csv(csv_a);
    b.write_csv(csv_b);
    CHECK(csv_a.str() == csv_b.str());
    CHECK(a.rows.size() == static_cast<std::size_t>(a.steps) * robots.size());
    // Timestamps are monotone per robot.
    for (std::size_t i = robots.size(); i < a.rows.size(); ++i)
        CHECK(a.rows[i].t >= a.rows[i - robots.size()].t);
}

TEST_CASE("crossing assignments trigger recorded violations without aborting") {
    const VirtualTube tube = straight_tube();
    SimConfig config = basic_config();
    config.k_a = 0.0;  // disable avoidance so the crossing collides
    auto robots = spawn_robots(tube, 2, 1.5, config);
    std::swap(robots[0].theta, robots[1].theta);  // forced crossing
    const SimLog log = simulate(tube, robots, config, ObstacleMap{});
    CHECK(!log.violations.empty());
    CHECK(log.min_inter_robot < 2.0 * config.r_s - 0.01);
}

TEST_CASE("spawning closer than the safety diameter is rejected") {
    const VirtualTube tube = straight_tube();
    SimConfig config = basic_config();
    auto robots = spawn_robots(tube, 2, 1.5, config);
    robots[1].position = robots[0].position + Vec3(0, 0.5, 0);
    CHECK_THROWS_AS(simulate(tube, robots, config, ObstacleMap{}), std::invalid_argument);
}

TEST_CASE("fully known worlds plan once and never replan") {
    const Scenario scenario = load_scenario("desk_gap.json");
    const ReplanResult result =
        replan_loop(make_stage_planner(scenario), scenario.map, scenario.terminals(),
                    scenario.robot_count, scenario.sim);
    CHECK(result.log.all_arrived);
    CHECK(result.stages.size() == 1);
    CHECK(result.log.replan_events.empty());
}

TEST_CASE("unknown wall forces replans that avoid it") {
    const Scenario scenario = load_scenario("replan_wall.json");
    const ReplanResult result =
        replan_loop(make_stage_planner(scenario), scenario.map, scenario.terminals(),
                    scenario.robot_count, scenario.sim);
    CHECK(result.log.all_arrived);
    CHECK(result.log.replan_events.size() >= 1);
    CHECK(!result.revealed_obstacles.empty());

    // Committed tubes were never modified after being issued.
    REQUIRE(result.stages.size() == result.committed_snapshots.size());
    for (std::size_t s = 0; s < result.stages.size(); ++s)
        CHECK(result.stages[s].to_json() == result.committed_snapshots[s]);

    // Logged paths clear every obstacle of the true world, including the
    // revealed wall.
    double min_clearance = std::numeric_limits<double>::infinity();
    for (const auto& row : result.log.rows)
        min_clearance = std::min(min_clearance, scenario.map.clearance(row.position, true));
    CHECK(min_clearance >= scenario.sim.r_s - 0.01);
    CHECK(result.log.min_inter_robot >= 2.0 * scenario.sim.r_s - 0.01);
}

TEST_CASE("a rear initial leader hands over to the foremost robot") {
    Scenario scenario = load_scenario("replan_wall.json");
    scenario.sim.initial_leader = 1;
    const ReplanResult result =
        replan_loop(make_stage_planner(scenario), scenario.map, scenario.terminals(),
                    scenario.robot_count, scenario.sim);
    REQUIRE(!result.log.handovers.empty());
    CHECK(result.log.handovers.front().from == 1);
}

TEST_CASE("config validation rejects broken setups") {
    SimConfig config = basic_config();
    config.dt = 0.05;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = basic_config();
    config.r_a = 0.3;  // below r_s
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = basic_config();
    config.commit_fraction = 1.2;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}
