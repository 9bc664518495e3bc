#ifndef VTUBE_SCENARIO_HPP
#define VTUBE_SCENARIO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vtube/corridor.hpp"
#include "vtube/obstacle_map.hpp"
#include "vtube/swarm_sim.hpp"

namespace vtube {

struct PlannerParams {
    int boundary_count = 3;  // k_c
    int degree = 5;
    int smooth_order = 3;
    Eigen::Vector3d v_max = Eigen::Vector3d::Constant(2.0);
    double v_nominal = 1.0;
    double epsilon = 0.8;
    double rho = 0.8;
    CorridorConfig corridor;
};

/// One self-contained planning + simulation setup, read from JSON.
struct Scenario {
    std::string name;
    ObstacleMap map;
    std::vector<Vec3> start_vertices;
    std::vector<Vec3> goal_vertices;
    PlannerParams planner;
    SimConfig sim;
    int robot_count = 3;
    std::uint64_t seed = 1;

    Terminals terminals() const { return Terminals(start_vertices, goal_vertices); }

    static Scenario from_json(const std::string& text);
    static Scenario from_file(const std::string& path);
    std::string to_json() const;
};

}  // namespace vtube

#endif  // VTUBE_SCENARIO_HPP
