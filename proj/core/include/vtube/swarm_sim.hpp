#ifndef VTUBE_SWARM_SIM_HPP
#define VTUBE_SWARM_SIM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vtube/obstacle_map.hpp"
#include "vtube/tube.hpp"

namespace vtube {

struct SimConfig {
    double dt = 0.01;  // integration step, required <= 0.02
    double k_b = 1.5;  // tracking gain
    double k_a = 2.0;  // avoidance gain
    double v_sat = 2.0;
    double r_s = 0.4;
    double r_a = 1.0;
    double sense_radius = 6.0;
    double commit_fraction = 0.8;      // committed range = fraction * sense_radius
    double handover_threshold = 1.0;   // leader handover distance to the committed front
    double arrival_tol = 1e-2;
    int max_steps = 60000;
    std::uint64_t seed = 1;
    int initial_leader = 0;
    /// Log every n-th step (metrics still track every step).
    int log_stride = 1;

    void validate() const;
};

struct RobotState {
    Vec3 position = Vec3::Zero();
    Eigen::VectorXd theta;
    double clock = 0.0;
    bool leader = false;
    double r_s = 0.4;
    double r_a = 1.0;
};

struct ReplanEvent {
    double time = 0.0;
    int stage = 0;
    std::uint64_t committed_hash = 0;
};

struct HandoverEvent {
    double time = 0.0;
    int from = 0;
    int to = 0;
};

struct SimRow {
    double t;
    int robot;
    Vec3 position;
    Vec3 velocity;
    double min_robot_dist;     // -1 when there is no other robot
    double min_obstacle_dist;  // against ground truth
};

struct SimLog {
    std::vector<SimRow> rows;
    int steps = 0;
    bool all_arrived = false;
    double flight_time = 0.0;                // max completion time over robots
    double mean_speed = 0.0;                 // mean of path length / completion time
    double min_inter_robot = std::numeric_limits<double>::infinity();
    double min_obstacle = std::numeric_limits<double>::infinity();
    std::vector<double> completion_times;    // NaN when a robot never arrived
    std::vector<std::string> violations;
    std::vector<ReplanEvent> replan_events;
    std::vector<HandoverEvent> handovers;

    void write_csv(std::ostream& out) const;
    std::string summary_json() const;
};

enum class Allocation { Approximate, Initial };

/// Composite velocity command: feedforward + saturated proportional
/// tracking + linear-in-penetration repulsion, clamped to v_sat. Coincident
/// neighbors repel along a deterministic seed-derived direction.
Vec3 control_step(const RobotState& robot, const Vec3& ref_position, const Vec3& ref_velocity,
                  const std::vector<RobotState>& neighbors, const SimConfig& config,
                  std::uint64_t tiebreak);

/// Deterministic triangular-lattice spawn positions inside the start
/// terminal, sorted by distance to the centroid. Throws ConfigError when
/// the region cannot host the requested count at the spacing.
std::vector<Vec3> spawn_positions(const Terminals& terminals, int count, double spacing);

/// Fixed-step synchronous simulation of the swarm tracking one tube.
/// Safety violations are recorded in the log, not thrown.
SimLog simulate(const VirtualTube& tube, std::vector<RobotState> robots,
                const SimConfig& config, const ObstacleMap& map,
                Allocation allocation = Allocation::Approximate);

/// One committed planning stage: a rest-to-rest tube over the corridor
/// prefix inside the committed range, ending at the committed front
/// cross-section (or at the goal terminal on the final stage).
struct StagePlan {
    VirtualTube committed;
    bool final_stage = false;
};

using StagePlanner = std::function<StagePlan(const ObstacleMap& known_map,
                                             const Terminals& stage_terminals,
                                             const Vec3& leader_position)>;

struct ReplanResult {
    SimLog log;
    std::vector<VirtualTube> stages;
    /// Serialized committed tubes captured when each stage was issued;
    /// immutability is checked by re-serializing after the run.
    std::vector<std::string> committed_snapshots;
    std::vector<int> revealed_obstacles;
};

/// Committed-tube replanning loop: plan assuming unknown space free, fly the
/// committed prefix, replan from the committed front cross-section with the
/// obstacles revealed so far once any robot finishes its committed
/// trajectory. Committed tubes are never modified; robots switch to the next
/// stage individually at their own committed terminus (at rest on both
/// sides of the splice).
ReplanResult replan_loop(const StagePlanner& planner, const ObstacleMap& world,
                         const Terminals& terminals, int robot_count,
                         const SimConfig& config);

}  // namespace vtube

#endif  // VTUBE_SWARM_SIM_HPP
