#ifndef VTUBE_PIPELINE_HPP
#define VTUBE_PIPELINE_HPP

#include <string>
#include <vector>

#include "vtube/mp_partition.hpp"
#include "vtube/scenario.hpp"
#include "vtube/swarm_sim.hpp"
#include "vtube/tube.hpp"

namespace vtube {

struct PlanTimings {
    double corridor_seconds = 0.0;
    double spatial_seconds = 0.0;
    double lp_seconds = 0.0;
    double partition_seconds = 0.0;
};

struct PlanResult {
    VirtualTube tube;
    PlanTimings timings;
};

/// Full planning pipeline on the known obstacles: corridor, boundary
/// terminals, spatial solve, boundary LPs, critical-region partition,
/// assembled tube.
PlanResult plan_tube(const ObstacleMap& known_map, const Terminals& terminals,
                     const PlannerParams& params, std::uint64_t seed);
PlanResult plan_tube(const Scenario& scenario);

/// Committed-stage planner used by the replanning loop: plans the full
/// corridor to the goal under the free-unknown-space assumption, then builds
/// a rest-to-rest tube over the corridor prefix whose joints lie inside the
/// committed range around the leader. Commits the whole tube when the goal
/// is in range or the map has no unknown obstacles left to reveal.
StagePlan plan_stage(const ObstacleMap& known_map, const Terminals& stage_terminals,
                     const Vec3& leader_position, const PlannerParams& params,
                     const SimConfig& sim, std::uint64_t seed, bool world_fully_known);

/// Scenario-bound stage planner for replan_loop.
StagePlanner make_stage_planner(const Scenario& scenario);

void save_tube(const VirtualTube& tube, const std::string& path);
VirtualTube load_tube(const std::string& path);

/// Human-readable plan summary (leaf count, boundary times, value range).
std::string plan_summary(const PlanResult& result);

/// Trajectory batch export: one CSV row per sampled theta with the total
/// time, durations and control points; byte-reproducible for a fixed seed.
struct GenerateResult {
    std::string csv;
    int count = 0;
    double wall_seconds = 0.0;
};
GenerateResult generate_batch(const VirtualTube& tube, int count, std::uint64_t seed,
                              int force_vertex = -1);

}  // namespace vtube

#endif  // VTUBE_PIPELINE_HPP
