#include "vtube/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "vtube/errors.hpp"
#include "vtube/format.hpp"

namespace vtube {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> loose_derivative_bounds(const PlannerParams& params) {
    // Sanity bounds on derivative control points; retiming owns the real
    // dynamic limits, so these only reject wild spatial solutions.
    std::vector<double> bounds;
    for (int order = 1; order < params.smooth_order; ++order)
        bounds.push_back(10.0 * params.v_nominal);
    return bounds;
}

VirtualTube build_tube(const ObstacleMap& map, const Terminals& terminals,
                       const PlannerParams& params, std::uint64_t seed,
                       PlanTimings* timings) {
    auto t0 = Clock::now();
    const SphereCorridor corridor = plan_corridor(map, terminals, seed, params.corridor);
    if (timings) timings->corridor_seconds = seconds_since(t0);

    const auto paths = select_boundary_terminals(corridor, terminals,
                                                 params.boundary_count, params.rho);
    const std::vector<double> dt0 = init_time_allocation(paths, params.v_nominal);

    t0 = Clock::now();
    SpatialProblem spatial_problem;
    spatial_problem.spheres = corridor.spheres;
    spatial_problem.boundary_paths = paths;
    spatial_problem.dt = dt0;
    spatial_problem.degree = params.degree;
    spatial_problem.smooth_order = params.smooth_order;
    spatial_problem.derivative_bounds = loose_derivative_bounds(params);
    const SpatialSolution spatial = solve_spatial(spatial_problem);
    if (timings) timings->spatial_seconds = seconds_since(t0);

    t0 = Clock::now();
    ParametricTimeLp plp = assemble_parametric(boundary_time_lps(spatial, params.v_max));
    if (timings) timings->lp_seconds = seconds_since(t0);

    t0 = Clock::now();
    CriticalRegionTree tree = partition(plp, params.epsilon);
    if (timings) timings->partition_seconds = seconds_since(t0);

    return VirtualTube(terminals, corridor, spatial, params.v_max, std::move(tree));
}

}  // namespace

PlanResult plan_tube(const ObstacleMap& known_map, const Terminals& terminals,
                     const PlannerParams& params, std::uint64_t seed) {
    PlanTimings timings;
    VirtualTube tube = build_tube(known_map.known_view(), terminals, params, seed, &timings);
    return PlanResult{std::move(tube), timings};
}

PlanResult plan_tube(const Scenario& scenario) {
    return plan_tube(scenario.map, scenario.terminals(), scenario.planner, scenario.seed);
}

StagePlan plan_stage(const ObstacleMap& known_map, const Terminals& stage_terminals,
                     const Vec3& leader_position, const PlannerParams& params,
                     const SimConfig& sim, std::uint64_t seed, bool world_fully_known) {
    const SphereCorridor corridor =
        plan_corridor(known_map, stage_terminals, seed, params.corridor);
    const auto paths = select_boundary_terminals(corridor, stage_terminals,
                                                 params.boundary_count, params.rho);

    const double commit_range = sim.commit_fraction * sim.sense_radius;
    bool goal_in_range = true;
    for (const auto& path : paths)
        if ((path.back() - leader_position).norm() > commit_range) goal_in_range = false;

    StagePlan plan{[&]() {
                       if (world_fully_known || goal_in_range) {
                           // Nothing unknown can appear (or the goal is already
                           // in reach): commit the whole tube.
                           PlanTimings timings;
                           return build_tube(known_map, stage_terminals, params, seed,
                                             &timings);
                       }
                       // Committed prefix: the longest run of intersection
                       // planes inside the committed range, at least one.
                       const int planes = static_cast<int>(corridor.planes.size());
                       int last_plane = -1;
                       for (int m = 0; m < planes; ++m) {
                           bool in_range = true;
                           for (const auto& path : paths)
                               if ((path[m + 1] - leader_position).norm() > commit_range)
                                   in_range = false;
                           if (!in_range) break;
                           last_plane = m;
                       }
                       if (last_plane < 0) last_plane = 0;

                       SphereCorridor prefix;
                       prefix.spheres.assign(corridor.spheres.begin(),
                                             corridor.spheres.begin() + last_plane + 1);
                       prefix.planes.assign(corridor.planes.begin(),
                                            corridor.planes.begin() + last_plane);

                       std::vector<Vec3> front;
                       std::vector<std::vector<Vec3>> prefix_paths;
                       for (const auto& path : paths) {
                           prefix_paths.emplace_back(path.begin(),
                                                     path.begin() + last_plane + 2);
                           front.push_back(path[last_plane + 1]);
                       }
                       std::vector<Vec3> starts(stage_terminals.start_vertices().begin(),
                                                stage_terminals.start_vertices().begin() +
                                                    params.boundary_count);
                       Terminals committed_terminals(starts, front);

                       SpatialProblem sp;
                       sp.spheres = prefix.spheres;
                       sp.boundary_paths = prefix_paths;
                       sp.dt = init_time_allocation(prefix_paths, params.v_nominal);
                       sp.degree = params.degree;
                       sp.smooth_order = params.smooth_order;
                       sp.derivative_bounds = loose_derivative_bounds(params);
                       const SpatialSolution spatial = solve_spatial(sp);
                       ParametricTimeLp plp =
                           assemble_parametric(boundary_time_lps(spatial, params.v_max));
                       CriticalRegionTree tree = partition(plp, params.epsilon);
                       return VirtualTube(committed_terminals, prefix, spatial,
                                          params.v_max, std::move(tree));
                   }(),
                   false};
    plan.final_stage = world_fully_known || goal_in_range;
    return plan;
}

StagePlanner make_stage_planner(const Scenario& scenario) {
    const std::size_t total_obstacles = scenario.map.obstacles.size();
    return [scenario, total_obstacles](const ObstacleMap& known, const Terminals& terminals,
                                       const Vec3& leader) {
        const bool fully_known = known.obstacles.size() == total_obstacles;
        return plan_stage(known, terminals, leader, scenario.planner, scenario.sim,
                          scenario.seed, fully_known);
    };
}

void save_tube(const VirtualTube& tube, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("save_tube: cannot open " + path);
    out << tube.to_json();
}

VirtualTube load_tube(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("load_tube: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return VirtualTube::from_json(buffer.str());
}

std::string plan_summary(const PlanResult& result) {
    const VirtualTube& tube = result.tube;
    std::ostringstream out;
    out << "segments (n_t): " << tube.segment_count() << "\n"
        << "boundaries (k_c): " << tube.boundary_count() << "\n"
        << "epsilon: " << tube.epsilon() << " s\n"
        << "critical regions: " << tube.leaf_count() << "\n";
    out << "boundary times:";
    for (int k = 0; k < tube.boundary_count(); ++k)
        out << ' ' << tube.tree().root().values()(k);
    out << " s\n";
    out << "content hash: " << std::hex << tube.content_hash() << std::dec << "\n"
        << "timings: corridor " << result.timings.corridor_seconds << " s, spatial "
        << result.timings.spatial_seconds << " s, partition "
        << result.timings.partition_seconds << " s\n";
    return out.str();
}

GenerateResult generate_batch(const VirtualTube& tube, int count, std::uint64_t seed,
                              int force_vertex) {
    if (count < 1) throw std::invalid_argument("generate: count must be >= 1");
    const int kc = tube.boundary_count();
    if (force_vertex >= kc)
        throw std::invalid_argument("generate: vertex index out of range");

    std::vector<Eigen::VectorXd> thetas;
    std::uint64_t state = seed;
    for (int i = 0; i < count; ++i) {
        if (force_vertex >= 0) {
            Eigen::VectorXd theta = Eigen::VectorXd::Zero(kc);
            theta(force_vertex) = 1.0;
            thetas.push_back(theta);
        } else {
            thetas.push_back(sample_simplex(kc, state));
        }
    }

    std::vector<PiecewiseBezier> trajectories;
    trajectories.reserve(count);
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& theta : thetas) trajectories.push_back(tube.trajectory(theta));
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    csv << "id";
    for (int k = 0; k < kc; ++k) csv << ",theta_" << k;
    csv << ",total_time";
    const int segments = tube.segment_count();
    const int degree = tube.spatial().degree;
    for (int m = 0; m < segments; ++m) csv << ",dt_" << m;
    for (int m = 0; m < segments; ++m)
        for (int j = 0; j <= degree; ++j)
            csv << ",p" << m << '_' << j << "_x,p" << m << '_' << j << "_y,p" << m << '_'
                << j << "_z";
    csv << '\n';
    for (int i = 0; i < count; ++i) {
        csv << i;
        for (int k = 0; k < kc; ++k) csv << ',' << format_double(thetas[i](k));
        csv << ',' << format_double(trajectories[i].total_time());
        for (int m = 0; m < segments; ++m)
            csv << ',' << format_double(trajectories[i].segment(m).duration());
        for (int m = 0; m < segments; ++m) {
            const Eigen::MatrixXd& cp = trajectories[i].segment(m).control_points();
            for (int j = 0; j <= degree; ++j)
                csv << ',' << format_double(cp(0, j)) << ',' << format_double(cp(1, j)) << ','
                    << format_double(cp(2, j));
        }
        csv << '\n';
    }
    return GenerateResult{csv.str(), count, wall};
}

}  // namespace vtube
