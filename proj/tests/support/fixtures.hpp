#ifndef VTUBE_TESTS_FIXTURES_HPP
#define VTUBE_TESTS_FIXTURES_HPP

#include "vtube/corridor.hpp"
#include "vtube/spatial_opt.hpp"
#include "vtube/time_lp.hpp"
#include "vtube/tube.hpp"

// Shared test fixtures: a straight five-sphere corridor whose boundary
// polylines differ in length (one zigzags), so the optimal total time varies
// nontrivially over the parameter simplex.

namespace fixtures {

inline vtube::SpatialProblem zigzag_problem() {
    using vtube::Vec3;
    vtube::SpatialProblem p;
    for (int i = 0; i < 5; ++i) p.spheres.push_back({Vec3(2.0 * i, 0, 0), 2.2});
    std::vector<vtube::IntersectionPlane> planes;
    for (int i = 0; i < 4; ++i)
        planes.push_back(vtube::intersection_plane(p.spheres[i], p.spheres[i + 1]));

    // Boundary 0 hugs one side, boundary 1 zigzags (longest), boundary 2
    // stays near the axis.
    std::vector<std::vector<Vec3>> offsets(3);
    offsets[0] = {Vec3(0, 0.9, 0), Vec3(0, 0.9, 0), Vec3(0, 0.9, 0), Vec3(0, 0.9, 0)};
    offsets[1] = {Vec3(0, -0.9, 0.8), Vec3(0, -0.2, -0.8), Vec3(0, -0.9, 0.8),
                  Vec3(0, -0.2, -0.8)};
    offsets[2] = {Vec3(0, 0, -0.6), Vec3(0, 0, -0.6), Vec3(0, 0, -0.6), Vec3(0, 0, -0.6)};
    const std::vector<Vec3> starts{Vec3(0, 0.9, 0), Vec3(0, -0.9, 0.8), Vec3(0, 0, -0.6)};
    const std::vector<Vec3> goals{Vec3(8, 0.9, 0), Vec3(8, -0.9, 0.8), Vec3(8, 0, -0.6)};
    for (int k = 0; k < 3; ++k) {
        std::vector<Vec3> path{starts[k]};
        for (int m = 0; m < 4; ++m) path.push_back(planes[m].center + offsets[k][m]);
        path.push_back(goals[k]);
        p.boundary_paths.push_back(path);
    }
    p.dt = vtube::init_time_allocation(p.boundary_paths, 1.0);
    p.degree = 5;
    p.smooth_order = 3;
    p.derivative_bounds = {10.0, 10.0};
    return p;
}

inline const vtube::SpatialSolution& zigzag_solution() {
    static const vtube::SpatialSolution solution = vtube::solve_spatial(zigzag_problem());
    return solution;
}

inline const vtube::ParametricTimeLp& zigzag_plp() {
    static const vtube::ParametricTimeLp plp = vtube::assemble_parametric(
        vtube::boundary_time_lps(zigzag_solution(), Eigen::Vector3d::Constant(1.2)));
    return plp;
}

inline vtube::VirtualTube zigzag_tube(double epsilon = 0.1) {
    const vtube::SpatialProblem p = zigzag_problem();
    std::vector<vtube::Vec3> starts, goals;
    for (const auto& path : p.boundary_paths) {
        starts.push_back(path.front());
        goals.push_back(path.back());
    }
    vtube::SphereCorridor corridor;
    corridor.spheres = p.spheres;
    for (int i = 0; i + 1 < 5; ++i)
        corridor.planes.push_back(
            vtube::intersection_plane(p.spheres[i], p.spheres[i + 1]));
    const Eigen::VectorXd v_max = Eigen::Vector3d::Constant(1.2);
    vtube::CriticalRegionTree tree = vtube::partition(zigzag_plp(), epsilon);
    return vtube::VirtualTube(vtube::Terminals(starts, goals), corridor, zigzag_solution(),
                              v_max, std::move(tree));
}

/// Boundaries that are pure translates of each other: identical velocity
/// data, so the optimal value is constant over the simplex.
inline vtube::ParametricTimeLp translate_plp() {
    vtube::SpatialProblem p = zigzag_problem();
    p.boundary_paths.clear();
    const std::vector<vtube::Vec3> offsets{vtube::Vec3(0, 0.9, 0), vtube::Vec3(0, -0.7, 0.6),
                                           vtube::Vec3(0, -0.2, -0.8)};
    for (const auto& offset : offsets) {
        std::vector<vtube::Vec3> path;
        path.push_back(vtube::Vec3(0, 0, 0) + offset);
        for (int m = 0; m < 4; ++m) path.push_back(vtube::Vec3(1.0 + 2.0 * m, 0, 0) + offset);
        path.push_back(vtube::Vec3(8, 0, 0) + offset);
        p.boundary_paths.push_back(path);
    }
    p.dt = vtube::init_time_allocation(p.boundary_paths, 1.0);
    const vtube::SpatialSolution solution = vtube::solve_spatial(p);
    return vtube::assemble_parametric(
        vtube::boundary_time_lps(solution, Eigen::Vector3d::Constant(1.2)));
}

}  // namespace fixtures

#endif  // VTUBE_TESTS_FIXTURES_HPP
