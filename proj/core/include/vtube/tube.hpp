#ifndef VTUBE_TUBE_HPP
#define VTUBE_TUBE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vtube/bezier.hpp"
#include "vtube/corridor.hpp"
#include "vtube/errors.hpp"
#include "vtube/mp_partition.hpp"
#include "vtube/spatial_opt.hpp"
#include "vtube/time_lp.hpp"

namespace vtube {

/// A parameter assignment failed because the requested start point is not a
/// convex combination of the boundary start points.
struct AssignmentError : Error {
    AssignmentError(const std::string& what, double distance_to_hull)
        : Error(what), distance(distance_to_hull) {}
    double distance;
};

/// The assembled optimal virtual tube: terminals, sphere corridor, boundary
/// spatial solutions and the critical-region tree. Immutable; every
/// trajectory query is affine in the stored data.
class VirtualTube {
  public:
    /// Throws AssemblyError when the tree's provenance hash does not match
    /// the parametric LP rebuilt from the spatial solution and limits.
    VirtualTube(Terminals terminals, SphereCorridor corridor, SpatialSolution spatial,
                Eigen::VectorXd v_max, CriticalRegionTree tree);

    int boundary_count() const { return spatial_.boundary_count(); }
    int segment_count() const { return spatial_.segment_count(); }
    int parameter_count() const { return tree_.parameter_count(); }
    int leaf_count() const { return tree_.leaf_count(); }
    double epsilon() const { return tree_.epsilon(); }
    const Terminals& terminals() const { return terminals_; }
    const SphereCorridor& corridor() const { return corridor_; }
    const SpatialSolution& spatial() const { return spatial_; }
    const CriticalRegionTree& tree() const { return tree_; }
    const ParametricTimeLp& parametric() const { return parametric_; }
    const Eigen::VectorXd& v_max() const { return v_max_; }

    /// Interpolated durations at theta (locate + affine map, clamped at the
    /// LP's lower bound).
    Eigen::VectorXd durations(const Eigen::VectorXd& theta) const;

    /// Full trajectory at theta: convex-combined control points with the
    /// interpolated time allocation. No optimization solves.
    PiecewiseBezier trajectory(const Eigen::VectorXd& theta) const;

    /// Same control points with the shared initial chord-length allocation
    /// (the pre-retiming baseline).
    PiecewiseBezier trajectory_initial_allocation(const Eigen::VectorXd& theta) const;

    /// Barycentric weights expressing a start point over the boundary start
    /// points (simplex-constrained least squares). Throws AssignmentError
    /// with the distance to the hull when no convex combination fits.
    Eigen::VectorXd assign(const Vec3& start) const;
    std::vector<Eigen::VectorXd> assign_parameters(const std::vector<Vec3>& starts) const;

    /// Boundary samples of the cross-section at a matched segment fraction
    /// s in [0,1]; interior trajectories are convex combinations of these.
    std::vector<Vec3> cross_section(double fraction) const;

    std::uint64_t content_hash() const { return content_hash_; }
    std::string to_json() const;
    static VirtualTube from_json(const std::string& text);

  private:
    Terminals terminals_;
    SphereCorridor corridor_;
    SpatialSolution spatial_;
    Eigen::VectorXd v_max_;
    ParametricTimeLp parametric_;
    CriticalRegionTree tree_;
    Eigen::MatrixXd boundary_starts_;  // 3 x k_c
    std::uint64_t content_hash_ = 0;
};

/// Boundary LPs of a spatial solution under shared velocity limits; the
/// assembly step between spatial and parametric optimization.
std::vector<TimeLp> boundary_time_lps(const SpatialSolution& spatial,
                                      const Eigen::VectorXd& v_max, double t_min = 1e-3);

}  // namespace vtube

#endif  // VTUBE_TUBE_HPP
