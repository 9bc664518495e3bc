#ifndef VTUBE_CORRIDOR_HPP
#define VTUBE_CORRIDOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vtube/obstacle_map.hpp"

namespace vtube {

/// Disjoint bounded convex start/goal sets plus the affine pairing map
/// between them. Vertices are paired by index.
class Terminals {
  public:
    Terminals(std::vector<Vec3> start_vertices, std::vector<Vec3> goal_vertices);

    const std::vector<Vec3>& start_vertices() const { return start_; }
    const std::vector<Vec3>& goal_vertices() const { return goal_; }
    Vec3 start_centroid() const;
    Vec3 goal_centroid() const;

    /// Affine pairing map f(x) = A x + b taking start vertices to their
    /// paired goal vertices.
    Vec3 map(const Vec3& start_point) const;
    const Eigen::Matrix3d& linear() const { return a_; }
    const Vec3& offset() const { return b_; }

    /// Radius of the smallest centroid-centered ball covering the vertex set.
    double start_cover_radius() const;
    double goal_cover_radius() const;

    /// Affine dimension of the start vertex set.
    int affine_dim() const;

  private:
    std::vector<Vec3> start_;
    std::vector<Vec3> goal_;
    Eigen::Matrix3d a_;
    Vec3 b_;
};

/// Maximum intersection disk between two adjacent corridor spheres: the
/// radical-plane disk of radius lambda around center, with a transported
/// in-plane orthonormal frame (normal, binormal); tangent completes it.
struct IntersectionPlane {
    Vec3 center = Vec3::Zero();
    double lambda = 0.0;
    Vec3 tangent = Vec3::UnitX();   // unit vector along the sphere axis
    Vec3 normal = Vec3::UnitY();    // in-plane
    Vec3 binormal = Vec3::UnitZ();  // in-plane, tangent = normal x binormal

    /// Point on the disk at polar coordinates (rho in [0,1], phi).
    Vec3 point(double rho, double phi) const {
        return center + rho * lambda * (std::cos(phi) * normal + std::sin(phi) * binormal);
    }
};

struct CorridorSphere {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
};

/// Ordered chain of pairwise-intersecting free spheres from the start
/// terminal to the goal terminal; M spheres host M trajectory segments,
/// joined in the M-1 intersection disks.
struct SphereCorridor {
    std::vector<CorridorSphere> spheres;
    std::vector<IntersectionPlane> planes;  // planes.size() == spheres.size()-1

    int segment_count() const { return static_cast<int>(spheres.size()); }
};

struct CorridorConfig {
    double max_radius = 2.5;       // cap on sphere radius
    double min_radius = 0.3;       // candidates with less clearance are dropped
    double grid_pitch = 1.0;       // candidate lattice pitch
    double jitter = 0.25;          // uniform jitter amplitude per axis
    double lambda_min = 0.5;       // required intersection-disk radius
    double inflation = 0.0;        // extra obstacle clearance margin
    std::size_t sample_budget = 200000;  // max expanded A* nodes
    bool shortcut = true;          // greedy chain pruning pass
};

/// Plan a sphere corridor through the known obstacles. Deterministic for a
/// fixed seed. Throws PlanningFailure when the graph search exhausts its
/// budget or no overlapping chain exists at the sampling resolution.
SphereCorridor plan_corridor(const ObstacleMap& map, const Terminals& terminals,
                             std::uint64_t seed, const CorridorConfig& config = {});

/// Radical-plane disk of two intersecting spheres. Throws GeometryError for
/// disjoint, tangent, nested, or concentric inputs. The returned frame is
/// not transported (normal chosen deterministically from the tangent).
IntersectionPlane intersection_plane(const CorridorSphere& a, const CorridorSphere& b);

/// One polyline of terminal points per boundary index: the k-th C0 vertex,
/// one point in each intersection disk at radius rho*lambda and a fixed
/// per-boundary angle, and the paired goal vertex.
std::vector<std::vector<Vec3>> select_boundary_terminals(const SphereCorridor& corridor,
                                                         const Terminals& terminals,
                                                         int boundary_count, double rho);

/// Chord-length time allocation: per segment, the arithmetic mean of the
/// boundary-path chord lengths divided by the nominal speed. The same
/// allocation is shared by every boundary trajectory.
std::vector<double> init_time_allocation(const std::vector<std::vector<Vec3>>& boundary_paths,
                                         double v_nominal);

}  // namespace vtube

#endif  // VTUBE_CORRIDOR_HPP
