#ifndef VTUBE_OBSTACLE_MAP_HPP
#define VTUBE_OBSTACLE_MAP_HPP

#include <Eigen/Dense>
#include <vector>

namespace vtube {

using Vec3 = Eigen::Vector3d;

struct Obstacle {
    enum class Shape { Sphere, Box };
    Shape shape = Shape::Sphere;
    Vec3 center = Vec3::Zero();   // sphere center
    double radius = 0.0;          // sphere radius
    Vec3 box_min = Vec3::Zero();  // axis-aligned box corners
    Vec3 box_max = Vec3::Zero();
    bool known = true;  // unknown obstacles only exist for the sensing model

    /// Euclidean distance from a point to this obstacle's surface
    /// (0 inside).
    double distance(const Vec3& p) const;
};

/// World bounds plus sphere/box obstacles with a known/unknown flag used by
/// the replanning scenarios.
struct ObstacleMap {
    Vec3 bounds_min = Vec3::Zero();
    Vec3 bounds_max = Vec3::Zero();
    std::vector<Obstacle> obstacles;

    /// Distance to the nearest obstacle in the given visibility set.
    /// `include_unknown` folds in unknown obstacles (sim-side ground truth);
    /// planners must leave it false.
    double clearance(const Vec3& p, bool include_unknown = false) const;

    bool inside_bounds(const Vec3& p) const;

    /// Map with only the known obstacles plus the listed revealed ones.
    ObstacleMap known_view(const std::vector<int>& revealed = {}) const;
};

}  // namespace vtube

#endif  // VTUBE_OBSTACLE_MAP_HPP
