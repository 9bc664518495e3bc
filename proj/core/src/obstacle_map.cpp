#include "vtube/obstacle_map.hpp"

#include <algorithm>
#include <limits>

namespace vtube {

double Obstacle::distance(const Vec3& p) const {
    if (shape == Shape::Sphere) {
        return std::max(0.0, (p - center).norm() - radius);
    }
    Vec3 d;
    for (int i = 0; i < 3; ++i)
        d(i) = std::max({box_min(i) - p(i), 0.0, p(i) - box_max(i)});
    return d.norm();
}

double ObstacleMap::clearance(const Vec3& p, bool include_unknown) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) {
        if (!o.known && !include_unknown) continue;
        best = std::min(best, o.distance(p));
    }
    return best;
}

bool ObstacleMap::inside_bounds(const Vec3& p) const {
    return (p.array() >= bounds_min.array()).all() &&
           (p.array() <= bounds_max.array()).all();
}

ObstacleMap ObstacleMap::known_view(const std::vector<int>& revealed) const {
    ObstacleMap out;
    out.bounds_min = bounds_min;
    out.bounds_max = bounds_max;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (obstacles[i].known ||
            std::find(revealed.begin(), revealed.end(), static_cast<int>(i)) !=
                revealed.end()) {
            Obstacle o = obstacles[i];
            o.known = true;
            out.obstacles.push_back(o);
        }
    }
    return out;
}

}  // namespace vtube
