#include "vtube/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "vtube/errors.hpp"

namespace vtube {

namespace {

Vec3 centroid(const std::vector<Vec3>& pts) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    return c / static_cast<double>(pts.size());
}

double cover_radius(const std::vector<Vec3>& pts, const Vec3& c) {
    double r = 0.0;
    for (const auto& p : pts) r = std::max(r, (p - c).norm());
    return r;
}

/// Deterministic unit vector orthogonal to t: project the coordinate axis
/// least aligned with t.
Vec3 any_orthogonal(const Vec3& t) {
    int axis = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(t(i)) < std::abs(t(axis))) axis = i;
    Vec3 n = Vec3::Unit(axis) - t.dot(Vec3::Unit(axis)) * t;
    return n.normalized();
}

Eigen::Matrix3d rotation_between(const Vec3& from, const Vec3& to) {
    const Vec3 f = from.normalized(), g = to.normalized();
    const double c = f.dot(g);
    if (c > 1.0 - 1e-12) return Eigen::Matrix3d::Identity();
    Vec3 axis;
    if (c < -1.0 + 1e-12) {
        axis = any_orthogonal(f);
        return Eigen::AngleAxisd(M_PI, axis).toRotationMatrix();
    }
    axis = f.cross(g).normalized();
    return Eigen::AngleAxisd(std::acos(std::clamp(c, -1.0, 1.0)), axis).toRotationMatrix();
}

}  // namespace

Terminals::Terminals(std::vector<Vec3> start_vertices, std::vector<Vec3> goal_vertices)
    : start_(std::move(start_vertices)), goal_(std::move(goal_vertices)) {
    if (start_.empty() || start_.size() != goal_.size())
        throw ConfigError("Terminals: vertex lists must be non-empty and equal-sized");

    const Vec3 c0 = start_centroid(), c1 = goal_centroid();
    if ((c1 - c0).norm() <= start_cover_radius() + goal_cover_radius()) {
        // Cover balls overlap; fall back to a separating axis along the
        // centroid direction before rejecting.
        const Vec3 axis = (c1 - c0).normalized();
        double start_max = -std::numeric_limits<double>::infinity();
        double goal_min = std::numeric_limits<double>::infinity();
        for (const auto& v : start_) start_max = std::max(start_max, v.dot(axis));
        for (const auto& v : goal_) goal_min = std::min(goal_min, v.dot(axis));
        if (start_max >= goal_min - 1e-9)
            throw ConfigError("Terminals: start and goal regions must be disjoint");
    }

    // Fit the vertexwise affine map f(x) = A (x - c0) + stuff, completing
    // rank-deficient (planar / collinear) vertex sets with their normal
    // directions so A stays invertible.
    const int k = static_cast<int>(start_.size());
    Eigen::MatrixXd x(3, k), y(3, k);
    for (int i = 0; i < k; ++i) {
        x.col(i) = start_[i] - c0;
        y.col(i) = goal_[i] - c1;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeFullU | Eigen::ComputeThinV);
    const double scale = std::max(1.0, svd.singularValues()(0));
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-9 * scale) ++rank;

    if (rank == 3) {
        a_ = y * x.transpose() * (x * x.transpose()).inverse();
    } else if (rank == 2) {
        const Eigen::Matrix<double, 3, 2> u = svd.matrixU().leftCols<2>();
        const Eigen::MatrixXd xi = u.transpose() * x;  // 2 x k in-plane coords
        const Eigen::Matrix<double, 3, 2> b =
            y * xi.transpose() * (xi * xi.transpose()).inverse();
        const Vec3 n0 = u.col(0).cross(u.col(1));
        Vec3 n1 = b.col(0).cross(b.col(1));
        if (n1.norm() < 1e-12)
            throw ConfigError("Terminals: degenerate goal vertex set");
        n1.normalize();
        Eigen::Matrix3d lhs, rhs;
        lhs << u.col(0), u.col(1), n0;
        rhs << b.col(0), b.col(1), n1;
        a_ = rhs * lhs.inverse();
    } else if (rank == 1) {
        const Vec3 xv = x.col(0).norm() > 1e-12 ? Vec3(x.col(0)) : Vec3(x.col(1));
        Vec3 yv = Vec3::Zero();
        for (int i = 0; i < k; ++i)
            if (y.col(i).norm() > yv.norm()) yv = y.col(i);
        if (yv.norm() < 1e-12)
            throw ConfigError("Terminals: degenerate goal vertex set");
        a_ = (yv.norm() / xv.norm()) * rotation_between(xv, yv);
    } else {
        a_ = Eigen::Matrix3d::Identity();
    }
    b_ = c1 - a_ * c0;

    if (std::abs(a_.determinant()) < 1e-12)
        throw ConfigError("Terminals: pairing map is not invertible");
    for (int i = 0; i < k; ++i)
        if ((map(start_[i]) - goal_[i]).norm() > 1e-6 * scale)
            throw ConfigError("Terminals: vertex pairs are not affine-consistent");
}

Vec3 Terminals::start_centroid() const { return centroid(start_); }
Vec3 Terminals::goal_centroid() const { return centroid(goal_); }
Vec3 Terminals::map(const Vec3& p) const { return a_ * p + b_; }
double Terminals::start_cover_radius() const { return cover_radius(start_, start_centroid()); }
double Terminals::goal_cover_radius() const { return cover_radius(goal_, goal_centroid()); }

int Terminals::affine_dim() const {
    const Vec3 c0 = start_centroid();
    Eigen::MatrixXd x(3, start_.size());
    for (std::size_t i = 0; i < start_.size(); ++i) x.col(i) = start_[i] - c0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
    const double scale = std::max(1.0, svd.singularValues()(0));
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-9 * scale) ++rank;
    return rank;
}

IntersectionPlane intersection_plane(const CorridorSphere& a, const CorridorSphere& b) {
    const Vec3 delta = b.center - a.center;
    const double d = delta.norm();
    if (d < 1e-12) throw GeometryError("intersection_plane: concentric spheres");
    if (d >= a.radius + b.radius - 1e-12)
        throw GeometryError("intersection_plane: spheres disjoint or tangent");
    if (d <= std::abs(a.radius - b.radius) + 1e-12)
        throw GeometryError("intersection_plane: one sphere nested in the other");

    const Vec3 t = delta / d;
    // Radical-plane offset from the first center along t; the disk radius
    // follows from the circle lying on both sphere surfaces.
    const double x = (a.radius * a.radius - b.radius * b.radius + d * d) / (2.0 * d);
    const double lambda_sq = a.radius * a.radius - x * x;
    if (lambda_sq <= 1e-18)
        throw GeometryError("intersection_plane: degenerate intersection circle");

    IntersectionPlane plane;
    plane.center = a.center + x * t;
    plane.lambda = std::sqrt(lambda_sq);
    plane.tangent = t;
    plane.normal = any_orthogonal(t);
    plane.binormal = t.cross(plane.normal);
    return plane;
}

namespace {

struct Candidate {
    Vec3 center;
    double radius;
};

bool spheres_link(const Candidate& a, const Candidate& b, double lambda_min) {
    const double d = (b.center - a.center).norm();
    if (d < 1e-9) return false;
    if (d >= a.radius + b.radius - 1e-9) return false;
    if (d <= std::abs(a.radius - b.radius) + 1e-9) return false;
    const double x = (a.radius * a.radius - b.radius * b.radius + d * d) / (2.0 * d);
    const double lambda_sq = a.radius * a.radius - x * x;
    return lambda_sq >= lambda_min * lambda_min;
}

}  // namespace

SphereCorridor plan_corridor(const ObstacleMap& map, const Terminals& terminals,
                             std::uint64_t seed, const CorridorConfig& config) {
    const auto free_radius = [&](const Vec3& p) {
        return std::min(config.max_radius, map.clearance(p) - config.inflation);
    };

    std::vector<Candidate> nodes;
    const Vec3 c0 = terminals.start_centroid();
    const Vec3 c1 = terminals.goal_centroid();
    const double r0 = free_radius(c0), r1 = free_radius(c1);
    if (r0 < terminals.start_cover_radius())
        throw PlanningFailure("plan_corridor: start region not coverable by a free sphere", 0);
    if (r1 < terminals.goal_cover_radius())
        throw PlanningFailure("plan_corridor: goal region not coverable by a free sphere", 0);
    nodes.push_back({c0, r0});
    nodes.push_back({c1, r1});

    // Candidate centers: bounded lattice plus seeded jitter.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jit(-config.jitter, config.jitter);
    const Vec3 span = map.bounds_max - map.bounds_min;
    const auto steps = [&](int axis) {
        return std::max(1, static_cast<int>(std::floor(span(axis) / config.grid_pitch)) + 1);
    };
    for (int ix = 0; ix < steps(0); ++ix)
        for (int iy = 0; iy < steps(1); ++iy)
            for (int iz = 0; iz < steps(2); ++iz) {
                Vec3 p = map.bounds_min +
                         Vec3(ix * config.grid_pitch, iy * config.grid_pitch,
                              iz * config.grid_pitch);
                p += Vec3(jit(rng), jit(rng), jit(rng));
                if (!map.inside_bounds(p)) continue;
                const double r = free_radius(p);
                if (r < config.min_radius) continue;
                nodes.push_back({p, r});
            }

    // A* over sphere centers; an edge exists when the intersection disk is
    // at least lambda_min wide.
    const std::size_t n = nodes.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> g(n, inf);
    std::vector<int> parent(n, -1);
    std::vector<bool> closed(n, false);
    using Entry = std::pair<double, std::size_t>;  // (f, node)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    g[0] = 0.0;
    open.push({(c1 - c0).norm(), 0});
    std::size_t explored = 0;
    bool found = false;
    while (!open.empty()) {
        const auto [f, i] = open.top();
        open.pop();
        if (closed[i]) continue;
        closed[i] = true;
        if (++explored > config.sample_budget)
            throw PlanningFailure("plan_corridor: sample budget exhausted", explored);
        if (i == 1) {
            found = true;
            break;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (closed[j] || j == i) continue;
            if (!spheres_link(nodes[i], nodes[j], config.lambda_min)) continue;
            const double cand = g[i] + (nodes[j].center - nodes[i].center).norm();
            if (cand < g[j] - 1e-15) {
                g[j] = cand;
                parent[j] = static_cast<int>(i);
                open.push({cand + (nodes[j].center - c1).norm(), j});
            }
        }
    }
    if (!found)
        throw PlanningFailure("plan_corridor: no connected sphere chain found", explored);

    std::vector<std::size_t> chain;
    for (int i = 1; i != -1; i = parent[i]) chain.push_back(static_cast<std::size_t>(i));
    std::reverse(chain.begin(), chain.end());

    if (config.shortcut && chain.size() > 2) {
        std::vector<std::size_t> pruned;
        std::size_t i = 0;
        pruned.push_back(chain[0]);
        while (i + 1 < chain.size()) {
            std::size_t best = i + 1;
            for (std::size_t j = chain.size() - 1; j > i + 1; --j) {
                if (spheres_link(nodes[chain[i]], nodes[chain[j]], config.lambda_min)) {
                    best = j;
                    break;
                }
            }
            pruned.push_back(chain[best]);
            i = best;
        }
        chain = pruned;
    }

    SphereCorridor corridor;
    for (std::size_t idx : chain)
        corridor.spheres.push_back({nodes[idx].center, nodes[idx].radius});

    // Intersection disks with parallel-transported in-plane frames so the
    // boundary polylines do not braid around the tube axis.
    for (std::size_t m = 0; m + 1 < corridor.spheres.size(); ++m) {
        IntersectionPlane plane =
            intersection_plane(corridor.spheres[m], corridor.spheres[m + 1]);
        if (m > 0) {
            const Vec3 prev_n = corridor.planes.back().normal;
            Vec3 projected = prev_n - prev_n.dot(plane.tangent) * plane.tangent;
            if (projected.norm() > 1e-8) {
                plane.normal = projected.normalized();
                plane.binormal = plane.tangent.cross(plane.normal);
            }
        }
        corridor.planes.push_back(plane);
    }
    return corridor;
}

std::vector<std::vector<Vec3>> select_boundary_terminals(const SphereCorridor& corridor,
                                                         const Terminals& terminals,
                                                         int boundary_count, double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw ConfigError("select_boundary_terminals: rho must be in (0,1)");
    if (boundary_count < terminals.affine_dim() + 1)
        throw ConfigError("select_boundary_terminals: boundary count below simplex dimension");
    if (boundary_count > static_cast<int>(terminals.start_vertices().size()))
        throw ConfigError("select_boundary_terminals: more boundaries than terminal vertices");
    if (corridor.spheres.empty())
        throw ConfigError("select_boundary_terminals: empty corridor");

    const Vec3 c0 = terminals.start_centroid();

    // Fixed per-boundary angle, read off the first intersection disk's frame.
    std::vector<double> phi(boundary_count, 0.0);
    if (!corridor.planes.empty()) {
        const IntersectionPlane& first = corridor.planes.front();
        for (int k = 0; k < boundary_count; ++k) {
            const Vec3 offs = terminals.start_vertices()[k] - c0;
            phi[k] = std::atan2(offs.dot(first.binormal), offs.dot(first.normal));
        }
        for (int k = 0; k < boundary_count; ++k)
            for (int j = k + 1; j < boundary_count; ++j)
                if (std::abs(phi[k] - phi[j]) < 1e-9)
                    throw ConfigError("select_boundary_terminals: duplicate boundary angle");
    }

    std::vector<std::vector<Vec3>> paths(boundary_count);
    for (int k = 0; k < boundary_count; ++k) {
        const Vec3 start = terminals.start_vertices()[k];
        paths[k].push_back(start);
        for (const auto& plane : corridor.planes)
            paths[k].push_back(plane.point(rho, phi[k]));
        paths[k].push_back(terminals.map(start));
    }
    return paths;
}

std::vector<double> init_time_allocation(const std::vector<std::vector<Vec3>>& boundary_paths,
                                         double v_nominal) {
    if (!(v_nominal > 0.0))
        throw ConfigError("init_time_allocation: nominal speed must be > 0");
    if (boundary_paths.empty() || boundary_paths.front().size() < 2)
        throw ConfigError("init_time_allocation: need at least one segment");
    const std::size_t points = boundary_paths.front().size();
    for (const auto& path : boundary_paths)
        if (path.size() != points)
            throw ConfigError("init_time_allocation: boundary paths differ in length");

    std::vector<double> dt(points - 1, 0.0);
    for (std::size_t m = 0; m + 1 < points; ++m) {
        double mean_chord = 0.0;
        for (const auto& path : boundary_paths) {
            const double chord = (path[m + 1] - path[m]).norm();
            if (chord <= 1e-12)
                throw GeometryError("init_time_allocation: zero-length segment " +
                                    std::to_string(m + 1));
            mean_chord += chord;
        }
        mean_chord /= static_cast<double>(boundary_paths.size());
        dt[m] = mean_chord / v_nominal;
    }
    return dt;
}

}  // namespace vtube
