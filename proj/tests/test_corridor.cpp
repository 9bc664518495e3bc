#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <queue>
#include <set>

#include "vtube/corridor.hpp"
#include "vtube/errors.hpp"

using namespace vtube;

namespace {

Terminals simple_terminals(const Vec3& c0, const Vec3& c1, double side = 1.0) {
    const Vec3 dy(0.0, side, 0.0), dz(0.0, 0.0, side);
    std::vector<Vec3> start{c0 + dy, c0 - 0.5 * dy + 0.8 * dz, c0 - 0.5 * dy - 0.8 * dz};
    std::vector<Vec3> goal;
    for (const auto& v : start) goal.push_back(v + (c1 - c0));
    return Terminals(start, goal);
}

ObstacleMap empty_map(const Vec3& lo, const Vec3& hi) {
    ObstacleMap map;
    map.bounds_min = lo;
    map.bounds_max = hi;
    return map;
}

/// Breadth-first reachability on a coarse occupancy grid; the independent
/// feasibility oracle for the planner tests.
bool grid_reachable(const ObstacleMap& map, const Vec3& from, const Vec3& to, double pitch) {
    const Vec3 span = map.bounds_max - map.bounds_min;
    const int nx = std::max(1, static_cast<int>(span.x() / pitch));
    const int ny = std::max(1, static_cast<int>(span.y() / pitch));
    const int nz = std::max(1, static_cast<int>(span.z() / pitch));
    const auto id = [&](int x, int y, int z) { return (x * ny + y) * nz + z; };
    const auto cell_of = [&](const Vec3& p) {
        Vec3 rel = p - map.bounds_min;
        return std::array<int, 3>{
            std::clamp(static_cast<int>(rel.x() / pitch), 0, nx - 1),
            std::clamp(static_cast<int>(rel.y() / pitch), 0, ny - 1),
            std::clamp(static_cast<int>(rel.z() / pitch), 0, nz - 1)};
    };
    const auto center_of = [&](int x, int y, int z) {
        return Vec3(map.bounds_min +
                    Vec3((x + 0.5) * pitch, (y + 0.5) * pitch, (z + 0.5) * pitch));
    };
    const auto start = cell_of(from);
    const auto goal = cell_of(to);
    std::set<int> seen{id(start[0], start[1], start[2])};
    std::queue<std::array<int, 3>> open;
    open.push(start);
    while (!open.empty()) {
        const auto [x, y, z] = open.front();
        open.pop();
        if (x == goal[0] && y == goal[1] && z == goal[2]) return true;
        const int dx[6] = {1, -1, 0, 0, 0, 0};
        const int dy[6] = {0, 0, 1, -1, 0, 0};
        const int dz[6] = {0, 0, 0, 0, 1, -1};
        for (int d = 0; d < 6; ++d) {
            const int cx = x + dx[d], cy = y + dy[d], cz = z + dz[d];
            if (cx < 0 || cx >= nx || cy < 0 || cy >= ny || cz < 0 || cz >= nz) continue;
            if (seen.count(id(cx, cy, cz))) continue;
            if (map.clearance(center_of(cx, cy, cz)) <= 0.0) continue;
            seen.insert(id(cx, cy, cz));
            open.push({cx, cy, cz});
        }
    }
    return false;
}

}  // namespace

TEST_CASE("equal spheres intersect in the mid plane with the known radius") {
    const double r = 2.0;
    const CorridorSphere a{Vec3(0, 0, 0), r};
    const CorridorSphere b{Vec3(r, 0, 0), r};
    const IntersectionPlane plane = intersection_plane(a, b);
    // Symmetric case: center at the midpoint, lambda = sqrt(r^2 - |d|^2/4).
    CHECK((plane.center - Vec3(1.0, 0, 0)).norm() < 1e-12);
    CHECK(plane.lambda == doctest::Approx(std::sqrt(r * r - r * r / 4.0)).epsilon(1e-12));
    CHECK(plane.tangent.dot(Vec3(1, 0, 0)) == doctest::Approx(1.0));
    // Frame: unit, orthogonal, right-handed around the tangent.
    CHECK(plane.normal.norm() == doctest::Approx(1.0));
    CHECK(plane.binormal.norm() == doctest::Approx(1.0));
    CHECK(std::abs(plane.normal.dot(plane.tangent)) < 1e-12);
    CHECK(std::abs(plane.normal.dot(plane.binormal)) < 1e-12);
    CHECK((plane.normal.cross(plane.binormal) - plane.tangent).norm() < 1e-12);
}

TEST_CASE("intersection circle points lie on both sphere surfaces") {
    const CorridorSphere a{Vec3(0.3, -0.2, 1.0), 2.0};
    const CorridorSphere b{Vec3(2.1, 0.7, 0.4), 1.4};
    const IntersectionPlane plane = intersection_plane(a, b);
    for (int i = 0; i < 64; ++i) {
        const double phi = 2.0 * M_PI * i / 64;
        const Vec3 p = plane.point(1.0, phi);
        CHECK((p - a.center).norm() == doctest::Approx(a.radius).epsilon(1e-9));
        CHECK((p - b.center).norm() == doctest::Approx(b.radius).epsilon(1e-9));
    }
}

TEST_CASE("degenerate sphere pairs are geometry errors") {
    const CorridorSphere a{Vec3(0, 0, 0), 1.0};
    CHECK_THROWS_AS(intersection_plane(a, {Vec3(2.0, 0, 0), 1.0}), GeometryError);  // tangent
    CHECK_THROWS_AS(intersection_plane(a, {Vec3(3.0, 0, 0), 1.0}), GeometryError);  // disjoint
    CHECK_THROWS_AS(intersection_plane(a, {Vec3(0, 0, 0), 0.5}), GeometryError);    // concentric
    CHECK_THROWS_AS(intersection_plane(a, {Vec3(0.2, 0, 0), 0.3}), GeometryError);  // nested
}

TEST_CASE("free space corridor covers the straight segment") {
    const ObstacleMap map = empty_map(Vec3(-2, -4, -4), Vec3(12, 4, 4));
    const Terminals terminals = simple_terminals(Vec3(0, 0, 0), Vec3(10, 0, 0));
    CorridorConfig config;
    config.max_radius = 2.5;
    config.grid_pitch = 1.0;
    const SphereCorridor corridor = plan_corridor(map, terminals, 42, config);
    REQUIRE(corridor.spheres.size() >= 2);
    REQUIRE(corridor.planes.size() == corridor.spheres.size() - 1);
    // The straight segment is inside the sphere union.
    for (int i = 0; i <= 100; ++i) {
        const Vec3 p = Vec3(0, 0, 0) + i / 100.0 * Vec3(10, 0, 0);
        bool inside = false;
        for (const auto& s : corridor.spheres)
            if ((p - s.center).norm() <= s.radius + 1e-9) inside = true;
        CHECK(inside);
    }
    // Terminals covered by the first and last sphere.
    for (const auto& v : terminals.start_vertices())
        CHECK((v - corridor.spheres.front().center).norm() <=
              corridor.spheres.front().radius + 1e-9);
    for (const auto& v : terminals.goal_vertices())
        CHECK((v - corridor.spheres.back().center).norm() <=
              corridor.spheres.back().radius + 1e-9);
}

TEST_CASE("corridor threads the only gap in a wall") {
    ObstacleMap map = empty_map(Vec3(0, 0, 0), Vec3(20, 10, 4));
    // Wall at x in [9,10] with a gap at y in [6.5, 8.5].
    map.obstacles.push_back(
        {Obstacle::Shape::Box, {}, 0.0, Vec3(9, 0, 0), Vec3(10, 6.5, 4), true});
    map.obstacles.push_back(
        {Obstacle::Shape::Box, {}, 0.0, Vec3(9, 8.5, 0), Vec3(10, 10, 4), true});
    const Terminals terminals = simple_terminals(Vec3(2, 5, 2), Vec3(18, 5, 2), 0.8);
    REQUIRE(grid_reachable(map, Vec3(2, 5, 2), Vec3(18, 5, 2), 0.5));

    CorridorConfig config;
    config.max_radius = 2.0;
    config.grid_pitch = 1.0;
    config.lambda_min = 0.4;
    const SphereCorridor corridor = plan_corridor(map, terminals, 7, config);

    // All spheres are obstacle-free, and every crossing of the wall slab
    // happens through the gap.
    for (const auto& s : corridor.spheres)
        for (const auto& o : map.obstacles)
            CHECK(o.distance(s.center) >= s.radius - 1e-9);
    for (std::size_t i = 0; i + 1 < corridor.spheres.size(); ++i) {
        const Vec3 a = corridor.spheres[i].center;
        const Vec3 b = corridor.spheres[i + 1].center;
        if ((a.x() - 9.5) * (b.x() - 9.5) < 0.0) {
            const double t = (9.5 - a.x()) / (b.x() - a.x());
            const double y = a.y() + t * (b.y() - a.y());
            CHECK(y > 6.5);
            CHECK(y < 8.5);
        }
    }
}

TEST_CASE("fully blocked map fails with the explored count") {
    ObstacleMap map = empty_map(Vec3(0, 0, 0), Vec3(20, 10, 4));
    map.obstacles.push_back(
        {Obstacle::Shape::Box, {}, 0.0, Vec3(9, 0, 0), Vec3(10, 10, 4), true});
    const Terminals terminals = simple_terminals(Vec3(2, 5, 2), Vec3(18, 5, 2), 0.8);
    REQUIRE_FALSE(grid_reachable(map, Vec3(2, 5, 2), Vec3(18, 5, 2), 0.5));
    CHECK_THROWS_AS(plan_corridor(map, terminals, 7), PlanningFailure);
}

TEST_CASE("identical seeds give bit-identical corridors") {
    ObstacleMap map = empty_map(Vec3(0, 0, 0), Vec3(15, 8, 4));
    map.obstacles.push_back({Obstacle::Shape::Sphere, Vec3(7, 4, 2), 1.5, {}, {}, true});
    const Terminals terminals = simple_terminals(Vec3(2, 4, 2), Vec3(13, 4, 2), 0.7);
    const SphereCorridor a = plan_corridor(map, terminals, 99);
    const SphereCorridor b = plan_corridor(map, terminals, 99);
    REQUIRE(a.spheres.size() == b.spheres.size());
    for (std::size_t i = 0; i < a.spheres.size(); ++i) {
        CHECK(a.spheres[i].center == b.spheres[i].center);
        CHECK(a.spheres[i].radius == b.spheres[i].radius);
    }
    const SphereCorridor c = plan_corridor(map, terminals, 100);
    (void)c;  // different seed must still plan
}

TEST_CASE("boundary terminals start at the region vertices and stay in the disks") {
    const ObstacleMap map = empty_map(Vec3(-2, -4, -4), Vec3(12, 4, 4));
    const Terminals terminals = simple_terminals(Vec3(0, 0, 0), Vec3(10, 0, 0));
    const SphereCorridor corridor = plan_corridor(map, terminals, 1);
    const auto paths = select_boundary_terminals(corridor, terminals, 3, 0.8);
    REQUIRE(paths.size() == 3);
    for (int k = 0; k < 3; ++k) {
        REQUIRE(paths[k].size() == corridor.planes.size() + 2);
        CHECK((paths[k].front() - terminals.start_vertices()[k]).norm() == 0.0);
        CHECK((paths[k].back() - terminals.map(terminals.start_vertices()[k])).norm() <
              1e-12);
        for (std::size_t m = 0; m < corridor.planes.size(); ++m) {
            const double dist = (paths[k][m + 1] - corridor.planes[m].center).norm();
            CHECK(dist <= 0.8 * corridor.planes[m].lambda + 1e-9);
        }
    }
}

TEST_CASE("straight equal-sphere corridor keeps boundary polylines parallel") {
    SphereCorridor corridor;
    for (int i = 0; i < 5; ++i) corridor.spheres.push_back({Vec3(2.0 * i, 0, 0), 2.0});
    for (int i = 0; i + 1 < 5; ++i)
        corridor.planes.push_back(
            intersection_plane(corridor.spheres[i], corridor.spheres[i + 1]));
    const Terminals terminals = simple_terminals(Vec3(0, 0, 0), Vec3(8, 0, 0), 0.9);
    const auto paths = select_boundary_terminals(corridor, terminals, 3, 0.8);
    for (int k = 0; k < 3; ++k)
        for (std::size_t m = 1; m + 2 < paths[k].size(); ++m) {
            const Vec3 step = paths[k][m + 1] - paths[k][m];
            CHECK((step - Vec3(2.0, 0, 0)).norm() < 1e-9);
        }
}

TEST_CASE("duplicate boundary angles are rejected") {
    SphereCorridor corridor;
    corridor.spheres.push_back({Vec3(0, 0, 0), 2.0});
    corridor.spheres.push_back({Vec3(2, 0, 0), 2.0});
    corridor.planes.push_back(intersection_plane(corridor.spheres[0], corridor.spheres[1]));
    // Two identical start vertices produce the same angular offset.
    std::vector<Vec3> start{Vec3(0, 1, 0), Vec3(0, 1, 0), Vec3(0, -1, 0)};
    std::vector<Vec3> goal{Vec3(20, 1, 0), Vec3(20, 1, 0), Vec3(20, -1, 0)};
    CHECK_THROWS_AS(select_boundary_terminals(corridor, Terminals(start, goal), 3, 0.8),
                    ConfigError);
}

TEST_CASE("boundary count outside the valid range is rejected") {
    const ObstacleMap map = empty_map(Vec3(-2, -4, -4), Vec3(12, 4, 4));
    const Terminals terminals = simple_terminals(Vec3(0, 0, 0), Vec3(10, 0, 0));
    const SphereCorridor corridor = plan_corridor(map, terminals, 1);
    CHECK_THROWS_AS(select_boundary_terminals(corridor, terminals, 2, 0.8), ConfigError);
    CHECK_THROWS_AS(select_boundary_terminals(corridor, terminals, 4, 0.8), ConfigError);
    CHECK_THROWS_AS(select_boundary_terminals(corridor, terminals, 3, 1.2), ConfigError);
}

TEST_CASE("chord-length allocation averages the boundary chords") {
    std::vector<std::vector<Vec3>> paths;
    paths.push_back({Vec3(0, 0, 0), Vec3(2, 0, 0)});
    paths.push_back({Vec3(0, 1, 0), Vec3(4, 1, 0)});
    const auto dt = init_time_allocation(paths, 1.0);
    REQUIRE(dt.size() == 1);
    CHECK(dt[0] == doctest::Approx(3.0));

    std::vector<std::vector<Vec3>> single;
    single.push_back({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)});
    const auto dt2 = init_time_allocation(single, 2.0);
    for (double v : dt2) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("zero chord is a degenerate-segment error") {
    std::vector<std::vector<Vec3>> paths;
    paths.push_back({Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)});
    CHECK_THROWS_AS(init_time_allocation(paths, 1.0), GeometryError);
    CHECK_THROWS_AS(init_time_allocation(paths, 0.0), ConfigError);
}

TEST_CASE("terminal construction validates the affine pairing") {
    std::vector<Vec3> start{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    std::vector<Vec3> goal{Vec3(10, 0, 0), Vec3(11, 0, 0), Vec3(10, 1, 0)};
    const Terminals t(start, goal);
    CHECK((t.map(Vec3(0.3, 0.3, 0.0)) - Vec3(10.3, 0.3, 0.0)).norm() < 1e-9);
    CHECK(t.affine_dim() == 2);

    // Overlapping regions are rejected.
    CHECK_THROWS_AS(Terminals(start, start), ConfigError);
}
