#include "vtube/swarm_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "vtube/errors.hpp"
#include "vtube/format.hpp"

namespace vtube {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1p-53;
}

Vec3 unit_from_seed(std::uint64_t seed) {
    const double z = 2.0 * uniform01(seed) - 1.0;
    const double phi = 2.0 * M_PI * uniform01(seed);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3(r * std::cos(phi), r * std::sin(phi), z);
}

Vec3 clamp_norm(const Vec3& v, double limit) {
    const double n = v.norm();
    return n > limit ? Vec3(v * (limit / n)) : v;
}

struct Metrics {
    double min_inter = std::numeric_limits<double>::infinity();
    double min_obstacle = std::numeric_limits<double>::infinity();
};

}  // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0) || dt > 0.02)
        throw ConfigError("sim: step must be in (0, 0.02] s");
    if (!(r_a > r_s) || !(r_s > 0.0))
        throw ConfigError("sim: need r_a > r_s > 0");
    if (!(v_sat > 0.0) || !(k_b > 0.0) || !(k_a >= 0.0))
        throw ConfigError("sim: gains and saturation must be positive");
    if (!(commit_fraction > 0.0) || commit_fraction >= 1.0)
        throw ConfigError("sim: commit fraction must be in (0,1)");
    if (sense_radius <= commit_fraction * sense_radius)
        throw ConfigError("sim: sensing radius must exceed the committed range");
}

Vec3 control_step(const RobotState& robot, const Vec3& ref_position, const Vec3& ref_velocity,
                  const std::vector<RobotState>& neighbors, const SimConfig& config,
                  std::uint64_t tiebreak) {
    const Vec3 v_t = ref_velocity;
    const Vec3 v_b = clamp_norm(config.k_b * (ref_position - robot.position), config.v_sat);

    Vec3 v_a = Vec3::Zero();
    for (const auto& other : neighbors) {
        const Vec3 delta = robot.position - other.position;
        const double d = delta.norm();
        const double trigger = robot.r_a + other.r_s;
        if (d >= trigger) continue;
        if (d < 1e-9) {
            // Coincident positions: repel along a deterministic direction.
            v_a += config.k_a * trigger * unit_from_seed(tiebreak);
        } else {
            v_a += config.k_a * (trigger - d) * (delta / d);
        }
    }
    return clamp_norm(v_t + v_b + v_a, config.v_sat);
}

std::vector<Vec3> spawn_positions(const Terminals& terminals, int count, double spacing) {
    if (count < 1) throw ConfigError("spawn: robot count must be >= 1");
    const auto& verts = terminals.start_vertices();
    const Vec3 c = terminals.start_centroid();

    if (count == 1) return {c};

    Eigen::MatrixXd offsets(3, verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) offsets.col(i) = verts[i] - c;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(offsets, Eigen::ComputeFullU);
    const Vec3 u1 = svd.matrixU().col(0);
    const Vec3 u2 = svd.matrixU().col(1);

    // 2D convex polygon in the terminal plane, consistent winding.
    std::vector<Eigen::Vector2d> poly;
    for (const auto& v : verts)
        poly.emplace_back((v - c).dot(u1), (v - c).dot(u2));
    double area2 = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        area2 += a.x() * b.y() - b.x() * a.y();
    }
    if (std::abs(area2) < 1e-12)
        throw ConfigError("spawn: start region is degenerate for multiple robots");
    if (area2 < 0.0) std::reverse(poly.begin(), poly.end());

    const auto inside = [&](const Eigen::Vector2d& p) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const auto& a = poly[i];
            const auto& b = poly[(i + 1) % poly.size()];
            const double cross =
                (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
            if (cross < 1e-9) return false;
        }
        return true;
    };

    double radius = 0.0;
    for (const auto& p : poly) radius = std::max(radius, p.norm());
    std::vector<Eigen::Vector2d> lattice;
    const double dy = spacing * std::sqrt(3.0) / 2.0;
    const int rows = static_cast<int>(radius / dy) + 1;
    const int cols = static_cast<int>(radius / spacing) + 1;
    for (int iy = -rows; iy <= rows; ++iy)
        for (int ix = -cols; ix <= cols; ++ix) {
            Eigen::Vector2d p(ix * spacing + (iy % 2 != 0 ? spacing / 2.0 : 0.0), iy * dy);
            if (inside(p)) lattice.push_back(p);
        }
    std::sort(lattice.begin(), lattice.end(),
              [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                  const double na = a.squaredNorm(), nb = b.squaredNorm();
                  if (std::abs(na - nb) > 1e-12) return na < nb;
                  if (std::abs(a.x() - b.x()) > 1e-12) return a.x() < b.x();
                  return a.y() < b.y();
              });
    if (static_cast<int>(lattice.size()) < count)
        throw ConfigError("spawn: start region too small for " + std::to_string(count) +
                          " robots at spacing " + std::to_string(spacing));

    std::vector<Vec3> out;
    for (int i = 0; i < count; ++i)
        out.push_back(c + lattice[i].x() * u1 + lattice[i].y() * u2);
    return out;
}

void SimLog::write_csv(std::ostream& out) const {
    out << "t,robot,x,y,z,vx,vy,vz,min_dist,min_obstacle_dist\n";
    for (const auto& r : rows) {
        out << format_double(r.t) << ',' << r.robot << ',' << format_double(r.position.x())
            << ',' << format_double(r.position.y()) << ',' << format_double(r.position.z())
            << ',' << format_double(r.velocity.x()) << ',' << format_double(r.velocity.y())
            << ',' << format_double(r.velocity.z()) << ',' << format_double(r.min_robot_dist)
            << ',' << format_double(r.min_obstacle_dist) << '\n';
    }
}

std::string SimLog::summary_json() const {
    nlohmann::json doc;
    doc["steps"] = steps;
    doc["all_arrived"] = all_arrived;
    doc["flight_time"] = flight_time;
    doc["mean_speed"] = mean_speed;
    doc["min_inter_robot_distance"] = std::isfinite(min_inter_robot) ? min_inter_robot : -1.0;
    doc["min_obstacle_distance"] = std::isfinite(min_obstacle) ? min_obstacle : -1.0;
    doc["replan_count"] = static_cast<int>(replan_events.size());
    doc["handover_count"] = static_cast<int>(handovers.size());
    doc["violations"] = violations;
    nlohmann::json completions = nlohmann::json::array();
    for (double t : completion_times)
        completions.push_back(std::isnan(t) ? nlohmann::json() : nlohmann::json(t));
    doc["completion_times"] = completions;
    return doc.dump(2);
}

namespace {

/// Shared fixed-step integrator core. `reference` yields the tracked pose
/// and feedforward for robot i at its clock; `on_step` runs after each
/// integration step (sensing, stage switching, handover).
struct SimDriver {
    const SimConfig& config;
    const ObstacleMap& map;
    std::vector<RobotState>& robots;
    SimLog& log;

    std::vector<double> path_length;
    std::vector<double> arrival;

    explicit SimDriver(const SimConfig& cfg, const ObstacleMap& world,
                       std::vector<RobotState>& r, SimLog& l)
        : config(cfg), map(world), robots(r), log(l),
          path_length(r.size(), 0.0),
          arrival(r.size(), std::numeric_limits<double>::quiet_NaN()) {}

    Metrics step_metrics() const {
        Metrics m;
        for (std::size_t i = 0; i < robots.size(); ++i) {
            for (std::size_t j = i + 1; j < robots.size(); ++j)
                m.min_inter = std::min(m.min_inter,
                                       (robots[i].position - robots[j].position).norm());
            m.min_obstacle =
                std::min(m.min_obstacle, map.clearance(robots[i].position, true));
        }
        return m;
    }

    void run(const std::function<void(int, Vec3&, Vec3&)>& reference,
             const std::function<Vec3(int)>& goal_of,
             const std::function<void(int step)>& on_step) {
        const int n = static_cast<int>(robots.size());
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double d = (robots[i].position - robots[j].position).norm();
                if (d < 2.0 * config.r_s - 1e-9)
                    throw std::invalid_argument("simulate: robots spawn closer than 2 r_s");
            }

        int step = 0;
        for (; step < config.max_steps; ++step) {
            const double t = step * config.dt;
            const std::vector<RobotState> snapshot = robots;
            const Metrics metrics = step_metrics();
            log.min_inter_robot = std::min(log.min_inter_robot, metrics.min_inter);
            log.min_obstacle = std::min(log.min_obstacle, metrics.min_obstacle);
            if (metrics.min_inter < 2.0 * config.r_s - 0.01 &&
                log.violations.size() < 64)
                log.violations.push_back("inter-robot distance " +
                                         std::to_string(metrics.min_inter) + " at t=" +
                                         std::to_string(t));

            bool all_done = true;
            for (int i = 0; i < n; ++i) {
                Vec3 ref_pos, ref_vel;
                reference(i, ref_pos, ref_vel);
                std::vector<RobotState> neighbors;
                neighbors.reserve(n - 1);
                for (int j = 0; j < n; ++j)
                    if (j != i) neighbors.push_back(snapshot[j]);
                const std::uint64_t tiebreak =
                    config.seed ^ (static_cast<std::uint64_t>(step) << 20) ^
                    static_cast<std::uint64_t>(i);
                const Vec3 v =
                    control_step(snapshot[i], ref_pos, ref_vel, neighbors, config, tiebreak);

                double min_dist = -1.0;
                for (int j = 0; j < n; ++j)
                    if (j != i) {
                        const double d = (snapshot[i].position - snapshot[j].position).norm();
                        min_dist = min_dist < 0.0 ? d : std::min(min_dist, d);
                    }
                if (step % config.log_stride == 0)
                    log.rows.push_back({t, i, snapshot[i].position, v, min_dist,
                                        map.clearance(snapshot[i].position, true)});

                robots[i].position += config.dt * v;
                robots[i].clock += config.dt;
                path_length[i] += config.dt * v.norm();

                if (std::isnan(arrival[i]) &&
                    (robots[i].position - goal_of(i)).norm() <= config.arrival_tol)
                    arrival[i] = (step + 1) * config.dt;
                if (std::isnan(arrival[i])) all_done = false;
            }
            on_step(step);
            if (all_done) {
                ++step;
                break;
            }
        }
        log.steps = step;
        log.completion_times = arrival;
        log.all_arrived = true;
        double speed_sum = 0.0;
        int arrived = 0;
        for (std::size_t i = 0; i < arrival.size(); ++i) {
            if (std::isnan(arrival[i])) {
                log.all_arrived = false;
                continue;
            }
            log.flight_time = std::max(log.flight_time, arrival[i]);
            if (arrival[i] > 0.0) {
                speed_sum += path_length[i] / arrival[i];
                ++arrived;
            }
        }
        log.mean_speed = arrived > 0 ? speed_sum / arrived : 0.0;
    }
};

}  // namespace

SimLog simulate(const VirtualTube& tube, std::vector<RobotState> robots,
                const SimConfig& config, const ObstacleMap& map, Allocation allocation) {
    config.validate();
    if (robots.empty()) throw std::invalid_argument("simulate: no robots");

    std::vector<PiecewiseBezier> trajectories;
    for (const auto& r : robots)
        trajectories.push_back(allocation == Allocation::Approximate
                                   ? tube.trajectory(r.theta)
                                   : tube.trajectory_initial_allocation(r.theta));

    SimLog log;
    SimDriver driver(config, map, robots, log);
    driver.run(
        [&](int i, Vec3& ref_pos, Vec3& ref_vel) {
            const auto& traj = trajectories[i];
            const double t = std::min(robots[i].clock, traj.total_time());
            ref_pos = traj.eval(t, 0);
            ref_vel = robots[i].clock < traj.total_time() ? Vec3(traj.eval(t, 1))
                                                          : Vec3(Vec3::Zero());
        },
        [&](int i) -> Vec3 { return trajectories[i].eval(trajectories[i].total_time(), 0); },
        [](int) {});
    return log;
}

ReplanResult replan_loop(const StagePlanner& planner, const ObstacleMap& world,
                         const Terminals& terminals, int robot_count,
                         const SimConfig& config) {
    config.validate();
    if (config.sense_radius <= 0.0)
        throw ConfigError("replan: sensing radius must be positive");

    ReplanResult result;
    std::vector<int> revealed;

    const double spacing = std::max(2.0 * config.r_s, config.r_a + config.r_s) + 0.1;
    const std::vector<Vec3> starts = spawn_positions(terminals, robot_count, spacing);

    std::vector<RobotState> robots(robot_count);
    for (int i = 0; i < robot_count; ++i) {
        robots[i].position = starts[i];
        robots[i].r_s = config.r_s;
        robots[i].r_a = config.r_a;
    }
    int leader = std::clamp(config.initial_leader, 0, robot_count - 1);
    robots[leader].leader = true;

    const auto reveal_obstacles = [&](const Vec3& leader_pos) {
        for (std::size_t o = 0; o < world.obstacles.size(); ++o) {
            if (world.obstacles[o].known) continue;
            if (std::find(revealed.begin(), revealed.end(), static_cast<int>(o)) !=
                revealed.end())
                continue;
            if (world.obstacles[o].distance(leader_pos) < config.sense_radius)
                revealed.push_back(static_cast<int>(o));
        }
    };

    reveal_obstacles(robots[leader].position);
    StagePlan first = planner(world.known_view(revealed), terminals, robots[leader].position);
    result.stages.push_back(first.committed);
    result.committed_snapshots.push_back(first.committed.to_json());
    std::vector<bool> stage_final{first.final_stage};

    std::vector<int> active(robot_count, 0);
    std::vector<PiecewiseBezier> trajectories(robot_count);
    for (int i = 0; i < robot_count; ++i) {
        robots[i].theta = result.stages[0].assign(robots[i].position);
        trajectories[i] = result.stages[0].trajectory(robots[i].theta);
    }

    SimLog log;
    SimDriver driver(config, world, robots, log);
    driver.run(
        [&](int i, Vec3& ref_pos, Vec3& ref_vel) {
            const auto& traj = trajectories[i];
            const double t = std::min(robots[i].clock, traj.total_time());
            ref_pos = traj.eval(t, 0);
            ref_vel = robots[i].clock < traj.total_time() ? Vec3(traj.eval(t, 1))
                                                          : Vec3(Vec3::Zero());
        },
        [&](int i) -> Vec3 {
            // Goal of the robot's current stage; "arrived" only counts on the
            // final stage, handled below by keeping earlier stages short.
            if (!stage_final[active[i]])
                return Vec3(Vec3::Constant(std::numeric_limits<double>::infinity()));
            return trajectories[i].eval(trajectories[i].total_time(), 0);
        },
        [&](int step) {
            const double now = (step + 1) * config.dt;
            reveal_obstacles(robots[leader].position);

            // Stage switching: a robot past its committed horizon moves to
            // the next stage; the first one to run out triggers the replan.
            for (int i = 0; i < robot_count; ++i) {
                const int s = active[i];
                if (stage_final[s]) continue;
                if (robots[i].clock < trajectories[i].total_time()) continue;
                if (s + 1 >= static_cast<int>(result.stages.size())) {
                    const Terminals next_terminals(result.stages[s].terminals().goal_vertices(),
                                                   terminals.goal_vertices());
                    StagePlan next = planner(world.known_view(revealed), next_terminals,
                                             robots[leader].position);
                    result.stages.push_back(next.committed);
                    result.committed_snapshots.push_back(next.committed.to_json());
                    stage_final.push_back(next.final_stage);
                    log.replan_events.push_back(
                        {now, s + 1, next.committed.content_hash()});
                }
                const Vec3 terminus = trajectories[i].eval(trajectories[i].total_time(), 0);
                robots[i].theta = result.stages[s + 1].assign(terminus);
                trajectories[i] = result.stages[s + 1].trajectory(robots[i].theta);
                robots[i].clock = 0.0;
                active[i] = s + 1;
            }

            // Leader handover: the foremost robot takes over once it is
            // within the threshold of the committed front, measured along
            // the stage axis.
            const int newest = static_cast<int>(result.stages.size()) - 1;
            const Vec3 front = result.stages[newest].terminals().goal_centroid();
            const Vec3 rear = result.stages[newest].terminals().start_centroid();
            const Vec3 axis = (front - rear).normalized();
            int foremost = 0;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < robot_count; ++i) {
                const double d = std::max(0.0, (front - robots[i].position).dot(axis));
                if (d < best) {
                    best = d;
                    foremost = i;
                }
            }
            if (foremost != leader && best < config.handover_threshold) {
                log.handovers.push_back({now, leader, foremost});
                robots[leader].leader = false;
                robots[foremost].leader = true;
                leader = foremost;
            }
        });

    result.log = std::move(log);
    result.revealed_obstacles = revealed;
    return result;
}

}  // namespace vtube
