#include "vtube/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vtube/errors.hpp"

namespace vtube {

namespace {

using nlohmann::json;

/// Field access that names the offending path in the error message.
const json& require(const json& node, const std::string& key, const std::string& path) {
    if (!node.is_object() || !node.contains(key))
        throw ConfigError("scenario: missing field '" + path + "'");
    return node.at(key);
}

double require_positive(const json& node, const std::string& key, const std::string& path) {
    const json& field = require(node, key, path);
    if (!field.is_number() || field.get<double>() <= 0.0)
        throw ConfigError("scenario: field '" + path + "' must be a positive number");
    return field.get<double>();
}

Vec3 parse_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3 || !j.at(0).is_number())
        throw ConfigError("scenario: field '" + path + "' must be a 3-element array");
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

std::vector<Vec3> parse_points(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw ConfigError("scenario: field '" + path + "' must be a non-empty array");
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_vec3(j.at(i), path + "[" + std::to_string(i) + "]"));
    return out;
}

json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

namespace {
Scenario parse_scenario(const json& doc);
}

Scenario Scenario::from_json(const std::string& text) {
    try {
        return parse_scenario(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: invalid JSON (") + e.what() + ")");
    }
}

namespace {
Scenario parse_scenario(const json& doc) {
    Scenario s;
    s.name = doc.value("name", "unnamed");
    s.seed = doc.value("seed", std::uint64_t{1});

    const json& world = require(doc, "world", "world");
    const json& bounds = require(world, "bounds", "world.bounds");
    s.map.bounds_min = parse_vec3(require(bounds, "min", "world.bounds.min"), "world.bounds.min");
    s.map.bounds_max = parse_vec3(require(bounds, "max", "world.bounds.max"), "world.bounds.max");
    if ((s.map.bounds_max - s.map.bounds_min).minCoeff() <= 0.0)
        throw ConfigError("scenario: field 'world.bounds' must have max > min");
    if (world.contains("obstacles")) {
        const json& obstacles = world.at("obstacles");
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            const std::string path = "world.obstacles[" + std::to_string(i) + "]";
            const json& oj = obstacles.at(i);
            Obstacle o;
            const std::string type = require(oj, "type", path + ".type").get<std::string>();
            if (type == "sphere") {
                o.shape = Obstacle::Shape::Sphere;
                o.center = parse_vec3(require(oj, "center", path + ".center"), path + ".center");
                o.radius = require_positive(oj, "radius", path + ".radius");
            } else if (type == "box") {
                o.shape = Obstacle::Shape::Box;
                o.box_min = parse_vec3(require(oj, "min", path + ".min"), path + ".min");
                o.box_max = parse_vec3(require(oj, "max", path + ".max"), path + ".max");
                if ((o.box_max - o.box_min).minCoeff() <= 0.0)
                    throw ConfigError("scenario: field '" + path + "' must have max > min");
            } else {
                throw ConfigError("scenario: field '" + path + ".type' must be sphere or box");
            }
            o.known = oj.value("known", true);
            s.map.obstacles.push_back(o);
        }
    }

    const json& terminals = require(doc, "terminals", "terminals");
    s.start_vertices = parse_points(require(terminals, "start", "terminals.start"),
                                    "terminals.start");
    s.goal_vertices = parse_points(require(terminals, "goal", "terminals.goal"),
                                   "terminals.goal");
    if (s.start_vertices.size() != s.goal_vertices.size())
        throw ConfigError("scenario: fields 'terminals.start' and 'terminals.goal' must pair up");

    const json& planner = require(doc, "planner", "planner");
    s.planner.boundary_count =
        static_cast<int>(require_positive(planner, "kc", "planner.kc"));
    s.planner.degree = planner.value("degree", 5);
    s.planner.smooth_order = planner.value("smooth_order", 3);
    if (s.planner.smooth_order < 1 || s.planner.smooth_order > s.planner.degree)
        throw ConfigError("scenario: field 'planner.smooth_order' must be in [1, degree]");
    s.planner.v_max = parse_vec3(require(planner, "v_max", "planner.v_max"), "planner.v_max");
    if (s.planner.v_max.minCoeff() <= 0.0)
        throw ConfigError("scenario: field 'planner.v_max' must be positive");
    s.planner.v_nominal = require_positive(planner, "v_nominal", "planner.v_nominal");
    s.planner.epsilon = require_positive(planner, "epsilon", "planner.epsilon");
    s.planner.rho = planner.value("rho", 0.8);
    if (s.planner.rho <= 0.0 || s.planner.rho >= 1.0)
        throw ConfigError("scenario: field 'planner.rho' must be in (0,1)");
    s.planner.corridor.lambda_min = planner.value("lambda_min", 0.5);
    s.planner.corridor.max_radius = planner.value("max_radius", 2.5);
    s.planner.corridor.min_radius = planner.value("min_radius", 0.3);
    s.planner.corridor.grid_pitch = planner.value("grid_pitch", 1.0);
    s.planner.corridor.jitter = planner.value("jitter", 0.25);
    s.planner.corridor.inflation = planner.value("inflation", 0.6);
    s.planner.corridor.shortcut = planner.value("shortcut", true);
    s.planner.corridor.sample_budget =
        planner.value("sample_budget", std::size_t{200000});

    const json& sim = require(doc, "sim", "sim");
    s.robot_count = static_cast<int>(require_positive(sim, "robots", "sim.robots"));
    s.sim.r_s = require_positive(sim, "r_s", "sim.r_s");
    s.sim.r_a = require_positive(sim, "r_a", "sim.r_a");
    s.sim.dt = sim.value("dt", 0.01);
    s.sim.k_b = sim.value("k_b", 1.5);
    s.sim.k_a = sim.value("k_a", 2.0);
    s.sim.v_sat = sim.value("v_sat", 2.0 * s.planner.v_nominal);
    s.sim.sense_radius = sim.value("sense_radius", 6.0);
    s.sim.commit_fraction = sim.value("commit_fraction", 0.8);
    s.sim.handover_threshold = sim.value("handover_threshold", 1.0);
    s.sim.arrival_tol = sim.value("arrival_tol", 1e-2);
    s.sim.max_steps = sim.value("max_steps", 60000);
    s.sim.initial_leader = sim.value("initial_leader", 0);
    s.sim.log_stride = sim.value("log_stride", 1);
    s.sim.seed = sim.value("seed", s.seed);
    s.sim.validate();

    Terminals check = s.terminals();  // validates disjointness and the pairing map
    (void)check;
    return s;
}
}  // namespace

Scenario Scenario::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario: cannot open file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

std::string Scenario::to_json() const {
    json doc;
    doc["name"] = name;
    doc["seed"] = seed;
    doc["world"]["bounds"]["min"] = vec3_json(map.bounds_min);
    doc["world"]["bounds"]["max"] = vec3_json(map.bounds_max);
    doc["world"]["obstacles"] = json::array();
    for (const auto& o : map.obstacles) {
        json oj;
        if (o.shape == Obstacle::Shape::Sphere) {
            oj["type"] = "sphere";
            oj["center"] = vec3_json(o.center);
            oj["radius"] = o.radius;
        } else {
            oj["type"] = "box";
            oj["min"] = vec3_json(o.box_min);
            oj["max"] = vec3_json(o.box_max);
        }
        oj["known"] = o.known;
        doc["world"]["obstacles"].push_back(oj);
    }
    for (const auto& v : start_vertices) doc["terminals"]["start"].push_back(vec3_json(v));
    for (const auto& v : goal_vertices) doc["terminals"]["goal"].push_back(vec3_json(v));
    doc["planner"] = {{"kc", planner.boundary_count},
                      {"degree", planner.degree},
                      {"smooth_order", planner.smooth_order},
                      {"v_max", vec3_json(planner.v_max)},
                      {"v_nominal", planner.v_nominal},
                      {"epsilon", planner.epsilon},
                      {"rho", planner.rho},
                      {"lambda_min", planner.corridor.lambda_min},
                      {"max_radius", planner.corridor.max_radius},
                      {"min_radius", planner.corridor.min_radius},
                      {"grid_pitch", planner.corridor.grid_pitch},
                      {"jitter", planner.corridor.jitter},
                      {"inflation", planner.corridor.inflation},
                      {"shortcut", planner.corridor.shortcut},
                      {"sample_budget", planner.corridor.sample_budget}};
    doc["sim"] = {{"robots", robot_count},
                  {"r_s", sim.r_s},
                  {"r_a", sim.r_a},
                  {"dt", sim.dt},
                  {"k_b", sim.k_b},
                  {"k_a", sim.k_a},
                  {"v_sat", sim.v_sat},
                  {"sense_radius", sim.sense_radius},
                  {"commit_fraction", sim.commit_fraction},
                  {"handover_threshold", sim.handover_threshold},
                  {"arrival_tol", sim.arrival_tol},
                  {"max_steps", sim.max_steps},
                  {"initial_leader", sim.initial_leader},
                  {"log_stride", sim.log_stride},
                  {"seed", sim.seed}};
    return doc.dump(2);
}

}  // namespace vtube
