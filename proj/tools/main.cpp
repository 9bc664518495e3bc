#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "vtube/bench.hpp"
#include "vtube/errors.hpp"
#include "vtube/pipeline.hpp"
#include "vtube/scenario.hpp"
#include "vtube/swarm_sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIntegrity = 4;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw vtube::Error("cannot open output file " + path);
    out << content;
}

int run_plan(const std::string& scenario_path, const std::string& out_path) {
    const vtube::Scenario scenario = vtube::Scenario::from_file(scenario_path);
    const vtube::PlanResult result = vtube::plan_tube(scenario);
    vtube::save_tube(result.tube, out_path);
    const std::string summary = vtube::plan_summary(result);
    write_file(out_path + ".summary.txt", summary);
    std::cout << summary;
    std::cout << "tube artifact: " << out_path << "\n";
    return kExitOk;
}

int run_generate(const std::string& artifact, int k, std::uint64_t seed,
                 const std::string& out_path, int vertex) {
    const vtube::VirtualTube tube = vtube::load_tube(artifact);
    const vtube::GenerateResult batch = vtube::generate_batch(tube, k, seed, vertex);
    write_file(out_path, batch.csv);
    std::cout << "trajectories: " << batch.count << "\n"
              << "wall time: " << batch.wall_seconds << " s ("
              << batch.wall_seconds / batch.count * 1e6 << " us per trajectory)\n"
              << "batch file: " << out_path << "\n";
    return kExitOk;
}

int run_simulate(const std::string& scenario_path, const std::string& out_prefix,
                 const std::string& allocation, bool replan) {
    if (scenario_path.empty())
        throw CLI::ValidationError("simulate needs --scenario");
    const vtube::Scenario scenario = vtube::Scenario::from_file(scenario_path);
    vtube::SimLog log;
    if (replan) {
        vtube::ReplanResult result =
            vtube::replan_loop(vtube::make_stage_planner(scenario), scenario.map,
                               scenario.terminals(), scenario.robot_count, scenario.sim);
        log = std::move(result.log);
    } else {
        const vtube::Allocation alloc = allocation == "initial"
                                            ? vtube::Allocation::Initial
                                            : vtube::Allocation::Approximate;
        const vtube::VirtualTube tube = vtube::plan_tube(scenario).tube;
        const double spacing =
            std::max(2.0 * scenario.sim.r_s, scenario.sim.r_a + scenario.sim.r_s) + 0.1;
        const std::vector<vtube::Vec3> starts =
            vtube::spawn_positions(scenario.terminals(), scenario.robot_count, spacing);
        std::vector<vtube::RobotState> robots(starts.size());
        for (std::size_t i = 0; i < starts.size(); ++i) {
            robots[i].position = starts[i];
            robots[i].theta = tube.assign(starts[i]);
            robots[i].r_s = scenario.sim.r_s;
            robots[i].r_a = scenario.sim.r_a;
        }
        robots[0].leader = true;
        log = vtube::simulate(tube, robots, scenario.sim, scenario.map, alloc);
    }
    std::ostringstream csv;
    log.write_csv(csv);
    write_file(out_prefix + ".csv", csv.str());
    write_file(out_prefix + ".summary.json", log.summary_json());
    std::cout << log.summary_json() << "\n";
    return kExitOk;
}

int run_bench(const std::string& scenario_path, const std::vector<int>& ks,
              const std::vector<double>& epsilons, const std::string& out_path) {
    const vtube::Scenario scenario = vtube::Scenario::from_file(scenario_path);
    const vtube::PlanResult plan = vtube::plan_tube(scenario);
    vtube::BenchConfig config;
    if (!ks.empty()) config.k_values = ks;
    if (!epsilons.empty()) config.epsilons = epsilons;
    config.seed = scenario.seed;
    const vtube::BenchReport report = vtube::run_bench(plan.tube, config);
    write_file(out_path, report.to_csv());
    std::cout << report.to_csv();
    for (double eps : (epsilons.empty() ? std::vector<double>{plan.tube.epsilon()} : epsilons))
        std::cout << "epsilon " << eps << ": generation-vs-k fit R^2 = "
                  << report.generation_fit_r2(eps) << "\n";
    return kExitOk;
}

int run_inspect(const std::string& artifact) {
    const vtube::VirtualTube tube = vtube::load_tube(artifact);
    std::cout << "boundaries (k_c): " << tube.boundary_count() << "\n"
              << "segments (n_t): " << tube.segment_count() << "\n"
              << "epsilon: " << tube.epsilon() << " s\n"
              << "critical regions: " << tube.leaf_count() << "\n"
              << "boundary times:";
    for (int k = 0; k < tube.boundary_count(); ++k)
        std::cout << ' ' << tube.tree().root().values()(k);
    std::cout << " s\ncontent hash: " << std::hex << tube.content_hash() << std::dec << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal virtual tube planner and swarm simulator"};
    app.require_subcommand(1);

    std::string scenario_path, artifact_path, out_path = "tube.json";
    std::string allocation = "approx";
    std::vector<int> k_values;
    std::vector<double> epsilons;
    int k = 100;
    int vertex = -1;
    std::uint64_t seed = 1;
    bool replan = false;

    auto* plan = app.add_subcommand("plan", "Plan a tube from a scenario file");
    plan->add_option("--scenario", scenario_path, "Scenario JSON path")->required();
    plan->add_option("--out", out_path, "Output artifact path");

    auto* generate = app.add_subcommand("generate", "Sample trajectories from an artifact");
    generate->add_option("--artifact", artifact_path, "Tube artifact path")->required();
    generate->add_option("--k", k, "Number of trajectories");
    generate->add_option("--seed", seed, "Sampling seed");
    generate->add_option("--vertex", vertex, "Force a boundary vertex parameter");
    generate->add_option("--out", out_path, "Output CSV path");

    auto* simulate = app.add_subcommand("simulate", "Simulate a swarm through the tube");
    simulate->add_option("--scenario", scenario_path, "Scenario JSON path");
    simulate->add_option("--out", out_path, "Output prefix");
    simulate->add_option("--allocation", allocation, "approx|initial")
        ->check(CLI::IsMember({"approx", "initial"}));
    simulate->add_flag("--replan", replan, "Committed-tube replanning loop");

    auto* bench = app.add_subcommand("bench", "Timing report: affine generation vs direct LP");
    bench->add_option("--scenario", scenario_path, "Scenario JSON path")->required();
    bench->add_option("--k", k_values, "Trajectory counts");
    bench->add_option("--epsilon", epsilons, "Error bounds");
    bench->add_option("--out", out_path, "Output CSV path");

    auto* inspect = app.add_subcommand("inspect", "Print tube artifact metadata");
    inspect->add_option("--artifact", artifact_path, "Tube artifact path")->required();

    try {
        app.parse(argc, argv);
        if (plan->parsed()) return run_plan(scenario_path, out_path);
        if (generate->parsed()) return run_generate(artifact_path, k, seed, out_path, vertex);
        if (simulate->parsed()) return run_simulate(scenario_path, out_path, allocation, replan);
        if (bench->parsed()) return run_bench(scenario_path, k_values, epsilons, out_path);
        if (inspect->parsed()) return run_inspect(artifact_path);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const vtube::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const vtube::PlanningFailure& e) {
        std::cerr << "planning failed: " << e.what() << " (explored " << e.explored
                  << " nodes)\n";
        return kExitInfeasible;
    } catch (const vtube::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const vtube::IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return kExitIntegrity;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
