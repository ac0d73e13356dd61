// dgrkit: analyze | simulate | bounds | instability
//
// Exit codes: 0 success, 2 input/parse error, 3 numeric/precondition error.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "dgrkit/bounds.hpp"
#include "dgrkit/harness.hpp"
#include "dgrkit/io.hpp"
#include "dgrkit/regan.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw dgr::ParseError("cannot write file: " + path.string());
    }
    out << content;
    dgr::log_info("wrote " + path.string());
}

int run_analyze(const std::string& system_path, const std::string& out_dir) {
    const dgr::LtiSystem sys = dgr::load_system_file(system_path);
    const dgr::RegularizabilityReport report = dgr::analyze(sys);
    const std::string rendered = dgr::to_json(report);
    write_file(std::filesystem::path(out_dir) / "analysis.json", rendered);
    std::cout << rendered;
    return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_dir) {
    const dgr::ScenarioConfig cfg = dgr::load_scenario_file(config_path);
    const dgr::ScenarioResult result = dgr::run_scenario(cfg);
    write_file(std::filesystem::path(out_dir) / "trajectory.csv",
               dgr::to_csv(result.log));
    const std::string summary = dgr::to_json(result.summary);
    write_file(std::filesystem::path(out_dir) / "summary.json", summary);
    std::cout << summary;
    return kExitOk;
}

int run_bounds(const std::string& system_path, int order, double alpha,
               const std::string& trajectory_path, const std::string& out_dir) {
    const dgr::LtiSystem sys = dgr::load_system_file(system_path);
    std::string rendered;
    if (trajectory_path.empty()) {
        rendered = dgr::bounds_csv(sys, order, alpha);
    } else {
        std::ifstream in(trajectory_path, std::ios::binary);
        if (!in) {
            throw dgr::ParseError("cannot open file: " + trajectory_path);
        }
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        const dgr::TrajectoryLog log = dgr::trajectory_from_csv(text);
        rendered = dgr::bounds_csv(sys, order, alpha, &log);
    }
    write_file(std::filesystem::path(out_dir) / "bounds.csv", rendered);
    std::cout << rendered;
    return kExitOk;
}

int run_instability(const std::string& system_path, int order, int restarts,
                    std::uint64_t seed, const std::string& out_dir) {
    const dgr::LtiSystem sys = dgr::load_system_file(system_path);
    const dgr::InstabilityEstimate estimate =
        dgr::estimate_instability(sys.A, order, restarts, seed);
    const std::string rendered = dgr::to_json(estimate);
    write_file(std::filesystem::path(out_dir) / "instability.json", rendered);
    std::cout << rendered;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online regulation toolkit for unknown discrete-time LTI systems"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();

    auto* analyze = app.add_subcommand(
        "analyze", "Regularizability analysis of a system file");
    std::string analyze_system;
    analyze->add_option("system", analyze_system, "System JSON file")->required();

    auto* simulate =
        app.add_subcommand("simulate", "Run a closed-loop scenario from a config file");
    std::string simulate_config;
    simulate->add_option("config", simulate_config, "Scenario JSON file")->required();

    auto* bounds = app.add_subcommand(
        "bounds", "Analytic instability bounds, optionally with a realized trajectory bound");
    std::string bounds_system;
    std::string bounds_trajectory;
    int bounds_order = 1;
    double bounds_alpha = 0.0;
    bounds->add_option("system", bounds_system, "System JSON file")->required();
    bounds->add_option("--t", bounds_order, "Largest order to tabulate")->required();
    bounds->add_option("--alpha", bounds_alpha, "Regularizer for the trajectory bound")
        ->capture_default_str();
    bounds->add_option("--trajectory", bounds_trajectory,
                       "Trajectory CSV for the realized bound column");

    auto* instability = app.add_subcommand(
        "instability", "Certified lower-bound estimate of the instability number");
    std::string instability_system;
    int instability_order = 1;
    int instability_restarts = 16;
    std::uint64_t instability_seed = 0;
    instability->add_option("system", instability_system, "System JSON file")->required();
    instability->add_option("--t", instability_order, "Frame order")->required();
    instability->add_option("--restarts", instability_restarts, "Ascent restarts")
        ->capture_default_str();
    instability->add_option("--seed", instability_seed, "Restart seed")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (analyze->parsed()) return run_analyze(analyze_system, out_dir);
        if (simulate->parsed()) return run_simulate(simulate_config, out_dir);
        if (bounds->parsed()) {
            return run_bounds(bounds_system, bounds_order, bounds_alpha,
                              bounds_trajectory, out_dir);
        }
        if (instability->parsed()) {
            return run_instability(instability_system, instability_order,
                                   instability_restarts, instability_seed, out_dir);
        }
    } catch (const dgr::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const dgr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitInput;
}
