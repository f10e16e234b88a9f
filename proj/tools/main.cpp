// Command-line front end: scenario generation and Monte Carlo sweeps.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

#include "pacesd/harness.hpp"

namespace {

int do_gen_scenario(const std::string& config_path, const std::string& out_path) {
    const pacesd::ExperimentConfig cfg = pacesd::parse_config_file(config_path);
    std::mt19937_64 master(cfg.base_seed);
    const pacesd::Scenario sc = pacesd::generate_scenario(
        cfg.K, cfg.paths_per_vehicle, cfg.l_max, cfg.k_max, cfg.n_bs, cfg.frame, master());
    std::ofstream out(out_path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + out_path);
    }
    pacesd::write_candidates(out, sc);
    std::cerr << "wrote " << sc.total_candidates() << " candidates to " << out_path << "\n";
    return 0;
}

int do_sweep(const std::string& config_path, const std::string& out_path, int parallel,
             bool trace) {
    pacesd::ExperimentConfig cfg = pacesd::parse_config_file(config_path);
    if (trace) {
        if (parallel > 1) {
            throw pacesd::ConfigError("--trace requires --parallel 1");
        }
        cfg.solver.trace = &std::cerr;
    }
    std::ofstream out(out_path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + out_path);
    }
    const pacesd::SweepSummary summary = pacesd::sweep(cfg, out, parallel, &std::cerr);
    if (!out) {
        throw std::runtime_error("write failure on output file: " + out_path);
    }
    std::cerr << summary.rows_written << " rows written";
    if (summary.failed_trials > 0) {
        std::cerr << " (" << summary.failed_trials << " failed trials)";
    }
    std::cerr << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OTFS uplink joint association/estimation/detection simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    int parallel = 1;
    bool trace = false;

    CLI::App* gen = app.add_subcommand("gen-scenario", "generate a candidate pool file");
    gen->add_option("--config", config_path, "experiment config file")->required();
    gen->add_option("--out", out_path, "output candidate file")->required();

    CLI::App* run = app.add_subcommand("run", "run a single-threaded sweep to CSV");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_path, "output CSV file")->required();

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a sweep to CSV");
    sweep_cmd->add_option("--config", config_path, "experiment config file")->required();
    sweep_cmd->add_option("--out", out_path, "output CSV file")->required();
    sweep_cmd->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_flag("--trace", trace, "per-iteration solver diagnostics on stderr");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) {
            return do_gen_scenario(config_path, out_path);
        }
        if (run->parsed()) {
            return do_sweep(config_path, out_path, 1, false);
        }
        return do_sweep(config_path, out_path, parallel, trace);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const pacesd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
