// Command-line front end: single runs and parameter sweeps.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ccsa/scenario.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

ccsa::ScenarioConfig base_config(const std::string& path) {
    return path.empty() ? ccsa::ScenarioConfig{} : ccsa::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contingent-CSA switching engine"};
    app.require_subcommand(1);

    std::string config_path, out_dir, param, values;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<unsigned> threads;

    auto* run = app.add_subcommand("run", "Run one scenario and write CSV outputs");
    run->add_option("--config", config_path, "JSON config or a previous manifest.json")->required();
    run->add_option("--seed", seed, "Override the RNG seed");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--paths", paths, "Override the number of paths");
    run->add_option("--threads", threads, "Worker threads (0 = hardware)");

    auto* sw = app.add_subcommand("sweep", "Re-solve over a list of parameter values at a common seed");
    sw->add_option("--param", param, "c, c_z, c_zeta, delta or lambda_preset")->required();
    sw->add_option("--values", values, "Comma-separated values")->required();
    sw->add_option("--config", config_path, "Base JSON config");
    sw->add_option("--seed", seed, "Override the RNG seed");
    sw->add_option("--out", out_dir, "Write sweep.csv here instead of stdout");
    sw->add_option("--paths", paths, "Override the number of paths");
    sw->add_option("--threads", threads, "Worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        ccsa::ScenarioConfig cfg = base_config(config_path);
        if (seed) cfg.seed = *seed;
        if (paths) cfg.n_paths = *paths;
        if (threads) cfg.threads = *threads;

        if (run->parsed()) {
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            const auto rep = ccsa::run_scenario(cfg);
            const auto& s = rep.result.solution;
            for (const auto& w : rep.result.warnings) std::cerr << "warning: " << w << '\n';
            std::cout.precision(6);
            std::cout << "v_star " << s.star().value << " (se " << s.star().std_error << ", initial "
                      << ccsa::to_string(s.initial_regime) << "; best initial " << ccsa::to_string(s.best_initial_regime())
                      << ")\n"
                      << "v_cva  " << s.v_cva.value << " (se " << s.v_cva.std_error << ")\n"
                      << "v_coll " << s.v_coll.value << " (se " << s.v_coll.std_error << ")\n"
                      << "switches " << s.total_switches() << ", wall " << rep.wall_seconds << " s\n"
                      << "outputs in " << rep.config.output_dir << '\n';
            return 0;
        }

        const auto res = ccsa::sweep(cfg, param, split_list(values));
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
        if (!res.v_star_non_decreasing && param != "lambda_preset")
            std::cerr << "note: v_star is not non-decreasing over the sweep values\n";
        if (out_dir.empty()) {
            ccsa::write_sweep_csv(std::cout, res);
        } else {
            std::filesystem::create_directories(out_dir);
            std::ofstream os(std::filesystem::path(out_dir) / "sweep.csv");
            ccsa::write_sweep_csv(os, res);
            std::cout << "wrote " << (std::filesystem::path(out_dir) / "sweep.csv").string() << '\n';
        }
        return 0;
    } catch (const ccsa::PipelineError& e) {
        std::cerr << "error " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
