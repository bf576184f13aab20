// dmi: command-line driver for delay-measure identification runs.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dmi/experiment.hpp"
#include "dmi/io.hpp"

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

template <class Fn>
int guarded(Fn&& fn)
{
    try {
        fn();
        return exit_ok;
    } catch (const dmi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const dmi::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const dmi::DivergenceError& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return exit_runtime;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Delay-measure system identification"};
    app.require_subcommand(1);
    app.footer("Threads: set DMI_NUM_THREADS. Exit codes: 0 ok, 2 config error, 3 runtime error.");

    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string grid;
    std::string param;
    std::string run_dir;

    auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
    run->add_option("config", config, "Run configuration (JSON)")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out, "Output directory (default: config output)");

    auto* scan = app.add_subcommand("scan", "Evaluate the objective on a 1-D parameter grid");
    scan->add_option("config", config, "Run configuration (JSON)")->required();
    scan->add_option("--grid", grid, "Grid a:b:step")->required();
    scan->add_option("--param", param, "Parameter to vary (default: first)");
    scan->add_option("--seed", seed, "Override the config seed");
    scan->add_option("--out", out, "Output directory (default: config output)");

    auto* plots = app.add_subcommand("emit-plots", "Write plot-ready tables for a run directory");
    plots->add_option("run-dir", run_dir, "Directory written by `dmi run`")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    if (*run) {
        return guarded([&] {
            const auto cfg = dmi::load_run_config(config, seed);
            const std::filesystem::path dir = out.empty() ? cfg.output : out;
            dmi::run_experiment(cfg, dir);
            std::cout << "wrote " << dir.string() << "\n";
        });
    }
    if (*scan) {
        return guarded([&] {
            const auto cfg = dmi::load_run_config(config, seed);
            dmi::LandscapeBlock block;
            try {
                block.grid = dmi::parse_grid(grid);
            } catch (const dmi::ParameterError& e) {
                throw dmi::ConfigError("--grid", e.what());
            }
            if (!param.empty()) {
                const auto& names = cfg.model.param_names;
                const auto it = std::find(names.begin(), names.end(), param);
                if (it == names.end()) {
                    throw dmi::ConfigError("--param", "unknown parameter '" + param + "'");
                }
                block.param = static_cast<std::size_t>(it - names.begin());
            }
            if (block.grid.lo < cfg.optimizer.lower[block.param] || block.grid.hi > cfg.optimizer.upper[block.param]) {
                throw dmi::ConfigError("--grid", "must lie inside optimizer.lower/upper");
            }
            const std::filesystem::path dir = out.empty() ? cfg.output : out;
            const auto pts = dmi::run_scan(cfg, block, dir);
            std::cout << "wrote " << (dir / "landscape.csv").string() << " (" << pts.size() << " points)\n";
        });
    }
    return guarded([&] {
        for (const auto& p : dmi::emit_plot_data(run_dir)) {
            std::cout << "wrote " << p.string() << "\n";
        }
    });
}
