#include <CLI11.hpp>
#include <iostream>

#include "rems/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Reconfigurable-array simulator: gain maps, switch-state "
                 "optimization, and file inspection"};
    app.require_subcommand(1);

    std::string config_path, inspect_path, out_dir;
    double grid_deg = 0.0;
    long seed = -1;
    int threads = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory (overrides the config)");
        cmd->add_option("--seed", seed, "RNG seed (overrides the config)");
        cmd->add_option("--threads", threads, "worker thread count");
        cmd->add_option("--grid-deg", grid_deg, "grid resolution in degrees (override)");
    };

    CLI::App* gain = app.add_subcommand("gain-map", "evaluate benchmark gain maps");
    gain->add_option("config", config_path, "run configuration JSON")->required();
    add_common(gain);

    CLI::App* opt = app.add_subcommand("optimize", "search switch configurations");
    opt->add_option("config", config_path, "run configuration JSON")->required();
    add_common(opt);

    CLI::App* ins = app.add_subcommand("inspect", "describe a touchstone/patterns/config file");
    ins->add_option("file", inspect_path, "file to inspect")->required();
    ins->add_option("--grid-deg", grid_deg, "grid resolution for pattern files");

    CLI11_PARSE(app, argc, argv);

    return rems::run_with_exit_codes([&] {
        if (ins->parsed()) {
            std::cout << rems::cmd_inspect(inspect_path, 12e9,
                                           grid_deg > 0.0 ? grid_deg : 5.0)
                             .dump(2)
                      << '\n';
            return;
        }
        rems::RunConfig cfg = rems::load_run_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed >= 0) cfg.seed = static_cast<unsigned>(seed);
        if (threads > 0) cfg.threads = threads;
        if (grid_deg > 0.0) cfg.grid_deg = grid_deg;
        if (gain->parsed())
            rems::cmd_gain_map(cfg);
        else
            rems::cmd_optimize(cfg);
    });
}
