#include "frameflow/config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo Feynman-Kac solver for heat, Navier-Stokes and dynamo problems on a half-space"};
    std::string subcommand, config_path, out_dir;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    app.add_option("subcommand", subcommand,
                   "heat-scalar | heat-form | ns2d | dynamo3d | localtime-check | validate")
        ->required();
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "master seed override");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : frameflow::kUsage;
    }

    frameflow::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = frameflow::load_config(config_path);
    } catch (const frameflow::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return frameflow::kUsage;
    }
    cfg.subcommand = subcommand;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (workers) cfg.mc.workers = *workers;
    if (seed) cfg.mc.seed = *seed;
    return frameflow::run(cfg);
}
