// Command-line runner: scenario execution, parameter sweeps, oracle
// comparisons, and plot-data export for shape-space trajectory files.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "psd/harness.hpp"

namespace {

int manifest_exit_code(const psd::RunManifest& m) {
    if (m.status == "success") return 0;
    if (m.status == "partial") return 2;
    return 1;
}

psd::ExperimentConfig load_config(const std::string& path, long long seed_override,
                                  const std::string& kind_override = "") {
    psd::IniDocument doc = psd::IniDocument::parse_file(path);
    if (seed_override >= 0)
        doc.set("experiment", "seed", std::to_string(seed_override));
    if (!kind_override.empty()) doc.set("experiment", "kind", kind_override);
    return psd::ExperimentConfig::parse(std::move(doc));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pure-shape-dynamics laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = psd::default_out_dir();
    long long seed = -1;
    int threads = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        if (needs_config)
            cmd->add_option("--config", config_path, "experiment config file")
                ->required()
                ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override [experiment] seed");
        cmd->add_option("--threads", threads, "worker threads for sweeps");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run one scenario");
    add_common(simulate);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid");
    add_common(sweep_cmd);

    CLI::App* compare = app.add_subcommand(
        "compare-oracle", "integrate the equation of state against the Newtonian oracle");
    add_common(compare);

    CLI::App* export_cmd = app.add_subcommand("export", "emit plot-ready tables");
    std::string input, kind = "com-vs-s", output;
    export_cmd->add_option("--input", input, "trajectory file")
        ->required()
        ->check(CLI::ExistingFile);
    export_cmd->add_option("--kind", kind,
                           "sphere-path|com-vs-s|delta-vs-s|time-of-s");
    export_cmd->add_option("--output", output, "output table path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const auto cfg = load_config(config_path, seed);
            const auto manifest = psd::run(cfg, out_dir);
            std::printf("%s: %s\n", manifest.status.c_str(),
                        manifest.summary.dump().c_str());
            return manifest_exit_code(manifest);
        }
        if (sweep_cmd->parsed()) {
            const auto cfg = load_config(config_path, seed);
            const auto result = psd::sweep(cfg, out_dir, threads);
            std::printf("sweep: %zu runs, %zu failures\n", result.manifests.size(),
                        result.failures);
            return result.failures == 0 ? 0 : 2;
        }
        if (compare->parsed()) {
            const auto cfg = load_config(config_path, seed, "oracle-compare");
            const auto manifest = psd::run(cfg, out_dir);
            std::printf("%s: %s\n", manifest.status.c_str(),
                        manifest.summary.dump().c_str());
            return manifest_exit_code(manifest);
        }
        if (export_cmd->parsed()) {
            psd::export_plot_data(input, kind, output);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
