// Experiment runner: one subcommand per experiment, flags override a config
// file, which overrides the documented defaults.

#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "syntonize/config.hpp"
#include "syntonize/error.hpp"
#include "syntonize/experiment.hpp"

using namespace syntonize;

namespace {

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

constexpr Flag kFlags[] = {
    {"--n", "n", "node / element count"},
    {"--r", "r", "connectivity ratio in (0,1]"},
    {"--seed", "seed", "master RNG seed"},
    {"--out", "out_dir", "output directory"},
    {"--fc", "carrier_hz", "carrier frequency (Hz)"},
    {"--sigma-ppm", "sigma_ppm", "initial frequency error scale (ppm)"},
    {"--epsilon", "epsilon_hz", "consensus stopping threshold (Hz)"},
    {"--max-iterations", "max_iterations", "iteration cap"},
    {"--ns", "ns", "comma-separated node counts"},
    {"--rs", "rs", "comma-separated connectivity ratios"},
    {"--p1", "p1", "probability of no topology change"},
    {"--p-triples", "p_triples", "';'-separated <no-change,add,remove> triples"},
    {"--adev", "adev", "Allan deviation over one interval"},
    {"--interval", "interval_s", "update interval T (s)"},
    {"--drift-iterations", "drift_iterations", "iterations per drift run"},
    {"--phase-threshold", "phase_threshold_deg", "phase std threshold (deg)"},
    {"--trials", "trials", "Monte Carlo trials"},
    {"--sims", "sims", "replicas per sweep point"},
    {"--samples", "samples", "lambda2 samples"},
    {"--threshold", "gain_threshold", "coherent gain threshold X"},
    {"--sigma-deg", "sigma_deg", "phase error standard deviation (deg)"},
    {"--sigmas-deg", "sigmas_deg", "comma-separated phase error standard deviations (deg)"},
    {"--extent", "extent", "aperture side (wavelengths)"},
    {"--grid-step", "grid_step", "position quantum (wavelengths)"},
    {"--angle-step", "angle_step_deg", "principal cut step (deg)"},
    {"--uv-points", "uv_points", "u-v raster size (0 = principal cut)"},
    {"--steer-u", "steer_u", "steering direction cosine u"},
    {"--steer-v", "steer_v", "steering direction cosine v"},
};

constexpr std::pair<const char*, const char*> kDescriptions[] = {
    {"static", "static-topology consensus run"},
    {"dynamic", "consensus with random edge additions/removals"},
    {"drift", "consensus with oscillator drift, phase spread and coherent gain"},
    {"prob-gain", "P(G_c >= X) versus phase error"},
    {"rms-sweep", "RMS consensus error versus network size"},
    {"iter-sweep", "convergence iterations versus size and connectivity"},
    {"dyn-sweep", "convergence iterations of dynamic versus static networks"},
    {"lambda2", "lambda2 of W*W versus W*W1 after one topology change"},
    {"pattern", "array factor with and without phase errors"},
    {"layout", "random sparse planar array layout"},
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Decentralized frequency alignment experiments"};
    app.require_subcommand(1);

    struct Command {
        CLI::App* app;
        Experiment experiment;
        std::string config_file;
        std::map<std::string, std::string> values;
        std::map<std::string, CLI::Option*> options;
    };
    std::vector<Command> commands;
    commands.reserve(std::size(kDescriptions));
    for (const auto& [name, description] : kDescriptions) {
        Command& cmd = commands.emplace_back();
        cmd.experiment = *parse_experiment(name);
        cmd.app = app.add_subcommand(name, description);
        cmd.app->add_option("--config", cmd.config_file, "key = value file or JSON sidecar");
        for (const Flag& f : kFlags)
            cmd.options[f.key] = cmd.app->add_option(f.name, cmd.values[f.key], f.help);
    }

    std::string sidecar;
    CLI::App* rerun = app.add_subcommand("rerun", "regenerate results from a JSON sidecar");
    rerun->add_option("sidecar", sidecar, "sidecar written by a previous run")->required();
    std::string rerun_out;
    CLI::Option* rerun_out_opt = rerun->add_option("--out", rerun_out, "output directory override");

    CLI11_PARSE(app, argc, argv);

    ExperimentConfig cfg;
    try {
        if (rerun->parsed()) {
            load_config_file(cfg, sidecar);
            if (rerun_out_opt->count())
                cfg.out_dir = rerun_out;
        } else {
            for (Command& cmd : commands) {
                if (!cmd.app->parsed())
                    continue;
                cfg = default_config(cmd.experiment);
                if (!cmd.config_file.empty()) {
                    load_config_file(cfg, cmd.config_file);
                    cfg.experiment = cmd.experiment;
                }
                for (const auto& [key, option] : cmd.options)
                    if (option->count())
                        apply_setting(cfg, key, cmd.values[key]);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return run_experiment(cfg, std::cout, std::cerr).exit_code;
}
