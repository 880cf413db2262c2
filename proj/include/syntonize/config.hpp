#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "syntonize/topology.hpp"

namespace syntonize {

enum class Experiment {
    Static,
    Dynamic,
    Drift,
    ProbGain,
    RmsSweep,
    IterSweep,
    DynSweep,
    Lambda2,
    Pattern,
    Layout,
};

std::string_view to_string(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);
const std::vector<Experiment>& all_experiments();

/// Every knob of every experiment. Fields an experiment does not read are
/// still validated and serialized so the sidecar fully describes the run.
struct ExperimentConfig {
    Experiment experiment = Experiment::Static;

    // network and consensus
    int n = 100;
    double r = 0.1;
    double carrier_hz = 1e9;
    double sigma_ppm = 100.0;
    double epsilon_hz = 2e-3;
    int max_iterations = 50000;
    std::vector<int> ns;
    std::vector<double> rs;

    // dynamic topology
    double p1 = 0.0;
    std::vector<MutationProbabilities> p_triples;

    // drift
    double adev = 1e-9;
    double interval_s = 1.0;
    int drift_iterations = 200;
    double phase_threshold_deg = 18.0;

    // Monte Carlo
    int trials = 100000;
    int sims = 1000;
    int samples = 10000;
    double gain_threshold = 0.9;
    double sigma_deg = 18.0;
    std::vector<double> sigmas_deg;

    // array geometry and patterns
    double extent = 10.0;
    double grid_step = 0.5;
    double angle_step_deg = 1.0;
    int uv_points = 0; ///< 0 = principal cut only
    double steer_u = 0.0;
    double steer_v = 0.0;

    std::uint64_t seed = 1;
    std::string out_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Documented defaults for one experiment: f_c = 1 GHz, sigma = 100 ppm,
/// epsilon = 2e-3 Hz, ADEV = 1e-9, T = 1 s, plus per-experiment sweeps
/// (e.g. r = 0.15 and n in {20, 60, 100} for drift runs).
ExperimentConfig default_config(Experiment e);

struct Violation {
    std::string field;
    std::string code; ///< e.g. InsufficientEdges, InvalidRatio, ProbabilitySum, OutOfRange
    std::string message;
};

/// Empty iff every downstream precondition holds.
std::vector<Violation> validate_config(const ExperimentConfig& cfg);

/// Sets one field from its textual form ("n", "r", "ns" = "20,60,100",
/// "p_triples" = "0.9,0.05,0.05;0,0.5,0.5", ...). Throws Parse on unknown
/// keys or malformed values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Textual form of one field, the inverse of apply_setting.
std::string format_setting(const ExperimentConfig& cfg, std::string_view key);

const std::vector<std::string>& setting_keys();

/// Flat "key = value" file; '#' starts a comment.
void read_key_value(ExperimentConfig& cfg, std::istream& is);
void write_key_value(std::ostream& os, const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep the values already in cfg.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

} // namespace syntonize
