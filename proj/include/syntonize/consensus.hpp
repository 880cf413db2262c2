#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "syntonize/rng.hpp"
#include "syntonize/topology.hpp"

namespace syntonize {

/// Node frequencies stored as offsets from the carrier, which keeps
/// millihertz resolution well inside double precision at GHz carriers.
struct FrequencyState {
    std::vector<double> offsets_hz;
    double carrier_hz = 1e9;

    int size() const noexcept { return static_cast<int>(offsets_hz.size()); }
    double absolute_hz(int i) const { return carrier_hz + offsets_hz.at(i); }
    double mean_offset_hz() const;
    /// max_i |offset_i - mean|.
    double max_deviation_hz() const;

    bool operator==(const FrequencyState&) const = default;
};

struct ConsensusConfig {
    /// Stop once max_i |f_i - mean| < epsilon_hz.
    double epsilon_hz = 2e-3;
    int max_iterations = 50000;
    /// Initial frequency error scale, parts per million of the carrier.
    double sigma_ppm = 100.0;
    /// Keep every per-iteration state (and phase vector). Sweeps turn this
    /// off and keep only the scalar series and the final state.
    bool record_states = true;

    /// Throws InvalidArgument when a field is out of range.
    void validate() const;
};

struct DriftConfig {
    /// Allan deviation over one update interval (fractional frequency).
    double adev = 1e-9;
    double interval_s = 1.0;
    /// Drift runs never reach exact consensus; they run this many iterations.
    int iterations = 200;
    double phase_threshold_deg = 18.0;

    void validate() const;
};

struct Trajectory {
    /// states[k] is f(k); states.front() is the initial state. Only the final
    /// state is kept when recording is off.
    std::vector<FrequencyState> states;
    std::vector<double> max_deviation_hz;
    std::vector<double> mean_offset_hz;
    /// First k with max deviation < epsilon.
    std::optional<int> converged_at;

    /// Dynamic runs: topology change applied before step k (None at k = 0).
    std::vector<MutationKind> mutations;

    /// Drift runs: phi_i(k) = 2 pi T (f_i(k) - mean f(k)).
    std::vector<std::vector<double>> phases_rad;
    std::vector<double> phase_std_deg;
    std::vector<double> coherent_gain;
    /// First k whose phase std is below the configured threshold.
    std::optional<int> phase_converged_at;

    int iterations() const noexcept { return static_cast<int>(max_deviation_hz.size()) - 1; }
    const FrequencyState& final_state() const { return states.back(); }
};

/// offsets_i = sigma_ppm * 1e-6 * carrier * X_i, X_i ~ N(0, 1) i.i.d.
FrequencyState init_frequencies(int n, double carrier_hz, double sigma_ppm, Rng& rng);

/// f <- W f. Throws DimensionMismatch.
FrequencyState consensus_step(const MixingMatrix& w, const FrequencyState& f);

bool has_converged(const FrequencyState& f, double epsilon_hz);

/// Iterates f(k) = W f(k-1) until convergence or max_iterations. Reaching the
/// cap leaves converged_at empty; that is a reported outcome, not an error.
Trajectory run_static(const MixingMatrix& w, const FrequencyState& f0, const ConsensusConfig& cfg);

/// Each iteration applies one mutate_topology draw, then a consensus step
/// with the updated matrix.
Trajectory run_dynamic(MixingMatrix w, NetworkGraph g, const FrequencyState& f0,
                       const MutationProbabilities& p, const ConsensusConfig& cfg, Rng& rng);
Trajectory run_dynamic(MixingMatrix w, NetworkGraph g, const FrequencyState& f0, double p1,
                       const ConsensusConfig& cfg, Rng& rng);

/// Each iteration adds a per-node drift drawn uniformly from
/// [0, adev * carrier] Hz, then takes a consensus step. Runs exactly
/// drift.iterations iterations; converged_at still uses cfg.epsilon_hz.
Trajectory run_with_drift(const MixingMatrix& w, const FrequencyState& f0, const DriftConfig& drift,
                          const ConsensusConfig& cfg, Rng& rng);

/// Columns: iteration, max_abs_deviation_hz, mean_offset_hz, phase_std_deg,
/// coherent_gain, mutation_event. Columns that do not apply to the run are
/// left empty (phase columns) or "none" (mutation_event).
void write_trajectory_csv(std::ostream& os, const Trajectory& t);

} // namespace syntonize
