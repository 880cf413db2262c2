#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "syntonize/consensus.hpp"
#include "syntonize/topology.hpp"

namespace syntonize {

struct Summary {
    double mean = 0.0;
    double stddev = 0.0; ///< sample standard deviation (n - 1)
    std::size_t count = 0;

    static Summary of(const std::vector<double>& xs);
};

struct SweepPoint {
    std::vector<double> axis; ///< one value per SweepResult::axis_names entry
    Summary stats;
    std::size_t censored = 0; ///< replicas that hit the iteration cap
    double reference = 0.0;   ///< analytic or auxiliary value; NaN when unused
};

struct SweepResult {
    std::string label;
    std::uint64_t seed = 0;
    std::vector<std::string> axis_names;
    std::string statistic; ///< what mean/stddev summarize
    std::string reference_name;
    std::vector<SweepPoint> points; ///< lexicographically increasing axis values
};

/// Runs body(replica) for replica in [0, count) on up to `threads` workers
/// (0 = hardware concurrency). Each replica must write only its own output.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0);

/// Fraction of trials in which N i.i.d. N(0, sigma^2) phase errors yield a
/// coherent gain >= x.
double prob_gain_exceeds(int n, double sigma_rad, double x, int trials, std::uint64_t seed);

/// prob_gain_exceeds over a grid; axes (n, sigma_deg), mean = probability.
SweepResult prob_gain_sweep(const std::vector<int>& ns, const std::vector<double>& sigmas_deg, double x,
                            int trials, std::uint64_t seed);

/// Per n: RMS over sims of the consensus value's normalized error
/// (mean final offset / carrier, in ppm). The reference column carries the
/// analytic standard error sigma_ppm / sqrt(n). Small n use feasible_ratio.
SweepResult rms_error_sweep(const std::vector<int>& ns, double r, int sims, const ConsensusConfig& cfg,
                            double carrier_hz, std::uint64_t seed);

/// Per (n, r): mean and spread of converged_at over converged replicas;
/// capped runs are counted in `censored`.
SweepResult convergence_iterations_sweep(const std::vector<int>& ns, const std::vector<double>& rs, int sims,
                                         const ConsensusConfig& cfg, double carrier_hz, std::uint64_t seed);

struct Lambda2Comparison {
    std::vector<double> unchanged; ///< lambda2(W W)
    std::vector<double> changed;   ///< lambda2(W W1), W1 = W after one mutation
    Summary unchanged_stats;
    Summary changed_stats;
    /// Fraction of samples with lambda2(W W1) < lambda2(W W).
    double fraction_changed_smaller = 0.0;
};

Lambda2Comparison lambda2_product_comparison(int n, double r, int samples, std::uint64_t seed,
                                             const MutationProbabilities& p = MutationProbabilities::from_no_change(0.0));

/// Per (r, triple): mean converged_at of run_dynamic. Axes are
/// (r, p_no_change, p_add, p_remove); <1, 0, 0> is the static baseline.
/// Replica s uses the same graph and initial state for every triple.
SweepResult dynamic_convergence_sweep(int n, const std::vector<double>& rs,
                                      const std::vector<MutationProbabilities>& triples, int sims,
                                      const ConsensusConfig& cfg, double carrier_hz, std::uint64_t seed);

struct DriftRun {
    int n = 0;
    double r = 0.0;
    Trajectory trajectory;
};

/// One run_with_drift per size at connectivity feasible_ratio(n, r_min).
std::vector<DriftRun> drift_experiment(const std::vector<int>& ns, double r_min, const DriftConfig& drift,
                                       const ConsensusConfig& cfg, double carrier_hz, std::uint64_t seed);

/// Header: axis names..., mean, stddev, count, censored, <reference_name>.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

} // namespace syntonize
