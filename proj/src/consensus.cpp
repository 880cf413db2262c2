#include "syntonize/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "syntonize/array_model.hpp"
#include "syntonize/error.hpp"

namespace syntonize {

double FrequencyState::mean_offset_hz() const
{
    if (offsets_hz.empty())
        return 0.0;
    return std::accumulate(offsets_hz.begin(), offsets_hz.end(), 0.0) / static_cast<double>(offsets_hz.size());
}

double FrequencyState::max_deviation_hz() const
{
    const double mean = mean_offset_hz();
    double worst = 0.0;
    for (double f : offsets_hz)
        worst = std::max(worst, std::abs(f - mean));
    return worst;
}

void ConsensusConfig::validate() const
{
    if (!(epsilon_hz > 0.0))
        throw Error(ErrorCode::InvalidArgument, "epsilon_hz must be positive");
    if (max_iterations < 1)
        throw Error(ErrorCode::InvalidArgument, "max_iterations must be at least 1");
    if (!(sigma_ppm > 0.0))
        throw Error(ErrorCode::InvalidArgument, "sigma_ppm must be positive");
}

void DriftConfig::validate() const
{
    // adev = 0 is allowed: it degenerates to a drift-free run.
    if (!(adev >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "adev must be nonnegative");
    if (!(interval_s > 0.0))
        throw Error(ErrorCode::InvalidArgument, "interval_s must be positive");
    if (iterations < 1)
        throw Error(ErrorCode::InvalidArgument, "drift iterations must be at least 1");
    if (!(phase_threshold_deg > 0.0))
        throw Error(ErrorCode::InvalidArgument, "phase threshold must be positive");
}

FrequencyState init_frequencies(int n, double carrier_hz, double sigma_ppm, Rng& rng)
{
    if (n < 2)
        throw Error(ErrorCode::InvalidArgument, "need at least two nodes");
    FrequencyState f;
    f.carrier_hz = carrier_hz;
    f.offsets_hz.resize(static_cast<std::size_t>(n), 0.0);
    const double sigma_hz = sigma_ppm * 1e-6 * carrier_hz;
    if (sigma_hz == 0.0)
        return f;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : f.offsets_hz)
        x = sigma_hz * normal(rng);
    return f;
}

FrequencyState consensus_step(const MixingMatrix& w, const FrequencyState& f)
{
    if (w.size() != f.size())
        throw Error(ErrorCode::DimensionMismatch, "mixing matrix is " + std::to_string(w.size()) +
                                                      "x" + std::to_string(w.size()) + ", state has " +
                                                      std::to_string(f.size()) + " nodes");
    FrequencyState next;
    next.carrier_hz = f.carrier_hz;
    next.offsets_hz.resize(f.offsets_hz.size());
    const Eigen::Map<const Eigen::VectorXd> in(f.offsets_hz.data(), f.size());
    Eigen::Map<Eigen::VectorXd> out(next.offsets_hz.data(), f.size());
    out.noalias() = w.matrix() * in;
    return next;
}

bool has_converged(const FrequencyState& f, double epsilon_hz)
{
    return f.max_deviation_hz() < epsilon_hz;
}

namespace {

class Recorder {
public:
    Recorder(Trajectory& t, bool keep_states) : t_(t), keep_states_(keep_states) {}

    // Appends f as the next snapshot; returns its max deviation.
    double record(const FrequencyState& f)
    {
        const double dev = f.max_deviation_hz();
        t_.max_deviation_hz.push_back(dev);
        t_.mean_offset_hz.push_back(f.mean_offset_hz());
        if (keep_states_ || t_.states.empty())
            t_.states.push_back(f);
        else
            t_.states.back() = f;
        return dev;
    }

private:
    Trajectory& t_;
    bool keep_states_;
};

void check_inputs(const MixingMatrix& w, const FrequencyState& f0, const ConsensusConfig& cfg)
{
    cfg.validate();
    if (w.size() != f0.size())
        throw Error(ErrorCode::DimensionMismatch, "mixing matrix and initial state sizes differ");
}

} // namespace

Trajectory run_static(const MixingMatrix& w, const FrequencyState& f0, const ConsensusConfig& cfg)
{
    check_inputs(w, f0, cfg);
    Trajectory t;
    Recorder rec(t, cfg.record_states);
    FrequencyState f = f0;
    if (rec.record(f) < cfg.epsilon_hz) {
        t.converged_at = 0;
        return t;
    }
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        f = consensus_step(w, f);
        if (rec.record(f) < cfg.epsilon_hz) {
            t.converged_at = k;
            break;
        }
    }
    return t;
}

Trajectory run_dynamic(MixingMatrix w, NetworkGraph g, const FrequencyState& f0, const MutationProbabilities& p,
                       const ConsensusConfig& cfg, Rng& rng)
{
    check_inputs(w, f0, cfg);
    if (g.size() != w.size())
        throw Error(ErrorCode::DimensionMismatch, "graph and mixing matrix sizes differ");
    Trajectory t;
    Recorder rec(t, cfg.record_states);
    FrequencyState f = f0;
    t.mutations.push_back(MutationKind::None);
    if (rec.record(f) < cfg.epsilon_hz) {
        t.converged_at = 0;
        return t;
    }
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        TopologyUpdate update = mutate_topology(std::move(w), std::move(g), p, rng);
        w = std::move(update.w);
        g = std::move(update.g);
        t.mutations.push_back(update.kind);
        f = consensus_step(w, f);
        if (rec.record(f) < cfg.epsilon_hz) {
            t.converged_at = k;
            break;
        }
    }
    return t;
}

Trajectory run_dynamic(MixingMatrix w, NetworkGraph g, const FrequencyState& f0, double p1,
                       const ConsensusConfig& cfg, Rng& rng)
{
    return run_dynamic(std::move(w), std::move(g), f0, MutationProbabilities::from_no_change(p1), cfg, rng);
}

Trajectory run_with_drift(const MixingMatrix& w, const FrequencyState& f0, const DriftConfig& drift,
                          const ConsensusConfig& cfg, Rng& rng)
{
    check_inputs(w, f0, cfg);
    drift.validate();
    Trajectory t;
    Recorder rec(t, cfg.record_states);

    auto record = [&](const FrequencyState& f, int k) {
        const double dev = rec.record(f);
        if (!t.converged_at && dev < cfg.epsilon_hz)
            t.converged_at = k;
        const double mean = f.mean_offset_hz();
        std::vector<double> phases(f.offsets_hz.size());
        std::transform(f.offsets_hz.begin(), f.offsets_hz.end(), phases.begin(),
                       [&](double x) { return phase_from_freq_error(x - mean, drift.interval_s); });
        const double spread = phase_std_deg(phases);
        t.phase_std_deg.push_back(spread);
        t.coherent_gain.push_back(coherent_gain(phases));
        if (!t.phase_converged_at && spread < drift.phase_threshold_deg)
            t.phase_converged_at = k;
        if (cfg.record_states || t.phases_rad.empty())
            t.phases_rad.push_back(std::move(phases));
        else
            t.phases_rad.back() = std::move(phases);
    };

    const double drift_hz = drift.adev * f0.carrier_hz;
    std::uniform_real_distribution<double> perturbation(0.0, drift_hz);
    FrequencyState f = f0;
    record(f, 0);
    for (int k = 1; k <= drift.iterations; ++k) {
        if (drift_hz > 0.0)
            for (double& x : f.offsets_hz)
                x += perturbation(rng);
        f = consensus_step(w, f);
        record(f, k);
    }
    return t;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t)
{
    const auto old_precision = os.precision(17);
    os << "iteration,max_abs_deviation_hz,mean_offset_hz,phase_std_deg,coherent_gain,mutation_event\n";
    for (std::size_t k = 0; k < t.max_deviation_hz.size(); ++k) {
        os << k << ',' << t.max_deviation_hz[k] << ',' << t.mean_offset_hz[k] << ',';
        if (k < t.phase_std_deg.size())
            os << t.phase_std_deg[k];
        os << ',';
        if (k < t.coherent_gain.size())
            os << t.coherent_gain[k];
        os << ',' << (k < t.mutations.size() ? to_string(t.mutations[k]) : "none") << '\n';
    }
    os.precision(old_precision);
}

} // namespace syntonize
