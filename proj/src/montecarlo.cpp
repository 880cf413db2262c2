#include "syntonize/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "syntonize/array_model.hpp"
#include "syntonize/error.hpp"

namespace syntonize {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kTrialsPerBlock = 1000;

void sort_points(SweepResult& sweep)
{
    std::stable_sort(sweep.points.begin(), sweep.points.end(),
                     [](const SweepPoint& a, const SweepPoint& b) { return a.axis < b.axis; });
}

void require_positive(int value, const char* what)
{
    if (value < 1)
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be at least 1");
}

struct Replica {
    NetworkGraph g;
    MixingMatrix w;
    FrequencyState f0;
};

Replica make_replica(int n, double r, double carrier_hz, double sigma_ppm, Rng& rng)
{
    NetworkGraph g = generate_connected_graph(n, r, rng);
    MixingMatrix w = build_mixing_matrix(g);
    FrequencyState f0 = init_frequencies(n, carrier_hz, sigma_ppm, rng);
    return {std::move(g), std::move(w), std::move(f0)};
}

ConsensusConfig quiet(ConsensusConfig cfg)
{
    cfg.record_states = false;
    return cfg;
}

} // namespace

Summary Summary::of(const std::vector<double>& xs)
{
    Summary s;
    s.count = xs.size();
    if (xs.empty()) {
        s.mean = kNaN;
        s.stddev = kNaN;
        return s;
    }
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    workers.clear();
    if (failure)
        std::rethrow_exception(failure);
}

double prob_gain_exceeds(int n, double sigma_rad, double x, int trials, std::uint64_t seed)
{
    require_positive(n, "n");
    require_positive(trials, "trials");
    if (!(sigma_rad >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "phase standard deviation must be nonnegative");
    if (!(x >= 0.0 && x <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "gain threshold must lie in [0,1]");

    const std::size_t total = static_cast<std::size_t>(trials);
    const std::size_t blocks = (total + kTrialsPerBlock - 1) / kTrialsPerBlock;
    std::vector<std::size_t> hits(blocks, 0);
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = replica_rng(seed, b);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> phases(static_cast<std::size_t>(n), 0.0);
        const std::size_t begin = b * kTrialsPerBlock;
        const std::size_t end = std::min(total, begin + kTrialsPerBlock);
        for (std::size_t t = begin; t < end; ++t) {
            if (sigma_rad > 0.0)
                for (double& p : phases)
                    p = sigma_rad * normal(rng);
            if (coherent_gain(phases) >= x)
                ++hits[b];
        }
    });
    const std::size_t count = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
    return static_cast<double>(count) / static_cast<double>(total);
}

SweepResult prob_gain_sweep(const std::vector<int>& ns, const std::vector<double>& sigmas_deg, double x, int trials,
                            std::uint64_t seed)
{
    SweepResult sweep;
    sweep.label = "prob_gain_exceeds";
    sweep.seed = seed;
    sweep.axis_names = {"n", "sigma_deg"};
    sweep.statistic = "probability";
    sweep.reference_name = "threshold";
    for (int n : ns) {
        for (double s : sigmas_deg) {
            SweepPoint pt;
            pt.axis = {static_cast<double>(n), s};
            // Each grid point gets its own master stream.
            const std::uint64_t point_seed = mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(n)) ^
                                                      mix_seed(std::llround(s * 1e6)));
            pt.stats.mean = prob_gain_exceeds(n, deg_to_rad(s), x, trials, point_seed);
            pt.stats.count = static_cast<std::size_t>(trials);
            pt.stats.stddev = std::sqrt(pt.stats.mean * (1.0 - pt.stats.mean) / trials);
            pt.reference = x;
            sweep.points.push_back(pt);
        }
    }
    sort_points(sweep);
    return sweep;
}

SweepResult rms_error_sweep(const std::vector<int>& ns, double r, int sims, const ConsensusConfig& cfg,
                            double carrier_hz, std::uint64_t seed)
{
    require_positive(sims, "sims");
    cfg.validate();
    SweepResult sweep;
    sweep.label = "rms_error";
    sweep.seed = seed;
    sweep.axis_names = {"n"};
    sweep.statistic = "rms_normalized_error_ppm";
    sweep.reference_name = "analytic_rms_ppm";
    const ConsensusConfig run_cfg = quiet(cfg);
    for (int n : ns) {
        const double ratio = feasible_ratio(n, r);
        std::vector<double> errors_ppm(static_cast<std::size_t>(sims));
        std::vector<char> capped(static_cast<std::size_t>(sims), 0);
        parallel_for(errors_ppm.size(), [&](std::size_t s) {
            Rng rng = replica_rng(seed, s, static_cast<std::uint64_t>(n));
            Replica rep = make_replica(n, ratio, carrier_hz, cfg.sigma_ppm, rng);
            const Trajectory t = run_static(rep.w, rep.f0, run_cfg);
            capped[s] = !t.converged_at;
            errors_ppm[s] = t.final_state().mean_offset_hz() / carrier_hz * 1e6;
        });
        SweepPoint pt;
        pt.axis = {static_cast<double>(n)};
        const Summary spread = Summary::of(errors_ppm);
        double ss = 0.0;
        for (double e : errors_ppm)
            ss += e * e;
        pt.stats.mean = std::sqrt(ss / static_cast<double>(errors_ppm.size()));
        pt.stats.stddev = spread.stddev;
        pt.stats.count = spread.count;
        pt.censored = static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
        pt.reference = cfg.sigma_ppm / std::sqrt(static_cast<double>(n));
        sweep.points.push_back(pt);
    }
    sort_points(sweep);
    return sweep;
}

SweepResult convergence_iterations_sweep(const std::vector<int>& ns, const std::vector<double>& rs, int sims,
                                         const ConsensusConfig& cfg, double carrier_hz, std::uint64_t seed)
{
    require_positive(sims, "sims");
    cfg.validate();
    SweepResult sweep;
    sweep.label = "convergence_iterations";
    sweep.seed = seed;
    sweep.axis_names = {"n", "r"};
    sweep.statistic = "converged_at";
    sweep.reference_name = "lambda2_mean";
    const ConsensusConfig run_cfg = quiet(cfg);
    for (int n : ns) {
        for (std::size_t ri = 0; ri < rs.size(); ++ri) {
            const double r = rs[ri];
            std::vector<int> iterations(static_cast<std::size_t>(sims), -1);
            std::vector<double> lambda2(static_cast<std::size_t>(sims));
            parallel_for(iterations.size(), [&](std::size_t s) {
                Rng rng = replica_rng(seed, s, (static_cast<std::uint64_t>(n) << 20) + ri);
                Replica rep = make_replica(n, r, carrier_hz, cfg.sigma_ppm, rng);
                lambda2[s] = second_eigenvalue(rep.w);
                const Trajectory t = run_static(rep.w, rep.f0, run_cfg);
                if (t.converged_at)
                    iterations[s] = *t.converged_at;
            });
            SweepPoint pt;
            pt.axis = {static_cast<double>(n), r};
            std::vector<double> done;
            for (int k : iterations) {
                if (k >= 0)
                    done.push_back(k);
                else
                    ++pt.censored;
            }
            pt.stats = Summary::of(done);
            pt.reference = Summary::of(lambda2).mean;
            sweep.points.push_back(pt);
        }
    }
    sort_points(sweep);
    return sweep;
}

Lambda2Comparison lambda2_product_comparison(int n, double r, int samples, std::uint64_t seed,
                                             const MutationProbabilities& p)
{
    if (samples < 2)
        throw Error(ErrorCode::InvalidArgument, "need at least two samples");
    Lambda2Comparison out;
    out.unchanged.resize(static_cast<std::size_t>(samples));
    out.changed.resize(static_cast<std::size_t>(samples));
    parallel_for(out.unchanged.size(), [&](std::size_t s) {
        Rng rng = replica_rng(seed, s);
        NetworkGraph g = generate_connected_graph(n, r, rng);
        MixingMatrix w = build_mixing_matrix(g);
        const TopologyUpdate update = mutate_topology(w, g, p, rng);
        const Eigen::MatrixXd& a = w.matrix();
        out.unchanged[s] = second_eigenvalue_magnitude(a * a);
        out.changed[s] = second_eigenvalue_magnitude(a * update.w.matrix());
    });
    out.unchanged_stats = Summary::of(out.unchanged);
    out.changed_stats = Summary::of(out.changed);
    std::size_t smaller = 0;
    for (std::size_t s = 0; s < out.changed.size(); ++s)
        if (out.changed[s] < out.unchanged[s])
            ++smaller;
    out.fraction_changed_smaller = static_cast<double>(smaller) / static_cast<double>(samples);
    return out;
}

SweepResult dynamic_convergence_sweep(int n, const std::vector<double>& rs,
                                      const std::vector<MutationProbabilities>& triples, int sims,
                                      const ConsensusConfig& cfg, double carrier_hz, std::uint64_t seed)
{
    require_positive(sims, "sims");
    cfg.validate();
    for (const MutationProbabilities& p : triples) {
        if (p.no_change < 0.0 || p.add < 0.0 || p.remove < 0.0 ||
            std::abs(p.no_change + p.add + p.remove - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidArgument, "mutation probabilities must be nonnegative and sum to 1");
    }
    SweepResult sweep;
    sweep.label = "dynamic_convergence_iterations";
    sweep.seed = seed;
    sweep.axis_names = {"r", "p_no_change", "p_add", "p_remove"};
    sweep.statistic = "converged_at";
    const ConsensusConfig run_cfg = quiet(cfg);
    for (std::size_t ri = 0; ri < rs.size(); ++ri) {
        const double r = rs[ri];
        std::vector<std::vector<int>> iterations(triples.size(), std::vector<int>(static_cast<std::size_t>(sims), -1));
        parallel_for(static_cast<std::size_t>(sims), [&](std::size_t s) {
            Rng rng = replica_rng(seed, s, ri);
            const Replica rep = make_replica(n, r, carrier_hz, cfg.sigma_ppm, rng);
            for (std::size_t ti = 0; ti < triples.size(); ++ti) {
                Rng mutation_rng = replica_rng(seed, s, ((ri + 1) << 16) + ti);
                const Trajectory t = run_dynamic(rep.w, rep.g, rep.f0, triples[ti], run_cfg, mutation_rng);
                if (t.converged_at)
                    iterations[ti][s] = *t.converged_at;
            }
        });
        for (std::size_t ti = 0; ti < triples.size(); ++ti) {
            SweepPoint pt;
            pt.axis = {r, triples[ti].no_change, triples[ti].add, triples[ti].remove};
            std::vector<double> done;
            for (int k : iterations[ti]) {
                if (k >= 0)
                    done.push_back(k);
                else
                    ++pt.censored;
            }
            pt.stats = Summary::of(done);
            pt.reference = kNaN;
            sweep.points.push_back(pt);
        }
    }
    sort_points(sweep);
    return sweep;
}

std::vector<DriftRun> drift_experiment(const std::vector<int>& ns, double r_min, const DriftConfig& drift,
                                       const ConsensusConfig& cfg, double carrier_hz, std::uint64_t seed)
{
    std::vector<DriftRun> runs(ns.size());
    parallel_for(ns.size(), [&](std::size_t a) {
        const int n = ns[a];
        const double r = feasible_ratio(n, r_min);
        Rng rng = replica_rng(seed, a);
        Replica rep = make_replica(n, r, carrier_hz, cfg.sigma_ppm, rng);
        runs[a] = {n, r, run_with_drift(rep.w, rep.f0, drift, cfg, rng)};
    });
    return runs;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep)
{
    const auto old_precision = os.precision(17);
    for (const std::string& name : sweep.axis_names)
        os << name << ',';
    os << "mean,stddev,count,censored";
    if (!sweep.reference_name.empty())
        os << ',' << sweep.reference_name;
    os << '\n';
    for (const SweepPoint& pt : sweep.points) {
        for (double a : pt.axis)
            os << a << ',';
        os << pt.stats.mean << ',' << pt.stats.stddev << ',' << pt.stats.count << ',' << pt.censored;
        if (!sweep.reference_name.empty())
            os << ',' << pt.reference;
        os << '\n';
    }
    os.precision(old_precision);
}

} // namespace syntonize
