#include "syntonize/experiment.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "syntonize/array_model.hpp"
#include "syntonize/consensus.hpp"
#include "syntonize/error.hpp"
#include "syntonize/montecarlo.hpp"
#include "syntonize/topology.hpp"

namespace fs = std::filesystem;

namespace syntonize {

namespace {

class OutputDir {
public:
    explicit OutputDir(const fs::path& dir) : dir_(dir)
    {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec)
            throw Error(ErrorCode::Io, "cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    // name is always a bare file name chosen by this module.
    void write(const std::string& name, const std::function<void(std::ostream&)>& body)
    {
        const fs::path path = dir_ / name;
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
        body(os);
        os.flush();
        if (!os)
            throw Error(ErrorCode::Io, "write to " + path.string() + " failed");
        written_.push_back(path);
    }

    const std::vector<fs::path>& written() const { return written_; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

ConsensusConfig consensus_config(const ExperimentConfig& cfg)
{
    ConsensusConfig c;
    c.epsilon_hz = cfg.epsilon_hz;
    c.max_iterations = cfg.max_iterations;
    c.sigma_ppm = cfg.sigma_ppm;
    return c;
}

DriftConfig drift_config(const ExperimentConfig& cfg)
{
    DriftConfig d;
    d.adev = cfg.adev;
    d.interval_s = cfg.interval_s;
    d.iterations = cfg.drift_iterations;
    d.phase_threshold_deg = cfg.phase_threshold_deg;
    return d;
}

std::string iterations_text(const std::optional<int>& k)
{
    return k ? std::to_string(*k) : std::string("none");
}

struct Run {
    std::string summary;
    nlohmann::json details = nlohmann::json::object();
};

Run run_static_experiment(const ExperimentConfig& cfg, OutputDir& out)
{
    Rng rng = make_rng(cfg.seed);
    const NetworkGraph g = generate_connected_graph(cfg.n, cfg.r, rng);
    const MixingMatrix w = build_mixing_matrix(g);
    const FrequencyState f0 = init_frequencies(cfg.n, cfg.carrier_hz, cfg.sigma_ppm, rng);
    const Trajectory t = run_static(w, f0, consensus_config(cfg));
    const double lambda2 = second_eigenvalue(w);
    const double error_ppm = t.final_state().mean_offset_hz() / cfg.carrier_hz * 1e6;

    out.write("static_trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, t); });
    out.write("static_graph.txt", [&](std::ostream& os) { write_edge_list(os, g); });
    out.write("static_mixing.csv", [&](std::ostream& os) { write_mixing_csv(os, w); });

    std::ostringstream s;
    s << std::setprecision(6) << "static: n=" << cfg.n << " edges=" << g.edge_count() << " lambda2=" << lambda2
      << " converged_at=" << iterations_text(t.converged_at) << " consensus_error_ppm=" << error_ppm;
    Run run{s.str()};
    run.details = {{"edges", g.edge_count()},
                   {"lambda2", lambda2},
                   {"converged_at", t.converged_at ? nlohmann::json(*t.converged_at) : nlohmann::json()},
                   {"consensus_error_ppm", error_ppm}};
    return run;
}

Run run_dynamic_experiment(const ExperimentConfig& cfg, OutputDir& out)
{
    Rng rng = make_rng(cfg.seed);
    NetworkGraph g = generate_connected_graph(cfg.n, cfg.r, rng);
    MixingMatrix w = build_mixing_matrix(g);
    const FrequencyState f0 = init_frequencies(cfg.n, cfg.carrier_hz, cfg.sigma_ppm, rng);
    out.write("dynamic_initial_graph.txt", [&](std::ostream& os) { write_edge_list(os, g); });
    const Trajectory t = run_dynamic(std::move(w), std::move(g), f0, cfg.p1, consensus_config(cfg), rng);
    std::size_t adds = 0, removes = 0;
    for (MutationKind k : t.mutations) {
        adds += k == MutationKind::Add;
        removes += k == MutationKind::Remove;
    }
    out.write("dynamic_trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, t); });

    std::ostringstream s;
    s << "dynamic: n=" << cfg.n << " p1=" << cfg.p1 << " converged_at=" << iterations_text(t.converged_at)
      << " adds=" << adds << " removes=" << removes;
    Run run{s.str()};
    run.details = {{"converged_at", t.converged_at ? nlohmann::json(*t.converged_at) : nlohmann::json()},
                   {"adds", adds},
                   {"removes", removes}};
    return run;
}

Run run_drift_experiment(const ExperimentConfig& cfg, OutputDir& out)
{
    const auto runs =
        drift_experiment(cfg.ns, cfg.r, drift_config(cfg), consensus_config(cfg), cfg.carrier_hz, cfg.seed);
    std::ostringstream s;
    s << std::setprecision(4) << "drift:";
    Run run;
    run.details["runs"] = nlohmann::json::array();
    for (const DriftRun& d : runs) {
        const Trajectory& t = d.trajectory;
        const std::string tag = "n" + std::to_string(d.n);
        out.write("drift_" + tag + ".csv", [&](std::ostream& os) { write_trajectory_csv(os, t); });
        out.write("drift_phases_" + tag + ".csv", [&](std::ostream& os) {
            os << std::setprecision(10) << "iteration";
            for (int i = 0; i < d.n; ++i)
                os << ",phase_deg_" << i;
            os << '\n';
            for (std::size_t k = 0; k < t.phases_rad.size(); ++k) {
                os << k;
                for (double p : t.phases_rad[k])
                    os << ',' << rad_to_deg(p);
                os << '\n';
            }
        });
        s << " n=" << d.n << " (r=" << d.r << ") phase<" << cfg.phase_threshold_deg
          << "deg_at=" << iterations_text(t.phase_converged_at) << " final_std_deg=" << t.phase_std_deg.back()
          << " final_gain=" << t.coherent_gain.back() << ';';
        run.details["runs"].push_back(
            {{"n", d.n},
             {"r", d.r},
             {"phase_converged_at", t.phase_converged_at ? nlohmann::json(*t.phase_converged_at) : nlohmann::json()},
             {"final_phase_std_deg", t.phase_std_deg.back()},
             {"final_coherent_gain", t.coherent_gain.back()}});
    }
    run.summary = s.str();
    return run;
}

Run write_sweep(const SweepResult& sweep, const std::string& file, OutputDir& out)
{
    out.write(file, [&](std::ostream& os) { write_sweep_csv(os, sweep); });
    std::ostringstream s;
    s << std::setprecision(5) << sweep.label << ':';
    Run run;
    run.details["points"] = nlohmann::json::array();
    for (const SweepPoint& pt : sweep.points) {
        s << " [";
        nlohmann::json point;
        for (std::size_t a = 0; a < pt.axis.size(); ++a) {
            s << (a ? " " : "") << sweep.axis_names[a] << '=' << pt.axis[a];
            point[sweep.axis_names[a]] = pt.axis[a];
        }
        s << "] " << sweep.statistic << '=' << pt.stats.mean;
        if (pt.censored)
            s << " censored=" << pt.censored;
        point["mean"] = pt.stats.mean;
        point["censored"] = pt.censored;
        run.details["points"].push_back(point);
    }
    run.summary = s.str();
    return run;
}

Run run_lambda2_experiment(const ExperimentConfig& cfg, OutputDir& out)
{
    const Lambda2Comparison cmp =
        lambda2_product_comparison(cfg.n, cfg.r, cfg.samples, cfg.seed, MutationProbabilities::from_no_change(cfg.p1));
    out.write("lambda2_samples.csv", [&](std::ostream& os) {
        os << std::setprecision(17) << "sample,lambda2_unchanged,lambda2_changed\n";
        for (std::size_t s = 0; s < cmp.unchanged.size(); ++s)
            os << s << ',' << cmp.unchanged[s] << ',' << cmp.changed[s] << '\n';
    });
    std::ostringstream s;
    s << std::setprecision(5) << "lambda2: mean(W*W)=" << cmp.unchanged_stats.mean
      << " mean(W*W1)=" << cmp.changed_stats.mean << " P[changed<unchanged]=" << cmp.fraction_changed_smaller;
    Run run{s.str()};
    run.details = {{"mean_unchanged", cmp.unchanged_stats.mean},
                   {"std_unchanged", cmp.unchanged_stats.stddev},
                   {"mean_changed", cmp.changed_stats.mean},
                   {"std_changed", cmp.changed_stats.stddev},
                   {"fraction_changed_smaller", cmp.fraction_changed_smaller}};
    return run;
}

Run run_pattern_experiment(const ExperimentConfig& cfg, OutputDir& out)
{
    const ArrayGeometry geom = generate_sparse_array(cfg.n, cfg.extent, cfg.grid_step, cfg.seed);
    const DirectionCosines steer{cfg.steer_u, cfg.steer_v};
    const PhaseVector steering = steering_phases(geom, steer);
    Rng rng = replica_rng(cfg.seed, 0, 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    PhaseVector errors(geom.positions.size(), 0.0);
    if (cfg.sigma_deg > 0.0)
        for (double& e : errors)
            e = deg_to_rad(cfg.sigma_deg) * normal(rng);
    const PhaseVector none(geom.positions.size(), 0.0);
    const AngleGrid grid = cfg.uv_points > 0 ? AngleGrid::uv(cfg.uv_points) : AngleGrid::principal_cut(cfg.angle_step_deg);
    const RadiationPattern ideal = radiation_pattern(geom, steering, none, grid);
    const RadiationPattern degraded = radiation_pattern(geom, steering, errors, grid);
    const double loss_db = -20.0 * std::log10(std::abs(array_factor(geom, steering, errors, steer)));

    out.write("pattern_geometry.csv", [&](std::ostream& os) { write_geometry_csv(os, geom); });
    out.write("pattern_ideal.csv", [&](std::ostream& os) { write_pattern_csv(os, ideal); });
    out.write("pattern_errors.csv", [&](std::ostream& os) { write_pattern_csv(os, degraded); });

    std::ostringstream s;
    s << std::setprecision(5) << "pattern: n=" << cfg.n << " sigma_deg=" << cfg.sigma_deg
      << " mainbeam_loss_db=" << loss_db << " coherent_gain=" << coherent_gain(errors);
    Run run{s.str()};
    run.details = {{"mainbeam_loss_db", loss_db}, {"coherent_gain", coherent_gain(errors)}};
    return run;
}

Run run_layout_experiment(const ExperimentConfig& cfg, OutputDir& out)
{
    const ArrayGeometry geom = generate_sparse_array(cfg.n, cfg.extent, cfg.grid_step, cfg.seed);
    out.write("layout.csv", [&](std::ostream& os) { write_geometry_csv(os, geom); });
    Run run{"layout: n=" + std::to_string(geom.size()) + " elements"};
    run.details = {{"elements", geom.size()}};
    return run;
}

Run dispatch(const ExperimentConfig& cfg, OutputDir& out)
{
    const ConsensusConfig cc = consensus_config(cfg);
    switch (cfg.experiment) {
    case Experiment::Static:
        return run_static_experiment(cfg, out);
    case Experiment::Dynamic:
        return run_dynamic_experiment(cfg, out);
    case Experiment::Drift:
        return run_drift_experiment(cfg, out);
    case Experiment::ProbGain: {
        const std::vector<int> ns = cfg.ns.empty() ? std::vector<int>{cfg.n} : cfg.ns;
        const std::vector<double> sigmas = cfg.sigmas_deg.empty() ? std::vector<double>{cfg.sigma_deg} : cfg.sigmas_deg;
        return write_sweep(prob_gain_sweep(ns, sigmas, cfg.gain_threshold, cfg.trials, cfg.seed), "prob_gain.csv", out);
    }
    case Experiment::RmsSweep:
        return write_sweep(rms_error_sweep(cfg.ns, cfg.r, cfg.sims, cc, cfg.carrier_hz, cfg.seed), "rms_sweep.csv",
                           out);
    case Experiment::IterSweep:
        return write_sweep(convergence_iterations_sweep(cfg.ns, cfg.rs, cfg.sims, cc, cfg.carrier_hz, cfg.seed),
                           "iter_sweep.csv", out);
    case Experiment::DynSweep:
        return write_sweep(
            dynamic_convergence_sweep(cfg.n, cfg.rs, cfg.p_triples, cfg.sims, cc, cfg.carrier_hz, cfg.seed),
            "dyn_sweep.csv", out);
    case Experiment::Lambda2:
        return run_lambda2_experiment(cfg, out);
    case Experiment::Pattern:
        return run_pattern_experiment(cfg, out);
    case Experiment::Layout:
        return run_layout_experiment(cfg, out);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown experiment");
}

} // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err)
{
    ExperimentOutcome outcome;
    const auto violations = validate_config(cfg);
    if (!violations.empty()) {
        for (const Violation& v : violations)
            err << "config error: " << v.field << ": " << v.code << ": " << v.message << '\n';
        outcome.exit_code = 2;
        return outcome;
    }
    try {
        OutputDir dir(cfg.out_dir);
        Run run = dispatch(cfg, dir);
        const std::string name(to_string(cfg.experiment));
        nlohmann::json sidecar;
        sidecar["config"] = to_json(cfg);
        sidecar["summary"] = run.summary;
        sidecar["results"] = std::move(run.details);
        sidecar["outputs"] = nlohmann::json::array();
        for (const fs::path& p : dir.written())
            sidecar["outputs"].push_back(p.filename().string());
        dir.write(name + ".json", [&](std::ostream& os) { os << sidecar.dump(2) << '\n'; });
        outcome.summary = std::move(run.summary);
        outcome.outputs = dir.written();
        out << outcome.summary << '\n';
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        outcome.exit_code = 3;
    }
    return outcome;
}

void load_config_file(ExperimentConfig& cfg, const fs::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorCode::Io, "cannot read config file " + path.string());
    if (path.extension() == ".json") {
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
        }
        apply_json(cfg, j.contains("config") ? j.at("config") : j);
        return;
    }
    read_key_value(cfg, is);
}

} // namespace syntonize
