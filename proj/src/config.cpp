#include "syntonize/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "syntonize/error.hpp"

namespace syntonize {

namespace {

struct ExperimentName {
    Experiment experiment;
    std::string_view name;
};

constexpr ExperimentName kExperimentNames[] = {
    {Experiment::Static, "static"},      {Experiment::Dynamic, "dynamic"},     {Experiment::Drift, "drift"},
    {Experiment::ProbGain, "prob-gain"}, {Experiment::RmsSweep, "rms-sweep"},  {Experiment::IterSweep, "iter-sweep"},
    {Experiment::DynSweep, "dyn-sweep"}, {Experiment::Lambda2, "lambda2"},     {Experiment::Pattern, "pattern"},
    {Experiment::Layout, "layout"},
};

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    if (trim(s).empty())
        return parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text)
{
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorCode::Parse, std::string(key) + ": cannot parse \"" + std::string(text) + "\"");
    return value;
}

template <typename T>
std::string format_number(T value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& xs, char sep)
{
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k)
            out += sep;
        out += format_number(xs[k]);
    }
    return out;
}

using Json = nlohmann::json;

struct Field {
    std::function<void(ExperimentConfig&, std::string_view)> parse;
    std::function<std::string(const ExperimentConfig&)> format;
    std::function<Json(const ExperimentConfig&)> to_json;
    std::function<void(ExperimentConfig&, const Json&)> from_json;
};

template <typename T>
Field scalar(T ExperimentConfig::*member, std::string_view key)
{
    return {
        [member, key](ExperimentConfig& c, std::string_view v) { c.*member = parse_number<T>(key, v); },
        [member](const ExperimentConfig& c) { return format_number(c.*member); },
        [member](const ExperimentConfig& c) { return Json(c.*member); },
        [member](ExperimentConfig& c, const Json& j) { c.*member = j.get<T>(); },
    };
}

template <typename T>
Field list(std::vector<T> ExperimentConfig::*member, std::string_view key)
{
    return {
        [member, key](ExperimentConfig& c, std::string_view v) {
            std::vector<T> xs;
            for (std::string_view part : split(v, ','))
                xs.push_back(parse_number<T>(key, part));
            c.*member = std::move(xs);
        },
        [member](const ExperimentConfig& c) { return join(c.*member, ','); },
        [member](const ExperimentConfig& c) { return Json(c.*member); },
        [member](ExperimentConfig& c, const Json& j) { c.*member = j.get<std::vector<T>>(); },
    };
}

Field triples_field()
{
    return {
        [](ExperimentConfig& c, std::string_view v) {
            std::vector<MutationProbabilities> out;
            for (std::string_view group : split(v, ';')) {
                const auto parts = split(group, ',');
                if (parts.size() != 3)
                    throw Error(ErrorCode::Parse, "p_triples: each triple needs three comma-separated values");
                out.push_back({parse_number<double>("p_triples", parts[0]), parse_number<double>("p_triples", parts[1]),
                               parse_number<double>("p_triples", parts[2])});
            }
            c.p_triples = std::move(out);
        },
        [](const ExperimentConfig& c) {
            std::string out;
            for (std::size_t k = 0; k < c.p_triples.size(); ++k) {
                if (k)
                    out += ';';
                const auto& p = c.p_triples[k];
                out += format_number(p.no_change) + "," + format_number(p.add) + "," + format_number(p.remove);
            }
            return out;
        },
        [](const ExperimentConfig& c) {
            Json arr = Json::array();
            for (const auto& p : c.p_triples)
                arr.push_back({p.no_change, p.add, p.remove});
            return arr;
        },
        [](ExperimentConfig& c, const Json& j) {
            c.p_triples.clear();
            for (const Json& t : j) {
                if (!t.is_array() || t.size() != 3)
                    throw Error(ErrorCode::Parse, "p_triples: each triple needs three values");
                c.p_triples.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
            }
        },
    };
}

const std::map<std::string, Field, std::less<>>& fields()
{
    static const std::map<std::string, Field, std::less<>> table = [] {
        std::map<std::string, Field, std::less<>> t;
        t["experiment"] = {
            [](ExperimentConfig& c, std::string_view v) {
                const auto e = parse_experiment(trim(v));
                if (!e)
                    throw Error(ErrorCode::Parse, "experiment: unknown name \"" + std::string(v) + "\"");
                c.experiment = *e;
            },
            [](const ExperimentConfig& c) { return std::string(to_string(c.experiment)); },
            [](const ExperimentConfig& c) { return Json(std::string(to_string(c.experiment))); },
            [](ExperimentConfig& c, const Json& j) {
                const auto e = parse_experiment(j.get<std::string>());
                if (!e)
                    throw Error(ErrorCode::Parse, "experiment: unknown name " + j.dump());
                c.experiment = *e;
            },
        };
        t["out_dir"] = {
            [](ExperimentConfig& c, std::string_view v) { c.out_dir = std::string(trim(v)); },
            [](const ExperimentConfig& c) { return c.out_dir; },
            [](const ExperimentConfig& c) { return Json(c.out_dir); },
            [](ExperimentConfig& c, const Json& j) { c.out_dir = j.get<std::string>(); },
        };
        t["n"] = scalar(&ExperimentConfig::n, "n");
        t["r"] = scalar(&ExperimentConfig::r, "r");
        t["carrier_hz"] = scalar(&ExperimentConfig::carrier_hz, "carrier_hz");
        t["sigma_ppm"] = scalar(&ExperimentConfig::sigma_ppm, "sigma_ppm");
        t["epsilon_hz"] = scalar(&ExperimentConfig::epsilon_hz, "epsilon_hz");
        t["max_iterations"] = scalar(&ExperimentConfig::max_iterations, "max_iterations");
        t["ns"] = list(&ExperimentConfig::ns, "ns");
        t["rs"] = list(&ExperimentConfig::rs, "rs");
        t["p1"] = scalar(&ExperimentConfig::p1, "p1");
        t["p_triples"] = triples_field();
        t["adev"] = scalar(&ExperimentConfig::adev, "adev");
        t["interval_s"] = scalar(&ExperimentConfig::interval_s, "interval_s");
        t["drift_iterations"] = scalar(&ExperimentConfig::drift_iterations, "drift_iterations");
        t["phase_threshold_deg"] = scalar(&ExperimentConfig::phase_threshold_deg, "phase_threshold_deg");
        t["trials"] = scalar(&ExperimentConfig::trials, "trials");
        t["sims"] = scalar(&ExperimentConfig::sims, "sims");
        t["samples"] = scalar(&ExperimentConfig::samples, "samples");
        t["gain_threshold"] = scalar(&ExperimentConfig::gain_threshold, "gain_threshold");
        t["sigma_deg"] = scalar(&ExperimentConfig::sigma_deg, "sigma_deg");
        t["sigmas_deg"] = list(&ExperimentConfig::sigmas_deg, "sigmas_deg");
        t["extent"] = scalar(&ExperimentConfig::extent, "extent");
        t["grid_step"] = scalar(&ExperimentConfig::grid_step, "grid_step");
        t["angle_step_deg"] = scalar(&ExperimentConfig::angle_step_deg, "angle_step_deg");
        t["uv_points"] = scalar(&ExperimentConfig::uv_points, "uv_points");
        t["steer_u"] = scalar(&ExperimentConfig::steer_u, "steer_u");
        t["steer_v"] = scalar(&ExperimentConfig::steer_v, "steer_v");
        t["seed"] = scalar(&ExperimentConfig::seed, "seed");
        return t;
    }();
    return table;
}

const Field& field(std::string_view key)
{
    const auto& table = fields();
    const auto it = table.find(key);
    if (it == table.end())
        throw Error(ErrorCode::Parse, "unknown setting \"" + std::string(key) + "\"");
    return it->second;
}

bool uses_graph(Experiment e)
{
    return e == Experiment::Static || e == Experiment::Dynamic || e == Experiment::Lambda2;
}

} // namespace

std::string_view to_string(Experiment e)
{
    for (const auto& entry : kExperimentNames)
        if (entry.experiment == e)
            return entry.name;
    return "static";
}

std::optional<Experiment> parse_experiment(std::string_view name)
{
    for (const auto& entry : kExperimentNames)
        if (entry.name == name)
            return entry.experiment;
    return std::nullopt;
}

const std::vector<Experiment>& all_experiments()
{
    static const std::vector<Experiment> list = [] {
        std::vector<Experiment> out;
        for (const auto& entry : kExperimentNames)
            out.push_back(entry.experiment);
        return out;
    }();
    return list;
}

ExperimentConfig default_config(Experiment e)
{
    ExperimentConfig cfg;
    cfg.experiment = e;
    switch (e) {
    case Experiment::Static:
        break;
    case Experiment::Dynamic:
        cfg.r = 0.03;
        cfg.p1 = 0.0;
        break;
    case Experiment::Drift:
        cfg.r = 0.15;
        cfg.ns = {20, 60, 100};
        cfg.drift_iterations = 200;
        break;
    case Experiment::ProbGain:
        cfg.n = 1000;
        cfg.sigma_deg = 18.0;
        cfg.trials = 100000;
        break;
    case Experiment::RmsSweep:
        cfg.ns = {5, 20, 60, 100};
        cfg.sims = 1000;
        break;
    case Experiment::IterSweep:
        cfg.ns = {20, 60, 100};
        cfg.rs = {0.1, 0.3, 0.5, 0.7, 0.9};
        cfg.sims = 1000;
        break;
    case Experiment::DynSweep:
        cfg.rs = {0.03, 0.08, 0.13};
        cfg.p_triples = {{1.0, 0.0, 0.0}, {0.9, 0.05, 0.05}, {0.3, 0.35, 0.35}, {0.0, 0.5, 0.5}};
        cfg.sims = 100;
        break;
    case Experiment::Lambda2:
        cfg.r = 0.05;
        cfg.samples = 10000;
        break;
    case Experiment::Pattern:
        cfg.n = 20;
        cfg.sigma_deg = 18.0;
        break;
    case Experiment::Layout:
        cfg.n = 20;
        break;
    }
    return cfg;
}

std::vector<Violation> validate_config(const ExperimentConfig& cfg)
{
    std::vector<Violation> out;
    auto fail = [&](std::string field, std::string code, std::string message) {
        out.push_back({std::move(field), std::move(code), std::move(message)});
    };
    auto positive = [&](const char* name, double v) {
        if (!(v > 0.0))
            fail(name, "OutOfRange", std::string(name) + " must be positive");
    };
    auto ratio_ok = [&](const std::string& name, double r) {
        if (!(r > 0.0 && r <= 1.0)) {
            fail(name, "InvalidRatio", name + " = " + format_number(r) + " is outside (0, 1]");
            return false;
        }
        return true;
    };
    auto enough_edges = [&](const std::string& name, int n, double r) {
        if (n < 2 || !ratio_ok(name, r))
            return;
        const std::size_t m = target_edge_count(n, r);
        if (m < static_cast<std::size_t>(n - 1))
            fail(name, "InsufficientEdges",
                 "round(" + format_number(r) + " * " + std::to_string(n) + "*" + std::to_string(n - 1) + "/2) = " +
                     std::to_string(m) + " < n - 1 = " + std::to_string(n - 1));
    };

    const bool array_experiment = cfg.experiment == Experiment::Pattern || cfg.experiment == Experiment::Layout;
    if (array_experiment) {
        if (cfg.n < 1)
            fail("n", "OutOfRange", "n must be at least 1");
    } else if (cfg.n < 2) {
        fail("n", "OutOfRange", "n must be at least 2");
    }
    if (uses_graph(cfg.experiment))
        enough_edges("r", cfg.n, cfg.r);
    else
        ratio_ok("r", cfg.r);

    positive("carrier_hz", cfg.carrier_hz);
    positive("sigma_ppm", cfg.sigma_ppm);
    positive("epsilon_hz", cfg.epsilon_hz);
    if (cfg.max_iterations < 1)
        fail("max_iterations", "OutOfRange", "max_iterations must be at least 1");
    for (int n : cfg.ns)
        if (n < 2)
            fail("ns", "OutOfRange", "every entry of ns must be at least 2");
    for (double r : cfg.rs)
        ratio_ok("rs", r);
    if (cfg.experiment == Experiment::IterSweep) {
        if (cfg.ns.empty() || cfg.rs.empty())
            fail(cfg.ns.empty() ? "ns" : "rs", "OutOfRange", "iter-sweep needs non-empty ns and rs");
        for (int n : cfg.ns)
            for (double r : cfg.rs)
                enough_edges("rs", n, r);
    }
    if (cfg.experiment == Experiment::DynSweep) {
        if (cfg.rs.empty())
            fail("rs", "OutOfRange", "dyn-sweep needs a non-empty rs");
        for (double r : cfg.rs)
            enough_edges("rs", cfg.n, r);
        if (cfg.p_triples.empty())
            fail("p_triples", "OutOfRange", "dyn-sweep needs at least one probability triple");
    }
    if ((cfg.experiment == Experiment::RmsSweep || cfg.experiment == Experiment::Drift) && cfg.ns.empty())
        fail("ns", "OutOfRange", std::string(to_string(cfg.experiment)) + " needs a non-empty ns");

    if (!(cfg.p1 >= 0.0 && cfg.p1 <= 1.0))
        fail("p1", "OutOfRange", "p1 must lie in [0, 1]");
    for (const auto& p : cfg.p_triples) {
        if (p.no_change < 0.0 || p.add < 0.0 || p.remove < 0.0)
            fail("p_triples", "OutOfRange", "probabilities must be nonnegative");
        if (std::abs(p.no_change + p.add + p.remove - 1.0) > 1e-9)
            fail("p_triples", "ProbabilitySum",
                 "<" + format_number(p.no_change) + ", " + format_number(p.add) + ", " + format_number(p.remove) +
                     "> does not sum to 1");
    }

    if (!(cfg.adev >= 0.0))
        fail("adev", "OutOfRange", "adev must be nonnegative");
    positive("interval_s", cfg.interval_s);
    if (cfg.drift_iterations < 1)
        fail("drift_iterations", "OutOfRange", "drift_iterations must be at least 1");
    positive("phase_threshold_deg", cfg.phase_threshold_deg);

    if (cfg.trials < 1)
        fail("trials", "OutOfRange", "trials must be at least 1");
    if (cfg.sims < 1)
        fail("sims", "OutOfRange", "sims must be at least 1");
    if (cfg.samples < 2)
        fail("samples", "OutOfRange", "samples must be at least 2");
    if (!(cfg.gain_threshold >= 0.0 && cfg.gain_threshold <= 1.0))
        fail("gain_threshold", "OutOfRange", "gain_threshold must lie in [0, 1]");
    if (!(cfg.sigma_deg >= 0.0))
        fail("sigma_deg", "OutOfRange", "sigma_deg must be nonnegative");
    for (double s : cfg.sigmas_deg)
        if (!(s >= 0.0))
            fail("sigmas_deg", "OutOfRange", "every entry of sigmas_deg must be nonnegative");

    positive("grid_step", cfg.grid_step);
    if (!(cfg.extent >= 0.0))
        fail("extent", "OutOfRange", "extent must be nonnegative");
    if (array_experiment && cfg.grid_step > 0.0 && cfg.extent >= 0.0) {
        const double per_axis = std::floor(cfg.extent / cfg.grid_step + 1e-9) + 1.0;
        if (static_cast<double>(cfg.n) > per_axis * per_axis)
            fail("n", "TooManyElements",
                 std::to_string(cfg.n) + " elements exceed the " + format_number(per_axis * per_axis) + "-point grid");
    }
    positive("angle_step_deg", cfg.angle_step_deg);
    if (cfg.uv_points == 1 || cfg.uv_points < 0)
        fail("uv_points", "OutOfRange", "uv_points must be 0 (cut only) or at least 2");
    if (std::hypot(cfg.steer_u, cfg.steer_v) > 1.0)
        fail("steer_u", "OutOfRange", "steering direction cosines must satisfy u^2 + v^2 <= 1");
    if (cfg.out_dir.empty())
        fail("out_dir", "OutOfRange", "out_dir must not be empty");
    return out;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value)
{
    field(trim(key)).parse(cfg, value);
}

std::string format_setting(const ExperimentConfig& cfg, std::string_view key)
{
    return field(key).format(cfg);
}

const std::vector<std::string>& setting_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [name, f] : fields())
            out.push_back(name);
        return out;
    }();
    return keys;
}

void read_key_value(ExperimentConfig& cfg, std::istream& is)
{
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos)
            view = view.substr(0, hash);
        view = trim(view);
        if (view.empty())
            continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(cfg, view.substr(0, eq), view.substr(eq + 1));
    }
}

void write_key_value(std::ostream& os, const ExperimentConfig& cfg)
{
    for (const auto& [name, f] : fields())
        os << name << " = " << f.format(cfg) << '\n';
}

nlohmann::json to_json(const ExperimentConfig& cfg)
{
    Json j = Json::object();
    for (const auto& [name, f] : fields())
        j[name] = f.to_json(cfg);
    return j;
}

void apply_json(ExperimentConfig& cfg, const nlohmann::json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::Parse, "config JSON must be an object");
    for (const auto& [key, value] : j.items()) {
        try {
            field(key).from_json(cfg, value);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Parse, key + ": " + e.what());
        }
    }
}

} // namespace syntonize
