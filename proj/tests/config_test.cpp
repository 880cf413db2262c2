#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "syntonize/config.hpp"
#include "syntonize/error.hpp"
#include "syntonize/experiment.hpp"

using namespace syntonize;
namespace fs = std::filesystem;

namespace {

bool has_code(const std::vector<Violation>& v, std::string_view field, std::string_view code)
{
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.field == field && x.code == code; });
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("syntonize_test_" + name))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::set<fs::path> listing(const fs::path& root)
{
    std::set<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        out.insert(fs::relative(e.path(), root));
    return out;
}

ExperimentOutcome run_quiet(const ExperimentConfig& cfg)
{
    std::ostringstream out, err;
    return run_experiment(cfg, out, err);
}

} // namespace

TEST_CASE("experiment names round trip")
{
    for (Experiment e : all_experiments())
        CHECK(parse_experiment(to_string(e)) == e);
    CHECK_FALSE(parse_experiment("fig99").has_value());
}

TEST_CASE("validate_config")
{
    for (Experiment e : all_experiments())
        CHECK(validate_config(default_config(e)).empty());

    ExperimentConfig sparse = default_config(Experiment::Static);
    sparse.n = 20;
    sparse.r = 0.001;
    CHECK(has_code(validate_config(sparse), "r", "InsufficientEdges"));

    ExperimentConfig triples = default_config(Experiment::DynSweep);
    triples.p_triples = {{0.5, 0.5, 0.5}};
    CHECK(has_code(validate_config(triples), "p_triples", "ProbabilitySum"));

    ExperimentConfig ratio = default_config(Experiment::Static);
    ratio.r = 1.5;
    CHECK(has_code(validate_config(ratio), "r", "InvalidRatio"));

    ExperimentConfig crowded = default_config(Experiment::Layout);
    crowded.n = 500;
    CHECK(has_code(validate_config(crowded), "n", "TooManyElements"));
}

TEST_CASE("settings")
{
    ExperimentConfig cfg;
    apply_setting(cfg, "ns", "20,60,100");
    CHECK(cfg.ns == std::vector<int>{20, 60, 100});
    apply_setting(cfg, "p_triples", "0.9,0.05,0.05;0,0.5,0.5");
    REQUIRE(cfg.p_triples.size() == 2);
    CHECK(cfg.p_triples[1].add == 0.5);
    apply_setting(cfg, "r", "0.25");
    CHECK(format_setting(cfg, "r") == "0.25");
    CHECK_THROWS_AS(apply_setting(cfg, "nonsense", "1"), Error);
    CHECK_THROWS_AS(apply_setting(cfg, "n", "twelve"), Error);
}

TEST_CASE("config serialization is lossless")
{
    for (Experiment e : all_experiments()) {
        ExperimentConfig cfg = default_config(e);
        cfg.r = 0.1 + 1.0 / 3.0;
        cfg.seed = 0xFFFFFFFFFFFFFFFFull;
        cfg.sigma_deg = 17.123456789012345;

        std::stringstream kv;
        write_key_value(kv, cfg);
        ExperimentConfig from_kv;
        read_key_value(from_kv, kv);
        CHECK(from_kv == cfg);

        ExperimentConfig from_json;
        apply_json(from_json, nlohmann::json::parse(to_json(cfg).dump()));
        CHECK(from_json == cfg);
    }
}

TEST_CASE("key = value format tolerates comments and blank lines")
{
    std::istringstream is("# comment\n\n  n = 42 # trailing\nr=0.5\n");
    ExperimentConfig cfg;
    read_key_value(cfg, is);
    CHECK(cfg.n == 42);
    CHECK(cfg.r == 0.5);
}

TEST_CASE("run_experiment writes deterministic, regenerable results inside out_dir")
{
    TempDir tmp("determinism");
    ExperimentConfig cfg = default_config(Experiment::Static);
    cfg.n = 100;
    cfg.r = 0.1;
    cfg.seed = 7;

    cfg.out_dir = (tmp.path / "a").string();
    const ExperimentOutcome a = run_quiet(cfg);
    REQUIRE(a.exit_code == 0);
    cfg.out_dir = (tmp.path / "b").string();
    const ExperimentOutcome b = run_quiet(cfg);
    REQUIRE(b.exit_code == 0);

    CHECK(listing(tmp.path / "a") == listing(tmp.path / "b"));
    for (const fs::path& rel : listing(tmp.path / "a")) {
        if (rel.extension() == ".json")
            continue; // sidecar records its own out_dir
        CHECK(slurp(tmp.path / "a" / rel) == slurp(tmp.path / "b" / rel));
    }
    CHECK(listing(tmp.path).size() == 2 + listing(tmp.path / "a").size() * 2);

    // Regenerate from the sidecar alone into a fresh directory.
    ExperimentConfig again;
    load_config_file(again, tmp.path / "a" / "static.json");
    again.out_dir = (tmp.path / "c").string();
    REQUIRE(run_quiet(again).exit_code == 0);
    for (const fs::path& rel : listing(tmp.path / "a"))
        if (rel.extension() != ".json")
            CHECK(slurp(tmp.path / "a" / rel) == slurp(tmp.path / "c" / rel));
}

TEST_CASE("every experiment runs with small settings and reproduces from its sidecar")
{
    TempDir tmp("all");
    for (Experiment e : all_experiments()) {
        ExperimentConfig cfg = default_config(e);
        cfg.n = std::min(cfg.n, 30);
        cfg.r = feasible_ratio(cfg.n, cfg.r);
        cfg.trials = 500;
        cfg.sims = 4;
        cfg.samples = 4;
        cfg.drift_iterations = 20;
        if (!cfg.ns.empty())
            cfg.ns = {5, 20};
        if (!cfg.sigmas_deg.empty())
            cfg.sigmas_deg = {10.0};
        if (e == Experiment::DynSweep || e == Experiment::Dynamic)
            cfg.r = 0.1;
        if (e == Experiment::DynSweep || e == Experiment::IterSweep)
            cfg.rs = {0.5};
        const std::string name(to_string(e));
        cfg.out_dir = (tmp.path / name).string();
        INFO(name);
        REQUIRE(validate_config(cfg).empty());
        const ExperimentOutcome first = run_quiet(cfg);
        REQUIRE(first.exit_code == 0);
        CHECK_FALSE(first.summary.empty());
        REQUIRE(fs::exists(tmp.path / name / (name + ".json")));

        ExperimentConfig again;
        load_config_file(again, tmp.path / name / (name + ".json"));
        CHECK(again == cfg);
        again.out_dir = (tmp.path / (name + "_rerun")).string();
        REQUIRE(run_quiet(again).exit_code == 0);
        for (const fs::path& rel : listing(tmp.path / name))
            if (rel.extension() != ".json")
                CHECK(slurp(tmp.path / name / rel) == slurp(tmp.path / (name + "_rerun") / rel));
    }
}

TEST_CASE("layout output lies on the grid")
{
    TempDir tmp("layout");
    ExperimentConfig cfg = default_config(Experiment::Layout);
    cfg.n = 20;
    cfg.seed = 3;
    cfg.out_dir = tmp.path.string();
    REQUIRE(run_quiet(cfg).exit_code == 0);
    std::ifstream is(tmp.path / "layout.csv");
    std::string line;
    std::getline(is, line);
    CHECK(line == "x_wavelengths,y_wavelengths");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        const auto comma = line.find(',');
        for (double c : {std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))}) {
            CHECK(c >= 0.0);
            CHECK(c <= 10.0);
            CHECK(2 * c == std::round(2 * c));
        }
    }
    CHECK(rows == 20);
}

TEST_CASE("invalid configs exit nonzero and write nothing")
{
    TempDir tmp("invalid");
    ExperimentConfig cfg = default_config(Experiment::Static);
    cfg.n = 20;
    cfg.r = 0.001;
    cfg.out_dir = (tmp.path / "out").string();
    std::ostringstream out, err;
    CHECK(run_experiment(cfg, out, err).exit_code == 2);
    CHECK(err.str().find("InsufficientEdges") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("load_config_file handles key = value files")
{
    TempDir tmp("load");
    {
        std::ofstream os(tmp.path / "run.cfg");
        os << "n = 33\nsigma_deg = 12.5\n";
    }
    ExperimentConfig cfg = default_config(Experiment::ProbGain);
    load_config_file(cfg, tmp.path / "run.cfg");
    CHECK(cfg.n == 33);
    CHECK(cfg.sigma_deg == 12.5);
    CHECK(cfg.trials == default_config(Experiment::ProbGain).trials);
    CHECK_THROWS_AS(load_config_file(cfg, tmp.path / "missing.cfg"), Error);
}
