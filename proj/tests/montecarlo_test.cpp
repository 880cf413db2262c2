#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

#include "syntonize/array_model.hpp"
#include "syntonize/montecarlo.hpp"

using namespace syntonize;
using std::numbers::pi;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// n = 2: G = cos^2(d/2) with d ~ N(0, 2 sigma^2), so G >= x iff d lies within
// 2 acos(sqrt(x)) of a multiple of 2 pi.
double two_element_probability(double sigma_rad, double x)
{
    const double s = std::sqrt(2.0) * sigma_rad;
    const double half = 2.0 * std::acos(std::sqrt(x));
    double p = 0.0;
    for (int m = -5; m <= 5; ++m)
        p += normal_cdf((2 * pi * m + half) / s) - normal_cdf((2 * pi * m - half) / s);
    return p;
}

} // namespace

TEST_CASE("Summary")
{
    const Summary s = Summary::of({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == 2.5);
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.count == 4);
}

TEST_CASE("parallel_for visits every replica once")
{
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
    for (auto& h : hits)
        CHECK(h.load() == 1);
}

TEST_CASE("prob_gain_exceeds")
{
    CHECK(prob_gain_exceeds(50, 0.0, 0.9, 1000, 1) == 1.0);

    SUBCASE("two elements match the closed form")
    {
        const double p = prob_gain_exceeds(2, deg_to_rad(18.0), 0.9, 100000, 3);
        const double exact = two_element_probability(deg_to_rad(18.0), 0.9);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        CHECK(std::abs(p - exact) < 4 * std::sqrt(exact * (1 - exact) / 100000));
    }
    SUBCASE("nonincreasing in sigma")
    {
        double prev = 1.0;
        for (double deg : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0}) {
            const double p = prob_gain_exceeds(20, deg_to_rad(deg), 0.9, 20000, 4);
            CHECK(p <= prev);
            prev = p;
        }
    }
    SUBCASE("independent seeds agree within three binomial standard errors")
    {
        const double a = prob_gain_exceeds(10, deg_to_rad(18.0), 0.9, 100000, 5);
        const double b = prob_gain_exceeds(10, deg_to_rad(18.0), 0.9, 100000, 6);
        const double p = 0.5 * (a + b);
        CHECK(std::abs(a - b) < 3 * std::sqrt(2 * p * (1 - p) / 100000));
    }
    SUBCASE("deterministic")
    {
        CHECK(prob_gain_exceeds(30, 0.3, 0.9, 5000, 8) == prob_gain_exceeds(30, 0.3, 0.9, 5000, 8));
    }
}

TEST_CASE("prob_gain_sweep grid")
{
    const SweepResult s = prob_gain_sweep({2, 20}, {0.0, 10.0, 30.0}, 0.9, 2000, 1);
    REQUIRE(s.points.size() == 6);
    CHECK(s.axis_names == std::vector<std::string>{"n", "sigma_deg"});
    for (std::size_t i = 1; i < s.points.size(); ++i)
        CHECK(s.points[i - 1].axis < s.points[i].axis);
    CHECK(s.points[0].stats.mean == 1.0);
}

TEST_CASE("rms_error_sweep")
{
    ConsensusConfig cfg;
    cfg.record_states = false;
    const SweepResult a = rms_error_sweep({5, 20}, 0.1, 200, cfg, 1e9, 3);
    const SweepResult b = rms_error_sweep({5, 20}, 0.1, 200, cfg, 1e9, 3);
    REQUIRE(a.points.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.points[i].stats.mean == b.points[i].stats.mean);
        CHECK(a.points[i].reference == doctest::Approx(100.0 / std::sqrt(a.points[i].axis[0])));
        // 200 sims: RMS of a normal sample is within ~15% comfortably.
        CHECK(std::abs(a.points[i].stats.mean / a.points[i].reference - 1.0) < 0.15);
    }
}

TEST_CASE("convergence_iterations_sweep")
{
    ConsensusConfig cfg;
    cfg.record_states = false;
    SUBCASE("complete pair converges in exactly one step")
    {
        const SweepResult s = convergence_iterations_sweep({2}, {1.0}, 20, cfg, 1e9, 1);
        REQUIRE(s.points.size() == 1);
        CHECK(s.points[0].stats.mean == 1.0);
        CHECK(s.points[0].stats.stddev == 0.0);
        CHECK(s.points[0].censored == 0);
    }
    SUBCASE("denser networks converge faster")
    {
        const SweepResult s = convergence_iterations_sweep({60}, {0.1, 0.5, 0.9}, 30, cfg, 1e9, 2);
        REQUIRE(s.points.size() == 3);
        CHECK(s.points[0].stats.mean > s.points[1].stats.mean);
        CHECK(s.points[1].stats.mean > s.points[2].stats.mean);
    }
    SUBCASE("capped runs are counted as censored")
    {
        ConsensusConfig tight = cfg;
        tight.max_iterations = 2;
        const SweepResult s = convergence_iterations_sweep({40}, {0.1}, 5, tight, 1e9, 3);
        CHECK(s.points[0].censored == 5);
        CHECK(s.points[0].stats.count == 0);
    }
}

TEST_CASE("lambda2_product_comparison")
{
    SUBCASE("suppressed mutation gives identical sets")
    {
        const auto c = lambda2_product_comparison(30, 0.2, 20, 4, MutationProbabilities::from_no_change(1.0));
        CHECK(c.changed == c.unchanged);
        CHECK(c.fraction_changed_smaller == 0.0);
    }
    SUBCASE("lambda2 of a symmetric square is the square of lambda2")
    {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const MixingMatrix w = build_mixing_matrix(generate_connected_graph(40, 0.1, seed));
            const double l2 = second_eigenvalue(w);
            CHECK(second_eigenvalue_magnitude(w.matrix() * w.matrix()) == doctest::Approx(l2 * l2).epsilon(1e-10));
        }
    }
    SUBCASE("sample sets have the requested size and are reproducible")
    {
        const auto a = lambda2_product_comparison(30, 0.2, 25, 5);
        const auto b = lambda2_product_comparison(30, 0.2, 25, 5);
        CHECK(a.unchanged.size() == 25);
        CHECK(a.changed.size() == 25);
        CHECK(a.changed == b.changed);
        CHECK(a.unchanged == b.unchanged);
    }
}

TEST_CASE("dynamic_convergence_sweep")
{
    ConsensusConfig cfg;
    cfg.record_states = false;
    const std::vector<MutationProbabilities> triples = {{1, 0, 0}, {0, 0.5, 0.5}};
    const SweepResult s = dynamic_convergence_sweep(30, {0.1}, triples, 10, cfg, 1e9, 6);
    REQUIRE(s.points.size() == 2);
    CHECK(s.axis_names == std::vector<std::string>{"r", "p_no_change", "p_add", "p_remove"});
    for (const SweepPoint& p : s.points)
        CHECK(p.stats.count + p.censored == 10);

    // The static baseline reproduces convergence_iterations_sweep's statistic
    // shape and the whole sweep is reproducible.
    const SweepResult again = dynamic_convergence_sweep(30, {0.1}, triples, 10, cfg, 1e9, 6);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(s.points[i].stats.mean == again.points[i].stats.mean);
}

TEST_CASE("drift_experiment")
{
    DriftConfig drift;
    drift.iterations = 30;
    ConsensusConfig cfg;
    cfg.record_states = false;
    const auto runs = drift_experiment({5, 20}, 0.15, drift, cfg, 1e9, 7);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].r == doctest::Approx(feasible_ratio(5, 0.15)));
    CHECK(runs[1].r == 0.15);
    for (const DriftRun& run : runs) {
        CHECK(run.trajectory.iterations() == 30);
        CHECK(run.trajectory.phase_std_deg.size() == 31);
    }
}

TEST_CASE("sweep CSV header")
{
    const SweepResult s = prob_gain_sweep({2}, {10.0}, 0.9, 100, 1);
    std::ostringstream os;
    write_sweep_csv(os, s);
    CHECK(os.str().rfind("n,sigma_deg,mean,stddev,count,censored", 0) == 0);
}
