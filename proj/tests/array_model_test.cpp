#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "syntonize/array_model.hpp"
#include "syntonize/error.hpp"

using namespace syntonize;
using std::numbers::pi;

namespace {

bool on_grid(double c, double step, double extent)
{
    const double q = c / step;
    return c >= 0.0 && c <= extent && q == std::round(q);
}

} // namespace

TEST_CASE("generate_sparse_array")
{
    SUBCASE("20 distinct grid points")
    {
        const ArrayGeometry g = generate_sparse_array(20, 10.0, 0.5, std::uint64_t{1});
        CHECK(g.size() == 20);
        std::set<std::pair<double, double>> seen;
        for (const Position& p : g.positions) {
            CHECK(on_grid(p.x, 0.5, 10.0));
            CHECK(on_grid(p.y, 0.5, 10.0));
            seen.emplace(p.x, p.y);
        }
        CHECK(seen.size() == 20);
    }
    SUBCASE("441 elements exhaust the grid")
    {
        const ArrayGeometry g = generate_sparse_array(441, 10.0, 0.5, std::uint64_t{2});
        std::set<std::pair<double, double>> seen;
        for (const Position& p : g.positions)
            seen.emplace(p.x, p.y);
        CHECK(seen.size() == 441);
        CHECK_THROWS_AS(generate_sparse_array(442, 10.0, 0.5, std::uint64_t{2}), Error);
    }
    SUBCASE("no collisions over 1000 seeds")
    {
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            const ArrayGeometry g = generate_sparse_array(60, 10.0, 0.5, seed);
            std::set<std::pair<double, double>> seen;
            for (const Position& p : g.positions)
                seen.emplace(p.x, p.y);
            REQUIRE(seen.size() == 60);
        }
    }
}

TEST_CASE("steering_phases")
{
    const ArrayGeometry g = generate_sparse_array(10, 10.0, 0.5, std::uint64_t{3});
    for (double s : steering_phases(g, {0.0, 0.0}))
        CHECK(s == 0.0);

    ArrayGeometry origin;
    origin.positions = {{0.0, 0.0}};
    CHECK(steering_phases(origin, {0.3, -0.7})[0] == 0.0);

    ArrayGeometry half;
    half.positions = {{0.5, 0.0}};
    CHECK(steering_phases(half, {1.0, 0.0})[0] == doctest::Approx(-pi));
}

TEST_CASE("radiation_pattern")
{
    const AngleGrid cut = AngleGrid::principal_cut(1.0);
    REQUIRE(cut.directions.size() == 181);

    SUBCASE("error-free broadside peak is 0 dB at broadside for every geometry")
    {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const ArrayGeometry g = generate_sparse_array(20, 10.0, 0.5, seed);
            const PhaseVector zero(20, 0.0);
            const RadiationPattern p = radiation_pattern(g, zero, zero, cut);
            CHECK(p.power_db[90] == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(p.peak_db() == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
    SUBCASE("two elements in antiphase cancel at broadside")
    {
        ArrayGeometry g;
        g.positions = {{0.0, 0.0}, {1.5, 2.0}};
        const PhaseVector steer(2, 0.0);
        const PhaseVector err = {0.0, pi};
        const RadiationPattern p = radiation_pattern(g, steer, err, cut);
        CHECK(p.power_db[90] < -100.0);
    }
    SUBCASE("broadside value agrees with coherent gain")
    {
        Rng rng = make_rng(4);
        std::normal_distribution<double> phase(0.0, deg_to_rad(18.0));
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const ArrayGeometry g = generate_sparse_array(20, 10.0, 0.5, seed);
            PhaseVector err(20);
            for (double& e : err)
                e = phase(rng);
            const std::complex<double> af = array_factor(g, PhaseVector(20, 0.0), err, {0.0, 0.0});
            CHECK(std::norm(af) == doctest::Approx(coherent_gain(err)).epsilon(1e-12));
        }
    }
    SUBCASE("18 degree errors degrade the N=20 mainbeam by a fraction of a dB")
    {
        const ArrayGeometry g = generate_sparse_array(20, 10.0, 0.5, std::uint64_t{5});
        Rng rng = make_rng(5);
        std::normal_distribution<double> phase(0.0, deg_to_rad(18.0));
        double loss = 0.0;
        for (int t = 0; t < 500; ++t) {
            PhaseVector err(20);
            for (double& e : err)
                e = phase(rng);
            loss -= radiation_pattern(g, PhaseVector(20, 0.0), err, cut).power_db[90];
        }
        loss /= 500;
        CHECK(loss > 0.2);
        CHECK(loss < 0.8);
    }
    SUBCASE("dimension mismatch")
    {
        const ArrayGeometry g = generate_sparse_array(5, 10.0, 0.5, std::uint64_t{6});
        CHECK_THROWS_AS(radiation_pattern(g, PhaseVector(4, 0.0), PhaseVector(5, 0.0), cut), Error);
    }
    SUBCASE("u-v raster")
    {
        const AngleGrid uv = AngleGrid::uv(11);
        CHECK(uv.directions.size() == 121);
        CHECK(uv.directions[0].u == -1.0);
        CHECK(uv.directions[0].v == -1.0);
        CHECK(uv.directions[1].u > uv.directions[0].u);
    }
}

TEST_CASE("phase_from_freq_error")
{
    CHECK(phase_from_freq_error(0.0, 3.0) == 0.0);
    CHECK(phase_from_freq_error(0.05, 1.0) == doctest::Approx(0.1 * pi));
    CHECK(rad_to_deg(phase_from_freq_error(0.05, 1.0)) == doctest::Approx(18.0));
    CHECK(phase_from_freq_error(1.0, 0.5) == doctest::Approx(pi));
    // Linearity holds exactly for dyadic inputs.
    CHECK(phase_from_freq_error(0.25 + 0.5, 1.0) == phase_from_freq_error(0.25, 1.0) + phase_from_freq_error(0.5, 1.0));
    Rng rng = make_rng(9);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const double a = u(rng), b = u(rng), t = std::abs(u(rng));
        CHECK(phase_from_freq_error(a + b, t) ==
              doctest::Approx(phase_from_freq_error(a, t) + phase_from_freq_error(b, t)).epsilon(1e-12));
    }
}

TEST_CASE("coherent_gain")
{
    CHECK(coherent_gain(std::vector<double>(7, 0.0)) == 1.0);
    CHECK(coherent_gain(std::vector<double>(5, 1.234)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(coherent_gain(std::vector<double>{0.0, pi}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(coherent_gain(std::vector<double>{0.0, pi / 2, pi, 3 * pi / 2}) < 1e-30);
    CHECK_THROWS_AS(coherent_gain(std::vector<double>{}), Error);

    Rng rng = make_rng(10);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> ph(1 + k % 30);
        for (double& p : ph)
            p = u(rng);
        const double g = coherent_gain(ph);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0 + 1e-15);
        const double c = u(rng);
        std::vector<double> shifted = ph;
        for (double& p : shifted)
            p += c;
        CHECK(std::abs(coherent_gain(shifted) - g) < 1e-12);
    }
}

TEST_CASE("phase_std_deg")
{
    CHECK(phase_std_deg(std::vector<double>(4, 0.3)) == doctest::Approx(0.0));
    CHECK(phase_std_deg(std::vector<double>{-deg_to_rad(10), deg_to_rad(10)}) == doctest::Approx(10.0));
}

TEST_CASE("geometry CSV round trip")
{
    const ArrayGeometry g = generate_sparse_array(20, 10.0, 0.5, std::uint64_t{11});
    std::stringstream ss;
    write_geometry_csv(ss, g);
    const ArrayGeometry back = read_geometry_csv(ss);
    CHECK(back.positions == g.positions);
}
