#include "syntonize/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "syntonize/error.hpp"

namespace syntonize {

DirectionCosines DirectionCosines::from_angles(double theta_rad, double phi_rad)
{
    return {std::sin(theta_rad) * std::cos(phi_rad), std::sin(theta_rad) * std::sin(phi_rad)};
}

AngleGrid AngleGrid::principal_cut(double step_deg)
{
    if (!(step_deg > 0.0))
        throw Error(ErrorCode::InvalidArgument, "angle step must be positive");
    AngleGrid grid;
    grid.kind = Kind::PrincipalCut;
    const int count = static_cast<int>(std::floor(180.0 / step_deg + 1e-9));
    for (int k = 0; k <= count; ++k) {
        const double theta = -90.0 + k * step_deg;
        grid.angle_deg.push_back(theta);
        grid.directions.push_back(DirectionCosines::from_angles(deg_to_rad(theta), 0.0));
    }
    return grid;
}

AngleGrid AngleGrid::uv(int points)
{
    if (points < 2)
        throw Error(ErrorCode::InvalidArgument, "u-v grid needs at least 2 points per axis");
    AngleGrid grid;
    grid.kind = Kind::UV;
    grid.directions.reserve(static_cast<std::size_t>(points) * points);
    const double step = 2.0 / (points - 1);
    for (int iv = 0; iv < points; ++iv)
        for (int iu = 0; iu < points; ++iu)
            grid.directions.push_back({-1.0 + iu * step, -1.0 + iv * step});
    return grid;
}

double RadiationPattern::peak_db() const
{
    return power_db.empty() ? kPatternFloorDb : *std::max_element(power_db.begin(), power_db.end());
}

ArrayGeometry generate_sparse_array(int n, double extent, double grid_step, Rng& rng)
{
    if (!(grid_step > 0.0) || !(extent >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "grid step must be positive and extent nonnegative");
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "array needs at least one element");
    const long long per_axis = std::llround(std::floor(extent / grid_step + 1e-9)) + 1;
    const long long cells = per_axis * per_axis;
    if (n > cells)
        throw Error(ErrorCode::TooManyElements, std::to_string(n) + " elements do not fit on a " +
                                                    std::to_string(per_axis) + "x" + std::to_string(per_axis) +
                                                    " grid");

    // Partial Fisher-Yates over the flattened lattice.
    std::vector<long long> cell(static_cast<std::size_t>(cells));
    std::iota(cell.begin(), cell.end(), 0LL);
    ArrayGeometry geom;
    geom.grid_step = grid_step;
    geom.extent = extent;
    geom.positions.reserve(static_cast<std::size_t>(n));
    for (long long k = 0; k < n; ++k) {
        std::uniform_int_distribution<long long> pick(k, cells - 1);
        std::swap(cell[k], cell[pick(rng)]);
        const long long ix = cell[k] % per_axis;
        const long long iy = cell[k] / per_axis;
        geom.positions.push_back({static_cast<double>(ix) * grid_step, static_cast<double>(iy) * grid_step});
    }
    return geom;
}

ArrayGeometry generate_sparse_array(int n, double extent, double grid_step, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    ArrayGeometry geom = generate_sparse_array(n, extent, grid_step, rng);
    geom.seed = seed;
    return geom;
}

PhaseVector steering_phases(const ArrayGeometry& geom, DirectionCosines direction)
{
    PhaseVector phases;
    phases.reserve(geom.positions.size());
    for (const Position& p : geom.positions)
        phases.push_back(-2.0 * std::numbers::pi * (p.x * direction.u + p.y * direction.v));
    return phases;
}

namespace {

void check_lengths(const ArrayGeometry& geom, std::span<const double> steering, std::span<const double> errors,
                   std::span<const double> amplitudes)
{
    const std::size_t n = geom.positions.size();
    if (steering.size() != n || errors.size() != n || (!amplitudes.empty() && amplitudes.size() != n))
        throw Error(ErrorCode::DimensionMismatch, "phase/amplitude vectors must have one entry per element (" +
                                                      std::to_string(n) + ")");
}

std::complex<double> unchecked_array_factor(const ArrayGeometry& geom, std::span<const double> steering,
                                            std::span<const double> errors, DirectionCosines d,
                                            std::span<const double> amplitudes, double norm)
{
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t k = 0; k < geom.positions.size(); ++k) {
        const Position& p = geom.positions[k];
        const double phase = 2.0 * std::numbers::pi * (p.x * d.u + p.y * d.v) + steering[k] + errors[k];
        const double a = amplitudes.empty() ? 1.0 : amplitudes[k];
        sum += std::polar(a, phase);
    }
    return sum / norm;
}

double amplitude_norm(const ArrayGeometry& geom, std::span<const double> amplitudes)
{
    const double norm = amplitudes.empty() ? static_cast<double>(geom.positions.size())
                                           : std::accumulate(amplitudes.begin(), amplitudes.end(), 0.0);
    if (!(norm > 0.0))
        throw Error(ErrorCode::EmptyArray, "array has no radiating amplitude");
    return norm;
}

} // namespace

std::complex<double> array_factor(const ArrayGeometry& geom, std::span<const double> steering,
                                  std::span<const double> errors, DirectionCosines direction,
                                  std::span<const double> amplitudes)
{
    check_lengths(geom, steering, errors, amplitudes);
    return unchecked_array_factor(geom, steering, errors, direction, amplitudes, amplitude_norm(geom, amplitudes));
}

RadiationPattern radiation_pattern(const ArrayGeometry& geom, std::span<const double> steering,
                                   std::span<const double> errors, const AngleGrid& grid,
                                   std::span<const double> amplitudes)
{
    check_lengths(geom, steering, errors, amplitudes);
    const double norm = amplitude_norm(geom, amplitudes);
    RadiationPattern pattern;
    pattern.grid = grid;
    pattern.power_db.reserve(grid.directions.size());
    for (const DirectionCosines& d : grid.directions) {
        const double mag = std::abs(unchecked_array_factor(geom, steering, errors, d, amplitudes, norm));
        pattern.power_db.push_back(std::max(20.0 * std::log10(mag), kPatternFloorDb));
    }
    return pattern;
}

double coherent_gain(std::span<const double> phase_errors)
{
    if (phase_errors.empty())
        throw Error(ErrorCode::EmptyArray, "coherent gain of an empty array");
    double re = 0.0, im = 0.0;
    for (double phi : phase_errors) {
        re += std::cos(phi);
        im += std::sin(phi);
    }
    const double n = static_cast<double>(phase_errors.size());
    return (re * re + im * im) / (n * n);
}

double phase_std_deg(std::span<const double> phases)
{
    if (phases.empty())
        return 0.0;
    const double n = static_cast<double>(phases.size());
    const double mean = std::accumulate(phases.begin(), phases.end(), 0.0) / n;
    double ss = 0.0;
    for (double p : phases)
        ss += (p - mean) * (p - mean);
    return rad_to_deg(std::sqrt(ss / n));
}

void write_geometry_csv(std::ostream& os, const ArrayGeometry& geom)
{
    const auto old_precision = os.precision(17);
    os << "x_wavelengths,y_wavelengths\n";
    for (const Position& p : geom.positions)
        os << p.x << ',' << p.y << '\n';
    os.precision(old_precision);
}

ArrayGeometry read_geometry_csv(std::istream& is)
{
    ArrayGeometry geom;
    std::string line;
    if (!std::getline(is, line) || line.rfind("x_wavelengths", 0) != 0)
        throw Error(ErrorCode::Parse, "geometry CSV must start with header x_wavelengths,y_wavelengths");
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw Error(ErrorCode::Parse, "geometry row without comma: " + line);
        try {
            geom.positions.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw Error(ErrorCode::Parse, "bad geometry row: " + line);
        }
    }
    return geom;
}

void write_pattern_csv(std::ostream& os, const RadiationPattern& pattern)
{
    const auto old_precision = os.precision(10);
    const bool cut = pattern.grid.kind == AngleGrid::Kind::PrincipalCut;
    os << (cut ? "theta_deg,u,v,power_db\n" : "u,v,power_db\n");
    for (std::size_t k = 0; k < pattern.power_db.size(); ++k) {
        const DirectionCosines& d = pattern.grid.directions[k];
        if (cut)
            os << pattern.grid.angle_deg[k] << ',';
        os << d.u << ',' << d.v << ',' << pattern.power_db[k] << '\n';
    }
    os.precision(old_precision);
}

} // namespace syntonize
