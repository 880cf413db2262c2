#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <vector>

#include "syntonize/rng.hpp"

namespace syntonize {

/// Element position in wavelengths; the array lies in the z = 0 plane.
struct Position {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Position&) const = default;
};

struct ArrayGeometry {
    std::vector<Position> positions;
    double grid_step = 0.5;
    double extent = 10.0;
    std::uint64_t seed = 0;

    int size() const noexcept { return static_cast<int>(positions.size()); }
};

/// Per-element phases in radians.
using PhaseVector = std::vector<double>;

/// Direction cosines (u, v) = (sin t cos p, sin t sin p); broadside is (0, 0).
struct DirectionCosines {
    double u = 0.0;
    double v = 0.0;

    static DirectionCosines from_angles(double theta_rad, double phi_rad);
};

struct AngleGrid {
    enum class Kind { PrincipalCut, UV };

    Kind kind = Kind::PrincipalCut;
    std::vector<DirectionCosines> directions;
    /// Polar angle per direction for principal cuts (degrees, ascending);
    /// empty for u-v grids.
    std::vector<double> angle_deg;

    /// theta in [-90, 90] degrees at the given step in the phi = 0 plane.
    static AngleGrid principal_cut(double step_deg = 1.0);
    /// points x points raster over [-1, 1]^2, row-major with v outer.
    static AngleGrid uv(int points = 201);
};

struct RadiationPattern {
    AngleGrid grid;
    /// 20 log10(|AF| / sum of amplitudes); 0 dB is the coherent maximum.
    std::vector<double> power_db;

    double peak_db() const;
};

/// Values below this floor are clamped (exact cancellation has no finite dB).
inline constexpr double kPatternFloorDb = -300.0;

/// n distinct points drawn without replacement from the
/// (extent/grid_step + 1)^2 lattice. Throws TooManyElements.
ArrayGeometry generate_sparse_array(int n, double extent, double grid_step, Rng& rng);
ArrayGeometry generate_sparse_array(int n, double extent, double grid_step, std::uint64_t seed);

/// -2 pi (x u + y v) per element.
PhaseVector steering_phases(const ArrayGeometry& geom, DirectionCosines direction);

/// Normalized array factor sum_n a_n exp(j[2 pi (x u + y v) + steer_n + err_n]) / sum_n a_n.
/// Empty amplitudes mean unit amplitude on every element.
std::complex<double> array_factor(const ArrayGeometry& geom, std::span<const double> steering,
                                  std::span<const double> errors, DirectionCosines direction,
                                  std::span<const double> amplitudes = {});

/// Throws DimensionMismatch when a phase or amplitude vector does not match
/// the geometry.
RadiationPattern radiation_pattern(const ArrayGeometry& geom, std::span<const double> steering,
                                   std::span<const double> errors, const AngleGrid& grid,
                                   std::span<const double> amplitudes = {});

/// Phase accumulated over an interval by a constant frequency error.
constexpr double phase_from_freq_error(double delta_f_hz, double interval_s)
{
    return 2.0 * std::numbers::pi * delta_f_hz * interval_s;
}

/// |sum exp(j phi_n)|^2 / N^2. Throws EmptyArray for N = 0.
double coherent_gain(std::span<const double> phase_errors);

/// Population standard deviation, in degrees, of phases given in radians.
double phase_std_deg(std::span<const double> phases);

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// CSV: header "x_wavelengths,y_wavelengths", one element per row.
void write_geometry_csv(std::ostream& os, const ArrayGeometry& geom);
ArrayGeometry read_geometry_csv(std::istream& is);

// CSV: "theta_deg,u,v,power_db" for cuts, "u,v,power_db" for u-v grids.
void write_pattern_csv(std::ostream& os, const RadiationPattern& pattern);

} // namespace syntonize
