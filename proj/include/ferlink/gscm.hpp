#pragma once

#include <cstdint>
#include <vector>

#include "ferlink/channel.hpp"

namespace ferlink {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a);

// Straight street canyon: walls at y = 0 and y = canyon_width, x in
// [0, canyon_length]. The Tx drives a piecewise-linear trajectory at
// constant speed; S fixed roadside Rx positions.
struct CanyonScenario {
    double canyon_length = 200.0;
    double canyon_width = 20.0;
    std::vector<Vec2> tx_trajectory = {{10.0, 7.0}, {190.0, 7.0}};
    double tx_speed = 10.0;               // m/s, <= 11
    std::vector<Vec2> rx_positions;       // empty: auto-place at rx_spacing
    double rx_spacing = 10.0;             // m, used when rx_positions empty
    int num_rx = 5;                       // S, used when rx_positions empty
    double diffuse_density = 0.15;        // scatterers per meter of wall
    int num_static_discrete = 12;
    int num_mobile_discrete = 6;
    double mobile_speed_min = 0.0;        // m/s
    double mobile_speed_max = 5.5;
    double los_blockage_probability = 0.3;
    // Gain draws, dB relative to a unit reflector (log-uniform).
    double diffuse_gain_db_min = -40.0;
    double diffuse_gain_db_max = -20.0;
    double discrete_gain_db_min = -20.0;
    double discrete_gain_db_max = -5.0;

    void validate() const;
    double trajectory_length() const;
    Vec2 position_at(double distance) const;
    Vec2 direction_at(double distance) const;  // unit tangent
    std::vector<Vec2> effective_rx_positions() const;
};

struct Scatterer {
    Vec2 position;
    Vec2 velocity;   // zero for static and diffuse
    double gain = 1.0;
    PathKind kind = PathKind::Diffuse;
};

// Provenance-carrying output of one generated stationarity region.
struct GscmRegion {
    StationaryProcess process;
    int run_index = 0;
    int rx_index = 0;
    int waypoint_index = 0;
    std::uint64_t seed = 0;
};

// Deterministic scatterer placement: floor(density * wall length) diffuse
// scatterers per wall, static discrete uniform in the canyon, mobile
// discrete on the lane lines with speeds from the configured range.
std::vector<Scatterer> place_scatterers(const CanyonScenario& scenario, std::uint64_t seed);

// Single-bounce path parameters for one (Tx position, Rx position) pair:
// LOS (unless blocked this region, Bernoulli from the seed) plus one path
// per scatterer. Amplitudes follow free-space loss over the total path
// length times the scatterer gain; phases uniform from the seed.
std::vector<PropagationPath> compute_paths(const CanyonScenario& scenario,
                                           const std::vector<Scatterer>& scatterers,
                                           Vec2 tx_position, Vec2 tx_velocity,
                                           Vec2 rx_position, const GridSpec& spec,
                                           std::uint64_t seed);

// One simulation run: a single scatterer realization, Tx waypoints spaced
// tx_speed * T_stat along the trajectory, path parameters frozen at each
// (Rx, waypoint). Returns S * regions_per_run regions.
std::vector<GscmRegion> generate_v2i_run(const CanyonScenario& scenario, const GridSpec& spec,
                                         int regions_per_run, std::uint64_t seed,
                                         int run_index = 0);

}  // namespace ferlink
