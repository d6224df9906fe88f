#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace ferlink {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact

using cplx = std::complex<double>;

enum class PathKind : std::uint8_t {
    Los = 0,
    StaticDiscrete = 1,
    MobileDiscrete = 2,
    Diffuse = 3,
};

// One propagation path: amplitude, starting phase, delay at the region
// origin and the constant relative velocity that drives its Doppler shift
// and linear delay drift.
struct PropagationPath {
    double amplitude = 0.0;          // linear gain, >= 0
    double phase = 0.0;              // radians in [0, 2*pi)
    double delay_at_origin = 0.0;    // seconds, >= 0
    double relative_velocity = 0.0;  // m/s, positive = approaching
    PathKind kind = PathKind::Diffuse;

    void validate(double v_max = 22.0) const;
};

// Time/frequency sampling grid of one stationarity region.
struct GridSpec {
    double carrier_frequency = 5.9e9;    // Hz
    double subcarrier_spacing = 250e3;   // Hz
    int num_subcarriers = 601;           // N
    double snapshot_period = 500e-6;     // s
    int num_snapshots = 200;             // M = T_stat / T_s
    double stationarity_time = 0.1;      // s

    // Frequency bin index k for storage column `col` in [0, N). Symmetric
    // set {-(N-1)/2, ..., +(N-1)/2} for odd N, {-N/2, ..., N/2-1} for even.
    int bin_k(int col) const {
        return col - (num_subcarriers % 2 ? (num_subcarriers - 1) / 2
                                          : num_subcarriers / 2);
    }
    // Frequency offset from the carrier for storage column `col`.
    double bin_offset(int col) const { return bin_k(col) * subcarrier_spacing; }

    std::vector<double> bin_offsets() const;

    void validate() const;
};

// Complex time-variant frequency response, row-major num_snapshots rows by
// num_subcarriers columns.
struct CtfGrid {
    GridSpec spec;
    int num_rows = 0;
    std::vector<cplx> values;

    cplx& at(int m, int col) { return values[static_cast<std::size_t>(m) * spec.num_subcarriers + col]; }
    const cplx& at(int m, int col) const { return values[static_cast<std::size_t>(m) * spec.num_subcarriers + col]; }
};

// A stationarity region with frozen path parameters; may be evaluated for
// any snapshot index, including beyond num_snapshots - 1 (stationarity
// extension).
struct StationaryProcess {
    std::vector<PropagationPath> paths;
    GridSpec spec;
    // When false, path delays stay at delay_at_origin and the velocity
    // contributes only the Doppler phase rotation exp(+j*2*pi*f_l*t).
    // Used by the tapped-delay-line model, where tap delays are fixed.
    bool delay_drift = true;

    void validate() const;
};

// Constant Doppler shift f = f_C * v / c0.
double doppler_shift(double relative_velocity, double carrier_frequency);

// Linear delay model tau[m] = tau[0] - (v/c0) * m * T_s. Throws if the
// result would be negative (over-long extension).
double delay_at(const PropagationPath& path, std::int64_t m, const GridSpec& spec);
double delay_at_time(const PropagationPath& path, double t);

// Latest time (seconds) up to which every path delay of the process stays
// nonnegative; +infinity when no delay drifts toward zero.
double max_extension_time(const StationaryProcess& process);

// Frequency response at continuous time t for a list of frequency offsets
// from the carrier.
std::vector<cplx> evaluate_ctf_at(const StationaryProcess& process, double t,
                                  std::span<const double> frequency_offsets);

// Frequency response grid over snapshot indices [m_start, m_end) and the
// full subcarrier set of the grid spec.
CtfGrid evaluate_ctf(const StationaryProcess& process, std::int64_t m_start,
                     std::int64_t m_end);

}  // namespace ferlink
