#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ferlink/channel.hpp"

namespace ferlink {

// Tapped-delay-line generator configuration: exponential power delay
// profile, sum-of-sinusoids Rayleigh taps, optional Rician first tap.
struct TdlConfig {
    int num_taps = 8;
    double tap_spacing = 100e-9;         // s
    double pdp_decay = 0.7;              // nepers per tap
    int paths_per_tap = 40;
    std::optional<double> rician_k_db;   // nullopt = NLOS (all Rayleigh)
    double max_doppler = 500.0;          // Hz
    double total_power = 1.0;            // linear, sum of tap powers

    void validate() const;
    // Normalized tap powers p_i = total_power * e^{-decay*i} / sum.
    std::vector<double> tap_powers() const;
};

// Sampling ranges for per-region TDL configs. All ranges inclusive.
struct TdlRanges {
    double snr_db_min = 0.0;             // sets total_power via reference gain
    double snr_db_max = 30.0;
    double rician_k_db_min = 0.0;
    double rician_k_db_max = 15.0;
    double los_probability = 0.5;        // chance a region gets a Rician tap 0
    double max_doppler_min = 50.0;       // Hz, log-uniform
    double max_doppler_max = 1000.0;
    double pdp_decay_min = 0.3;
    double pdp_decay_max = 1.2;
    double tap_spacing = 100e-9;
    int num_taps = 8;
    int paths_per_tap = 40;
    // Mean received SNR (dB) a unit-power channel would see under the PHY
    // link budget; total_power = 10^((snr_db - unit_gain_snr_db)/10) then
    // makes the drawn snr_db the mean received SNR.
    double unit_gain_snr_db = 108.9;

    void validate() const;
};

// Draw one stationarity region's fading process. Each tap i carries
// paths_per_tap paths at delay i*tap_spacing with amplitude
// sqrt(p_i / paths_per_tap), uniform phase and uniform Doppler in
// [-max_doppler, +max_doppler]. A Rician config adds a specular path on
// tap 0 with power p_0*K/(K+1), the scattered paths sharing p_0/(K+1).
StationaryProcess sample_tdl_process(const TdlConfig& config, const GridSpec& spec,
                                     std::uint64_t seed);

// Draw `count` per-region configs from the ranges, deterministically.
std::vector<TdlConfig> sample_dataset_configs(const TdlRanges& ranges, int count,
                                              std::uint64_t seed);

}  // namespace ferlink
