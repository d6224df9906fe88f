#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ferlink/channel.hpp"

namespace ferlink {

// IEEE 802.11p (10 MHz) link parameters, QPSK rate 1/2 only.
struct PhyConfig {
    int fft_size = 64;
    int used_subcarriers = 52;           // 48 data + 4 pilot
    double subcarrier_spacing_phy = 156.25e3;  // Hz
    double cp_fraction = 0.25;           // symbol duration 8 us at 10 MHz
    int frame_payload_bytes = 100;
    int frames_per_region = 20000;       // F
    double frame_rate = 2200.0;          // frames/s
    double tx_power_dbm = 10.0;
    double noise_floor_dbm = -98.0;      // over 10 MHz
    bool noise_enabled = true;

    void validate() const;

    double symbol_duration() const {
        return (1.0 + cp_fraction) * fft_size / (fft_size * subcarrier_spacing_phy);
    }
    // preamble = STF 16 us + LTF 16 us + SIGNAL 8 us at 10 MHz
    double preamble_duration() const { return 5.0 * symbol_duration(); }
    int data_bits_per_symbol() const { return 48; }   // QPSK rate 1/2
    int coded_bits_per_symbol() const { return 96; }
    // SERVICE(16) + payload + tail(6), padded to a whole number of symbols
    int num_data_symbols() const {
        const int bits = 16 + 8 * frame_payload_bytes + 6;
        return (bits + data_bits_per_symbol() - 1) / data_bits_per_symbol();
    }
    double frame_duration() const {
        return preamble_duration() + num_data_symbols() * symbol_duration();
    }
    // Received SNR (dB) on a unit-gain subcarrier, from the link budget.
    double unit_gain_snr_db() const;
};

struct FerMeasurement {
    std::int64_t frames_sent = 0;
    std::int64_t frames_failed = 0;
    double fer = 0.0;
    std::string region_id;
};

// 802.11a/p block interleaver permutation for one OFDM symbol of
// `coded_bits` coded bits (QPSK: second permutation is the identity).
// Returns write positions: interleaved[perm[k]] = coded[k].
std::vector<int> interleaver_permutation(int coded_bits);

// Fast equivalent of evaluate_ctf_at on a fixed frequency set, for
// regularly spaced sample times. Uses per-path phase recurrences; paths
// sharing a frozen delay are evaluated jointly. Matches evaluate_ctf_at
// to ~1e-10 relative.
class ChannelSampler {
  public:
    ChannelSampler(const StationaryProcess& process, std::vector<double> frequency_offsets);

    // H at times t_start + i*dt for i in [0, count); row-major count x F.
    void sample(double t_start, double dt, int count, std::vector<cplx>& out) const;

    int num_frequencies() const { return static_cast<int>(freqs_.size()); }

  private:
    std::vector<double> freqs_;
    bool grouped_;  // delay-frozen process grouped by unique delay
    // grouped mode
    struct GroupPath {
        double amplitude;
        double phase;
        double omega;  // rad/s
    };
    std::vector<std::vector<GroupPath>> groups_;
    std::vector<cplx> group_response_;  // num_groups x F, e^{-j2pi(fc+f)tau}
    // per-path mode (delay drift)
    struct DriftPath {
        double amplitude;
        double phase0;  // phase - 2pi(fc+f)tau0, per frequency
        double omega;   // 2pi(fc+f)v/c0, per frequency
    };
    std::vector<DriftPath> drift_;  // L x F, row-major
    std::size_t num_paths_ = 0;
};

// One 802.11p frame through the frozen-statistics channel plus AWGN:
// seeded payload -> conv encode -> interleave -> QPSK -> per-subcarrier
// channel -> noise -> LS preamble estimate -> equalize -> soft demap ->
// Viterbi -> bit-exact payload compare.
class FrameSimulator {
  public:
    FrameSimulator(const StationaryProcess& process, const PhyConfig& cfg);

    bool simulate_frame(double t_start, std::uint64_t seed) const;

    // True when the region's maximum path delay exceeds the cyclic prefix
    // (ISI neglected but flagged).
    bool cp_exceeded() const { return cp_exceeded_; }

  private:
    PhyConfig cfg_;
    ChannelSampler sampler_;
    std::vector<int> data_bins_;  // indices into the sampler frequency set
    std::vector<int> interleave_;
    bool cp_exceeded_ = false;
    double symbol_energy_ = 0.0;  // per used subcarrier
    double noise_var_ = 0.0;      // per subcarrier bin
};

bool simulate_frame(const StationaryProcess& process, double t_start, const PhyConfig& cfg,
                    std::uint64_t seed);

// Send F frames at spacing 1/frame_rate from t = 0, count decode failures.
FerMeasurement measure_fer(const StationaryProcess& process, const PhyConfig& cfg,
                           std::uint64_t seed, std::string region_id = {});

// Calibration harness: uncoded QPSK over AWGN, hard decisions, using the
// PHY's mapper/demapper. Returns the measured BER.
double uncoded_qpsk_ber(double ebn0_db, std::int64_t num_bits, std::uint64_t seed);

// Analytic reference Q(sqrt(2 Eb/N0)).
double qpsk_ber_theory(double ebn0_db);

}  // namespace ferlink
