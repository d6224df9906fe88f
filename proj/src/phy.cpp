#include "ferlink/phy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ferlink/convcode.hpp"
#include "ferlink/rng.hpp"

namespace ferlink {

void PhyConfig::validate() const {
    if (frame_payload_bytes < 1) throw std::invalid_argument("frame_payload_bytes must be >= 1");
    if (frames_per_region < 1) throw std::invalid_argument("frames_per_region must be >= 1");
    if (!(frame_rate > 0.0)) throw std::invalid_argument("frame_rate must be > 0");
    if (fft_size != 64 || used_subcarriers != 52)
        throw std::invalid_argument("only the 64-FFT / 52-carrier 802.11p profile is supported");
    if (frame_duration() > 1.0 / frame_rate)
        throw std::invalid_argument("frame air-time exceeds the frame interval");
}

double PhyConfig::unit_gain_snr_db() const {
    // Es per used subcarrier vs. noise per FFT bin.
    return tx_power_dbm - noise_floor_dbm +
           10.0 * std::log10(static_cast<double>(fft_size) / used_subcarriers);
}

std::vector<int> interleaver_permutation(int coded_bits) {
    if (coded_bits % 16 != 0) throw std::invalid_argument("coded_bits must be divisible by 16");
    std::vector<int> perm(static_cast<std::size_t>(coded_bits));
    const int rows = coded_bits / 16;
    for (int k = 0; k < coded_bits; ++k)
        perm[k] = rows * (k % 16) + k / 16;  // s = 1 for QPSK: second permutation is identity
    return perm;
}

// ---------------------------------------------------------------------------
// ChannelSampler

namespace {
inline cplx unit_phasor(double arg) { return {std::cos(arg), std::sin(arg)}; }
}  // namespace

ChannelSampler::ChannelSampler(const StationaryProcess& process,
                               std::vector<double> frequency_offsets)
    : freqs_(std::move(frequency_offsets)), grouped_(!process.delay_drift) {
    process.validate();
    num_paths_ = process.paths.size();
    const double fc = process.spec.carrier_frequency;
    const std::size_t nf = freqs_.size();

    if (grouped_) {
        std::map<double, std::size_t> delay_group;
        for (const auto& p : process.paths) {
            auto [it, inserted] = delay_group.try_emplace(p.delay_at_origin, groups_.size());
            if (inserted) groups_.emplace_back();
            groups_[it->second].push_back(
                {p.amplitude, p.phase, 2.0 * M_PI * doppler_shift(p.relative_velocity, fc)});
        }
        group_response_.resize(groups_.size() * nf);
        std::size_t g = 0;
        for (const auto& [tau, idx] : delay_group) {
            (void)idx;
            for (std::size_t i = 0; i < nf; ++i)
                group_response_[g * nf + i] = unit_phasor(-2.0 * M_PI * (fc + freqs_[i]) * tau);
            ++g;
        }
        // delay_group iterates in delay order; groups_ was filled in first-seen
        // order, so rebuild groups_ in the same delay order.
        std::vector<std::vector<GroupPath>> ordered;
        ordered.reserve(groups_.size());
        for (const auto& [tau, idx] : delay_group) ordered.push_back(std::move(groups_[idx]));
        groups_ = std::move(ordered);
    } else {
        drift_.resize(num_paths_ * nf);
        for (std::size_t l = 0; l < num_paths_; ++l) {
            const auto& p = process.paths[l];
            for (std::size_t i = 0; i < nf; ++i) {
                const double w = 2.0 * M_PI * (fc + freqs_[i]);
                drift_[l * nf + i] = {p.amplitude, p.phase - w * p.delay_at_origin,
                                      w * p.relative_velocity / kSpeedOfLight};
            }
        }
    }
}

void ChannelSampler::sample(double t_start, double dt, int count, std::vector<cplx>& out) const {
    const std::size_t nf = freqs_.size();
    out.assign(static_cast<std::size_t>(count) * nf, cplx(0.0, 0.0));

    if (grouped_) {
        std::vector<cplx> gsum(static_cast<std::size_t>(count));
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            std::fill(gsum.begin(), gsum.end(), cplx(0.0, 0.0));
            for (const auto& p : groups_[g]) {
                cplx c = p.amplitude * unit_phasor(p.phase + p.omega * t_start);
                const cplx rot = unit_phasor(p.omega * dt);
                for (int s = 0; s < count; ++s) {
                    gsum[s] += c;
                    c *= rot;
                }
            }
            const cplx* resp = &group_response_[g * nf];
            for (int s = 0; s < count; ++s) {
                const cplx gs = gsum[s];
                cplx* row = &out[static_cast<std::size_t>(s) * nf];
                for (std::size_t i = 0; i < nf; ++i) row[i] += gs * resp[i];
            }
        }
    } else {
        for (std::size_t l = 0; l < num_paths_; ++l) {
            for (std::size_t i = 0; i < nf; ++i) {
                const auto& p = drift_[l * nf + i];
                cplx c = p.amplitude * unit_phasor(p.phase0 + p.omega * t_start);
                const cplx rot = unit_phasor(p.omega * dt);
                for (int s = 0; s < count; ++s) {
                    out[static_cast<std::size_t>(s) * nf + i] += c;
                    c *= rot;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// FrameSimulator

namespace {

std::vector<int> data_subcarrier_indices() {
    std::vector<int> bins;
    for (int k = -26; k <= 26; ++k) {
        if (k == 0 || k == 7 || k == -7 || k == 21 || k == -21) continue;
        bins.push_back(k);
    }
    return bins;  // 48 entries
}

std::vector<double> data_frequency_offsets(const PhyConfig& cfg) {
    std::vector<double> f;
    for (const int k : data_subcarrier_indices())
        f.push_back(k * cfg.subcarrier_spacing_phy);
    return f;
}

}  // namespace

FrameSimulator::FrameSimulator(const StationaryProcess& process, const PhyConfig& cfg)
    : cfg_(cfg),
      sampler_(process, data_frequency_offsets(cfg)),
      interleave_(interleaver_permutation(cfg.coded_bits_per_symbol())) {
    cfg_.validate();
    const double cp = cfg_.cp_fraction / cfg_.subcarrier_spacing_phy;
    for (const auto& p : process.paths)
        if (p.delay_at_origin > cp) cp_exceeded_ = true;
    symbol_energy_ = std::pow(10.0, (cfg_.tx_power_dbm - 30.0) / 10.0) / cfg_.used_subcarriers;
    noise_var_ = std::pow(10.0, (cfg_.noise_floor_dbm - 30.0) / 10.0) / cfg_.fft_size;
}

bool FrameSimulator::simulate_frame(double t_start, std::uint64_t seed) const {
    if (t_start < 0.0) throw std::invalid_argument("frame start time must be >= 0");
    Rng rng(seed);

    const int n_payload_bits = 8 * cfg_.frame_payload_bytes;
    const int n_sym = cfg_.num_data_symbols();
    const int n_dbps = cfg_.data_bits_per_symbol();
    const int n_cbps = cfg_.coded_bits_per_symbol();

    // Seeded payload randomization stands in for the scrambler.
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(n_payload_bits));
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);

    // SERVICE(16 zeros) + payload + tail(6 zeros) + zero pad
    std::vector<std::uint8_t> data_bits(static_cast<std::size_t>(n_sym) * n_dbps, 0);
    std::copy(payload.begin(), payload.end(), data_bits.begin() + 16);

    const auto coded = conv_encode(data_bits);

    // Interleave and QPSK-map per OFDM symbol.
    const double amp = std::sqrt(symbol_energy_ / 2.0);
    std::vector<cplx> tx(static_cast<std::size_t>(n_sym) * (n_cbps / 2));
    std::vector<std::uint8_t> sym_bits(static_cast<std::size_t>(n_cbps));
    for (int s = 0; s < n_sym; ++s) {
        for (int k = 0; k < n_cbps; ++k)
            sym_bits[interleave_[k]] = coded[static_cast<std::size_t>(s) * n_cbps + k];
        for (int q = 0; q < n_cbps / 2; ++q) {
            const double re = sym_bits[2 * q] ? amp : -amp;
            const double im = sym_bits[2 * q + 1] ? amp : -amp;
            tx[static_cast<std::size_t>(s) * (n_cbps / 2) + q] = {re, im};
        }
    }

    // Channel at the two long-preamble symbols and at data symbol midpoints.
    const double t_sym = cfg_.symbol_duration();
    const double t_fft = 1.0 / cfg_.subcarrier_spacing_phy;
    const double cp = cfg_.cp_fraction * t_fft;
    const double t_ltf0 = t_start + 2.0 * t_sym + 2.0 * cp + 0.5 * t_fft;
    const double t_data0 = t_start + cfg_.preamble_duration() + cp + 0.5 * t_fft;

    const int nf = sampler_.num_frequencies();
    std::vector<cplx> h_ltf;
    std::vector<cplx> h_data;
    sampler_.sample(t_ltf0, t_fft, 2, h_ltf);
    sampler_.sample(t_data0, t_sym, n_sym, h_data);

    const double sigma = cfg_.noise_enabled ? std::sqrt(noise_var_ / 2.0) : 0.0;
    const auto noise = [&]() -> cplx {
        if (!cfg_.noise_enabled) return {0.0, 0.0};
        const double a = rng.normal();
        const double b = rng.normal();
        return {sigma * a, sigma * b};
    };

    // LS channel estimate: known +sqrt(Es) reference on every data bin,
    // averaged over the two long-preamble repetitions.
    const double ref = std::sqrt(symbol_energy_);
    std::vector<cplx> h_est(static_cast<std::size_t>(nf));
    for (int i = 0; i < nf; ++i) {
        const cplx r0 = h_ltf[i] * ref + noise();
        const cplx r1 = h_ltf[static_cast<std::size_t>(nf) + i] * ref + noise();
        h_est[i] = (r0 + r1) / (2.0 * ref);
    }

    // Receive, equalize, soft-demap, deinterleave.
    std::vector<double> llrs(static_cast<std::size_t>(n_sym) * n_cbps);
    std::vector<double> sym_llr(static_cast<std::size_t>(n_cbps));
    for (int s = 0; s < n_sym; ++s) {
        for (int q = 0; q < nf; ++q) {
            const cplx r =
                h_data[static_cast<std::size_t>(s) * nf + q] * tx[static_cast<std::size_t>(s) * nf + q] +
                noise();
            const cplx y = std::conj(h_est[q]) * r;
            sym_llr[2 * q] = -y.real();  // positive LLR favors bit 0
            sym_llr[2 * q + 1] = -y.imag();
        }
        for (int k = 0; k < n_cbps; ++k)
            llrs[static_cast<std::size_t>(s) * n_cbps + k] = sym_llr[interleave_[k]];
    }

    const auto decoded = viterbi_decode(llrs);
    for (int i = 0; i < n_payload_bits; ++i)
        if (decoded[static_cast<std::size_t>(16 + i)] != payload[i]) return false;
    return true;
}

bool simulate_frame(const StationaryProcess& process, double t_start, const PhyConfig& cfg,
                    std::uint64_t seed) {
    return FrameSimulator(process, cfg).simulate_frame(t_start, seed);
}

FerMeasurement measure_fer(const StationaryProcess& process, const PhyConfig& cfg,
                           std::uint64_t seed, std::string region_id) {
    cfg.validate();
    const double horizon =
        (cfg.frames_per_region - 1) / cfg.frame_rate + cfg.frame_duration();
    if (horizon > max_extension_time(process))
        throw std::domain_error("extension horizon violation: path delay would cross zero");

    FrameSimulator sim(process, cfg);
    FerMeasurement result;
    result.region_id = std::move(region_id);
    result.frames_sent = cfg.frames_per_region;
    for (int f = 0; f < cfg.frames_per_region; ++f) {
        const bool ok =
            sim.simulate_frame(f / cfg.frame_rate, mix_seed(seed, static_cast<std::uint64_t>(f)));
        if (!ok) ++result.frames_failed;
    }
    result.fer = static_cast<double>(result.frames_failed) / result.frames_sent;
    return result;
}

double uncoded_qpsk_ber(double ebn0_db, std::int64_t num_bits, std::uint64_t seed) {
    Rng rng(mix_seed(seed));
    const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
    const double n0 = 0.5 / ebn0;  // Es = 1, two bits per symbol
    const double sigma = std::sqrt(n0 / 2.0);
    const double amp = std::sqrt(0.5);

    std::int64_t errors = 0;
    std::int64_t bits = 0;
    while (bits < num_bits) {
        const std::uint64_t word = rng.next_u64();
        const int b0 = word & 1;
        const int b1 = (word >> 1) & 1;
        const double re = (b0 ? amp : -amp) + sigma * rng.normal();
        const double im = (b1 ? amp : -amp) + sigma * rng.normal();
        errors += (re > 0.0 ? 1 : 0) != b0;
        errors += (im > 0.0 ? 1 : 0) != b1;
        bits += 2;
    }
    return static_cast<double>(errors) / static_cast<double>(bits);
}

double qpsk_ber_theory(double ebn0_db) {
    return 0.5 * std::erfc(std::sqrt(std::pow(10.0, ebn0_db / 10.0)));
}

}  // namespace ferlink
