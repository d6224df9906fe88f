#include "ferlink/tdl.hpp"

#include <cmath>
#include <stdexcept>

#include "ferlink/rng.hpp"

namespace ferlink {

void TdlConfig::validate() const {
    if (num_taps < 1) throw std::invalid_argument("num_taps must be >= 1");
    if (paths_per_tap < 2) throw std::invalid_argument("paths_per_tap must be >= 2");
    if (!(tap_spacing > 0.0)) throw std::invalid_argument("tap_spacing must be > 0");
    if (!(total_power > 0.0)) throw std::invalid_argument("total_power must be > 0");
    if (!(max_doppler >= 0.0)) throw std::invalid_argument("max_doppler must be >= 0");
    if (rician_k_db && !std::isfinite(*rician_k_db))
        throw std::invalid_argument("rician_k_db must be finite");
}

std::vector<double> TdlConfig::tap_powers() const {
    std::vector<double> p(static_cast<std::size_t>(num_taps));
    double sum = 0.0;
    for (int i = 0; i < num_taps; ++i) {
        p[i] = std::exp(-pdp_decay * i);
        sum += p[i];
    }
    for (auto& v : p) v *= total_power / sum;
    return p;
}

void TdlRanges::validate() const {
    if (snr_db_max < snr_db_min) throw std::invalid_argument("empty SNR range");
    if (rician_k_db_max < rician_k_db_min) throw std::invalid_argument("empty K range");
    if (max_doppler_max < max_doppler_min || max_doppler_min <= 0.0)
        throw std::invalid_argument("invalid Doppler range");
    if (pdp_decay_max < pdp_decay_min) throw std::invalid_argument("empty decay range");
    if (los_probability < 0.0 || los_probability > 1.0)
        throw std::invalid_argument("los_probability must be in [0,1]");
    if (num_taps < 1 || paths_per_tap < 2) throw std::invalid_argument("invalid tap counts");
}

StationaryProcess sample_tdl_process(const TdlConfig& config, const GridSpec& spec,
                                     std::uint64_t seed) {
    config.validate();
    spec.validate();
    Rng rng(mix_seed(seed));

    const auto tap_power = config.tap_powers();
    StationaryProcess process;
    process.spec = spec;
    process.delay_drift = false;  // tap delays are fixed; Doppler rotates phase only
    process.paths.reserve(static_cast<std::size_t>(config.num_taps) * config.paths_per_tap + 1);

    const double k_linear =
        config.rician_k_db ? std::pow(10.0, *config.rician_k_db / 10.0) : 0.0;

    for (int tap = 0; tap < config.num_taps; ++tap) {
        double scattered_power = tap_power[tap];
        if (tap == 0 && config.rician_k_db) {
            // Specular component first: deterministic amplitude, random phase
            // and a Doppler drawn like any other path.
            scattered_power = tap_power[0] / (k_linear + 1.0);
            PropagationPath specular;
            specular.amplitude = std::sqrt(tap_power[0] * k_linear / (k_linear + 1.0));
            specular.phase = rng.uniform(0.0, 2.0 * M_PI);
            specular.delay_at_origin = 0.0;
            const double fd = rng.uniform(-config.max_doppler, config.max_doppler);
            specular.relative_velocity = fd * kSpeedOfLight / spec.carrier_frequency;
            specular.kind = PathKind::Los;
            process.paths.push_back(specular);
        }
        const double amp = std::sqrt(scattered_power / config.paths_per_tap);
        for (int p = 0; p < config.paths_per_tap; ++p) {
            PropagationPath path;
            path.amplitude = amp;
            path.phase = rng.uniform(0.0, 2.0 * M_PI);
            path.delay_at_origin = tap * config.tap_spacing;
            const double fd = rng.uniform(-config.max_doppler, config.max_doppler);
            path.relative_velocity = fd * kSpeedOfLight / spec.carrier_frequency;
            path.kind = PathKind::Diffuse;
            process.paths.push_back(path);
        }
    }
    return process;
}

std::vector<TdlConfig> sample_dataset_configs(const TdlRanges& ranges, int count,
                                              std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    ranges.validate();

    std::vector<TdlConfig> configs;
    configs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        TdlConfig cfg;
        cfg.num_taps = ranges.num_taps;
        cfg.paths_per_tap = ranges.paths_per_tap;
        cfg.tap_spacing = ranges.tap_spacing;
        cfg.pdp_decay = rng.uniform(ranges.pdp_decay_min, ranges.pdp_decay_max);
        cfg.max_doppler = std::exp(rng.uniform(std::log(ranges.max_doppler_min),
                                               std::log(ranges.max_doppler_max)));
        const double snr_db = rng.uniform(ranges.snr_db_min, ranges.snr_db_max);
        cfg.total_power = std::pow(10.0, (snr_db - ranges.unit_gain_snr_db) / 10.0);
        if (rng.uniform() < ranges.los_probability)
            cfg.rician_k_db = rng.uniform(ranges.rician_k_db_min, ranges.rician_k_db_max);
        configs.push_back(cfg);
    }
    return configs;
}

}  // namespace ferlink
