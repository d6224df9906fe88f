#include "ferlink/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ferlink {

void PropagationPath::validate(double v_max) const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw std::invalid_argument("path amplitude must be finite and >= 0");
    if (!(delay_at_origin >= 0.0) || !std::isfinite(delay_at_origin))
        throw std::invalid_argument("path delay must be finite and >= 0");
    if (!std::isfinite(phase))
        throw std::invalid_argument("path phase must be finite");
    if (!(std::abs(relative_velocity) <= v_max))
        throw std::invalid_argument("path |relative_velocity| exceeds v_max");
}

std::vector<double> GridSpec::bin_offsets() const {
    std::vector<double> offsets(static_cast<std::size_t>(num_subcarriers));
    for (int col = 0; col < num_subcarriers; ++col) offsets[col] = bin_offset(col);
    return offsets;
}

void GridSpec::validate() const {
    if (!(carrier_frequency > 0.0)) throw std::invalid_argument("carrier_frequency must be > 0");
    if (!(subcarrier_spacing > 0.0)) throw std::invalid_argument("subcarrier_spacing must be > 0");
    if (num_subcarriers < 1) throw std::invalid_argument("num_subcarriers must be >= 1");
    if (!(snapshot_period > 0.0)) throw std::invalid_argument("snapshot_period must be > 0");
    if (num_snapshots < 1) throw std::invalid_argument("num_snapshots must be >= 1");
    const long expected = std::lround(stationarity_time / snapshot_period);
    if (expected != num_snapshots)
        throw std::invalid_argument("num_snapshots inconsistent with stationarity_time / snapshot_period");
}

void StationaryProcess::validate() const {
    if (paths.empty()) throw std::invalid_argument("process has no propagation paths");
    spec.validate();
    for (const auto& p : paths) p.validate(std::numeric_limits<double>::infinity());
}

double doppler_shift(double relative_velocity, double carrier_frequency) {
    return carrier_frequency * relative_velocity / kSpeedOfLight;
}

double delay_at_time(const PropagationPath& path, double t) {
    const double tau = path.delay_at_origin - path.relative_velocity / kSpeedOfLight * t;
    if (tau < 0.0)
        throw std::domain_error("path delay crossed zero: extension horizon exceeded");
    return tau;
}

double delay_at(const PropagationPath& path, std::int64_t m, const GridSpec& spec) {
    if (m < 0) throw std::invalid_argument("snapshot index must be >= 0");
    return delay_at_time(path, static_cast<double>(m) * spec.snapshot_period);
}

double max_extension_time(const StationaryProcess& process) {
    if (!process.delay_drift) return std::numeric_limits<double>::infinity();
    double horizon = std::numeric_limits<double>::infinity();
    for (const auto& p : process.paths) {
        if (p.relative_velocity > 0.0)
            horizon = std::min(horizon, p.delay_at_origin * kSpeedOfLight / p.relative_velocity);
    }
    return horizon;
}

std::vector<cplx> evaluate_ctf_at(const StationaryProcess& process, double t,
                                  std::span<const double> frequency_offsets) {
    if (t < 0.0) throw std::invalid_argument("time must be >= 0");
    if (process.paths.empty()) throw std::invalid_argument("process has no propagation paths");

    std::vector<cplx> h(frequency_offsets.size(), cplx(0.0, 0.0));
    const double fc = process.spec.carrier_frequency;
    for (const auto& path : process.paths) {
        const double tau = process.delay_drift ? delay_at_time(path, t) : path.delay_at_origin;
        // Doppler phase: with delay drift it is carried entirely by tau;
        // without drift, apply the carrier-frequency rotation explicitly.
        const double doppler_phase =
            process.delay_drift ? 0.0
                                : 2.0 * M_PI * doppler_shift(path.relative_velocity, fc) * t;
        for (std::size_t i = 0; i < frequency_offsets.size(); ++i) {
            const double arg =
                path.phase + doppler_phase - 2.0 * M_PI * (fc + frequency_offsets[i]) * tau;
            h[i] += cplx(path.amplitude * std::cos(arg), path.amplitude * std::sin(arg));
        }
    }
    return h;
}

CtfGrid evaluate_ctf(const StationaryProcess& process, std::int64_t m_start, std::int64_t m_end) {
    if (m_start < 0 || m_end <= m_start)
        throw std::invalid_argument("invalid snapshot range");
    if (process.paths.empty()) throw std::invalid_argument("process has no propagation paths");

    const auto offsets = process.spec.bin_offsets();
    CtfGrid grid;
    grid.spec = process.spec;
    grid.num_rows = static_cast<int>(m_end - m_start);
    grid.values.resize(static_cast<std::size_t>(grid.num_rows) * process.spec.num_subcarriers);
    for (std::int64_t m = m_start; m < m_end; ++m) {
        const auto row = evaluate_ctf_at(
            process, static_cast<double>(m) * process.spec.snapshot_period, offsets);
        std::copy(row.begin(), row.end(),
                  grid.values.begin() +
                      static_cast<std::size_t>(m - m_start) * process.spec.num_subcarriers);
    }
    return grid;
}

}  // namespace ferlink
