#include "ferlink/gscm.hpp"

#include <cmath>
#include <stdexcept>

#include "ferlink/rng.hpp"

namespace ferlink {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

void CanyonScenario::validate() const {
    if (!(canyon_width > 0.0) || !(canyon_length > 0.0))
        throw std::invalid_argument("canyon dimensions must be positive");
    if (tx_trajectory.size() < 2) throw std::invalid_argument("trajectory needs >= 2 points");
    if (!(tx_speed > 0.0) || tx_speed > 11.0)
        throw std::invalid_argument("tx_speed must be in (0, 11] m/s");
    if (rx_positions.empty() && num_rx < 1) throw std::invalid_argument("need at least one Rx");
    if (mobile_speed_min < 0.0 || mobile_speed_max < mobile_speed_min ||
        mobile_speed_max > 11.0)
        throw std::invalid_argument("mobile speeds must satisfy 0 <= min <= max <= 11");
    if (los_blockage_probability < 0.0 || los_blockage_probability > 1.0)
        throw std::invalid_argument("los_blockage_probability must be in [0,1]");
    if (diffuse_density < 0.0) throw std::invalid_argument("diffuse_density must be >= 0");
    if (num_static_discrete < 0 || num_mobile_discrete < 0)
        throw std::invalid_argument("scatterer counts must be >= 0");
}

double CanyonScenario::trajectory_length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < tx_trajectory.size(); ++i)
        len += norm(tx_trajectory[i] - tx_trajectory[i - 1]);
    return len;
}

Vec2 CanyonScenario::position_at(double distance) const {
    double remaining = distance;
    for (std::size_t i = 1; i < tx_trajectory.size(); ++i) {
        const double seg = norm(tx_trajectory[i] - tx_trajectory[i - 1]);
        if (remaining <= seg || i + 1 == tx_trajectory.size()) {
            const double f = seg > 0.0 ? remaining / seg : 0.0;
            return tx_trajectory[i - 1] + f * (tx_trajectory[i] - tx_trajectory[i - 1]);
        }
        remaining -= seg;
    }
    return tx_trajectory.back();
}

Vec2 CanyonScenario::direction_at(double distance) const {
    double remaining = distance;
    for (std::size_t i = 1; i < tx_trajectory.size(); ++i) {
        const double seg = norm(tx_trajectory[i] - tx_trajectory[i - 1]);
        if (remaining <= seg || i + 1 == tx_trajectory.size()) {
            const Vec2 d = tx_trajectory[i] - tx_trajectory[i - 1];
            const double n = norm(d);
            return n > 0.0 ? (1.0 / n) * d : Vec2{1.0, 0.0};
        }
        remaining -= seg;
    }
    return {1.0, 0.0};
}

std::vector<Vec2> CanyonScenario::effective_rx_positions() const {
    if (!rx_positions.empty()) return rx_positions;
    std::vector<Vec2> rx;
    rx.reserve(static_cast<std::size_t>(num_rx));
    // roadside Rx line 1 m off the lower wall
    for (int s = 0; s < num_rx; ++s)
        rx.push_back({canyon_length * 0.5 + (s - (num_rx - 1) * 0.5) * rx_spacing, 1.0});
    return rx;
}

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace

std::vector<Scatterer> place_scatterers(const CanyonScenario& scenario, std::uint64_t seed) {
    scenario.validate();
    Rng rng(mix_seed(seed));
    std::vector<Scatterer> scatterers;

    // Diffuse: deterministic count per wall, uniform along each wall.
    const int per_wall =
        static_cast<int>(std::floor(scenario.diffuse_density * scenario.canyon_length));
    for (int wall = 0; wall < 2; ++wall) {
        const double y = wall == 0 ? 0.0 : scenario.canyon_width;
        for (int i = 0; i < per_wall; ++i) {
            Scatterer s;
            s.position = {rng.uniform(0.0, scenario.canyon_length), y};
            s.gain = db_to_linear(
                rng.uniform(scenario.diffuse_gain_db_min, scenario.diffuse_gain_db_max));
            s.kind = PathKind::Diffuse;
            scatterers.push_back(s);
        }
    }

    for (int i = 0; i < scenario.num_static_discrete; ++i) {
        Scatterer s;
        s.position = {rng.uniform(0.0, scenario.canyon_length),
                      rng.uniform(0.0, scenario.canyon_width)};
        s.gain = db_to_linear(
            rng.uniform(scenario.discrete_gain_db_min, scenario.discrete_gain_db_max));
        s.kind = PathKind::StaticDiscrete;
        scatterers.push_back(s);
    }

    // Mobile discrete on two lane lines, driving +x or -x.
    for (int i = 0; i < scenario.num_mobile_discrete; ++i) {
        Scatterer s;
        const double lane_y = scenario.canyon_width * (i % 2 == 0 ? 0.35 : 0.65);
        s.position = {rng.uniform(0.0, scenario.canyon_length), lane_y};
        const double speed = rng.uniform(scenario.mobile_speed_min, scenario.mobile_speed_max);
        const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
        s.velocity = {sign * speed, 0.0};
        s.gain = db_to_linear(
            rng.uniform(scenario.discrete_gain_db_min, scenario.discrete_gain_db_max));
        s.kind = PathKind::MobileDiscrete;
        scatterers.push_back(s);
    }
    return scatterers;
}

std::vector<PropagationPath> compute_paths(const CanyonScenario& scenario,
                                           const std::vector<Scatterer>& scatterers,
                                           Vec2 tx_position, Vec2 tx_velocity,
                                           Vec2 rx_position, const GridSpec& spec,
                                           std::uint64_t seed) {
    const double d_los = norm(rx_position - tx_position);
    if (!(d_los > 0.0)) throw std::invalid_argument("Tx and Rx positions coincide");

    Rng rng(mix_seed(seed));
    const double lambda = kSpeedOfLight / spec.carrier_frequency;
    const auto friis = [lambda](double d) { return lambda / (4.0 * M_PI * d); };

    std::vector<PropagationPath> paths;
    paths.reserve(scatterers.size() + 1);

    const bool los_blocked = rng.uniform() < scenario.los_blockage_probability;
    if (!los_blocked) {
        PropagationPath los;
        los.amplitude = friis(d_los);
        los.phase = rng.uniform(0.0, 2.0 * M_PI);
        los.delay_at_origin = d_los / kSpeedOfLight;
        const Vec2 u = (1.0 / d_los) * (rx_position - tx_position);
        los.relative_velocity = dot(tx_velocity, u);
        los.kind = PathKind::Los;
        paths.push_back(los);
    }

    for (const auto& s : scatterers) {
        const double d1 = norm(s.position - tx_position);
        const double d2 = norm(rx_position - s.position);
        if (!(d1 > 0.0) || !(d2 > 0.0)) continue;  // degenerate geometry, skip
        PropagationPath p;
        p.amplitude = friis(d1) * friis(d2) * s.gain;
        p.phase = rng.uniform(0.0, 2.0 * M_PI);
        p.delay_at_origin = (d1 + d2) / kSpeedOfLight;
        // v_l = -c0 * d(tau)/dt for the two-segment path
        const Vec2 u1 = (1.0 / d1) * (s.position - tx_position);
        const Vec2 u2 = (1.0 / d2) * (rx_position - s.position);
        p.relative_velocity = dot(tx_velocity - s.velocity, u1) + dot(s.velocity, u2);
        p.kind = s.kind;
        paths.push_back(p);
    }
    return paths;
}

std::vector<GscmRegion> generate_v2i_run(const CanyonScenario& scenario, const GridSpec& spec,
                                         int regions_per_run, std::uint64_t seed,
                                         int run_index) {
    scenario.validate();
    spec.validate();
    if (regions_per_run < 1) throw std::invalid_argument("regions_per_run must be >= 1");

    const double waypoint_spacing = scenario.tx_speed * spec.stationarity_time;
    if (static_cast<double>(regions_per_run - 1) * waypoint_spacing >
        scenario.trajectory_length())
        throw std::invalid_argument("trajectory too short for requested waypoints");

    const auto scatterers = place_scatterers(scenario, mix_seed(seed, 0xA11CE));
    const auto rx = scenario.effective_rx_positions();

    std::vector<GscmRegion> regions;
    regions.reserve(rx.size() * static_cast<std::size_t>(regions_per_run));
    for (int w = 0; w < regions_per_run; ++w) {
        const double dist = w * waypoint_spacing;
        const Vec2 tx_pos = scenario.position_at(dist);
        const Vec2 tx_vel = scenario.tx_speed * scenario.direction_at(dist);
        for (std::size_t r = 0; r < rx.size(); ++r) {
            GscmRegion region;
            region.run_index = run_index;
            region.rx_index = static_cast<int>(r);
            region.waypoint_index = w;
            region.seed = mix_seed(seed, static_cast<std::uint64_t>(r),
                                   static_cast<std::uint64_t>(w));
            region.process.spec = spec;
            region.process.delay_drift = true;
            region.process.paths =
                compute_paths(scenario, scatterers, tx_pos, tx_vel, rx[r], spec, region.seed);
            regions.push_back(std::move(region));
        }
    }
    return regions;
}

}  // namespace ferlink
