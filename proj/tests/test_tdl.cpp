#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "ferlink/rng.hpp"
#include "ferlink/tdl.hpp"

using namespace ferlink;

namespace {

const std::vector<double> kDc{0.0};

GridSpec narrow_spec() {
    GridSpec spec;
    spec.num_subcarriers = 1;
    spec.num_snapshots = 1;
    spec.stationarity_time = spec.snapshot_period;
    return spec;
}

// KS statistic of envelope samples against Rayleigh with sigma^2 fitted
// by moments (sigma^2 = mean(r^2)/2).
double rayleigh_ks(std::vector<double> r) {
    double m2 = 0.0;
    for (double v : r) m2 += v * v;
    const double sigma_sq = m2 / (2.0 * static_cast<double>(r.size()));
    std::sort(r.begin(), r.end());
    double d = 0.0;
    const double n = static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double cdf = 1.0 - std::exp(-r[i] * r[i] / (2.0 * sigma_sq));
        d = std::max(d, std::abs(cdf - (static_cast<double>(i) + 1.0) / n));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    }
    return d;
}

// Moment-based Rician K estimate from envelope samples.
double estimate_rician_k(const std::vector<double>& r) {
    double m2 = 0.0, m4 = 0.0;
    for (double v : r) {
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m2 /= static_cast<double>(r.size());
    m4 /= static_cast<double>(r.size());
    const double var = m4 - m2 * m2;
    const double diffuse = m2 - std::sqrt(std::max(m2 * m2 - var, 0.0));
    return (m2 - diffuse) / diffuse;
}

cplx narrowband_gain(const StationaryProcess& process) {
    return evaluate_ctf_at(process, 0.0, kDc)[0];
}

}  // namespace

TEST_CASE("tap power normalization and exponential ratio") {
    TdlConfig config;
    config.pdp_decay = 0.7;
    config.total_power = 3.5;
    const auto powers = config.tap_powers();
    REQUIRE(powers.size() == 8);
    double sum = 0.0;
    for (double p : powers) sum += p;
    CHECK(sum == doctest::Approx(3.5).epsilon(1e-12));
    for (int i = 0; i + 1 < 8; ++i)
        CHECK(powers[i + 1] / powers[i] == doctest::Approx(std::exp(-0.7)).epsilon(1e-12));
}

TEST_CASE("sampled process structure") {
    TdlConfig config;
    const auto spec = narrow_spec();
    const auto process = sample_tdl_process(config, spec, 42);
    CHECK_FALSE(process.delay_drift);
    REQUIRE(process.paths.size() == 8 * 40);
    const auto powers = config.tap_powers();
    double total = 0.0;
    for (const auto& p : process.paths) {
        const int tap = static_cast<int>(std::llround(p.delay_at_origin / 100e-9));
        CHECK(p.delay_at_origin == doctest::Approx(tap * 100e-9).epsilon(1e-12));
        CHECK(p.amplitude ==
              doctest::Approx(std::sqrt(powers[tap] / 40.0)).epsilon(1e-12));
        const double fd = doppler_shift(p.relative_velocity, spec.carrier_frequency);
        CHECK(std::abs(fd) <= config.max_doppler + 1e-9);
        total += p.amplitude * p.amplitude;
    }
    CHECK(total == doctest::Approx(config.total_power).epsilon(1e-12));
}

TEST_CASE("rician specular path on first tap") {
    TdlConfig config;
    config.rician_k_db = 10.0;
    const auto spec = narrow_spec();
    const auto process = sample_tdl_process(config, spec, 7);
    REQUIRE(process.paths.size() == 8 * 40 + 1);
    const double k = std::pow(10.0, 1.0);
    const auto powers = config.tap_powers();
    int specular = 0;
    double tap0_scatter = 0.0, total = 0.0;
    for (const auto& p : process.paths) {
        total += p.amplitude * p.amplitude;
        if (p.kind == PathKind::Los) {
            ++specular;
            CHECK(p.delay_at_origin == 0.0);
            CHECK(p.amplitude ==
                  doctest::Approx(std::sqrt(powers[0] * k / (k + 1.0))).epsilon(1e-12));
        } else if (p.delay_at_origin == 0.0) {
            tap0_scatter += p.amplitude * p.amplitude;
        }
    }
    CHECK(specular == 1);
    CHECK(tap0_scatter == doctest::Approx(powers[0] / (k + 1.0)).epsilon(1e-12));
    CHECK(total == doctest::Approx(config.total_power).epsilon(1e-12));
}

TEST_CASE("determinism and seed sensitivity") {
    TdlConfig config;
    const auto spec = narrow_spec();
    const auto a = sample_tdl_process(config, spec, 5);
    const auto b = sample_tdl_process(config, spec, 5);
    const auto c = sample_tdl_process(config, spec, 6);
    REQUIRE(a.paths.size() == b.paths.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
        CHECK(a.paths[i].phase == b.paths[i].phase);
        CHECK(a.paths[i].relative_velocity == b.paths[i].relative_velocity);
        if (a.paths[i].phase != c.paths[i].phase) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("nlos narrowband envelope is Rayleigh") {
    TdlConfig config;
    const auto spec = narrow_spec();
    const int n = 10000;
    std::vector<double> env;
    env.reserve(n);
    for (int i = 0; i < n; ++i)
        env.push_back(std::abs(narrowband_gain(sample_tdl_process(config, spec, 1000 + i))));
    // KS critical value at alpha = 0.01
    CHECK(rayleigh_ks(std::move(env)) < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("rician K recovered by moment estimator") {
    TdlConfig config;
    config.rician_k_db = 10.0;
    const auto spec = narrow_spec();
    const int n = 20000;
    std::vector<double> env;
    env.reserve(n);
    for (int i = 0; i < n; ++i) {
        // isolate the first tap: the configured K lives there, the other
        // taps contribute extra diffuse power at narrowband
        const auto process = sample_tdl_process(config, spec, 50000 + i);
        cplx tap0 = 0.0;
        for (const auto& p : process.paths)
            if (p.delay_at_origin == 0.0)
                tap0 += p.amplitude * cplx(std::cos(p.phase), std::sin(p.phase));
        env.push_back(std::abs(tap0));
    }
    const double k_hat_db = 10.0 * std::log10(estimate_rician_k(env));
    CHECK(std::abs(k_hat_db - 10.0) < 1.0);
}

TEST_CASE("rms delay spread matches the pdp") {
    TdlConfig config;
    config.pdp_decay = 0.5;
    const auto powers = config.tap_powers();
    double m1 = 0.0, m2 = 0.0, psum = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double tau = i * 100e-9;
        m1 += powers[i] * tau;
        m2 += powers[i] * tau * tau;
        psum += powers[i];
    }
    const double analytic = std::sqrt(m2 / psum - (m1 / psum) * (m1 / psum));

    const auto spec = narrow_spec();
    double acc = 0.0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        const auto process = sample_tdl_process(config, spec, 2000 + i);
        double e1 = 0.0, e2 = 0.0, es = 0.0;
        for (const auto& p : process.paths) {
            const double w = p.amplitude * p.amplitude;
            e1 += w * p.delay_at_origin;
            e2 += w * p.delay_at_origin * p.delay_at_origin;
            es += w;
        }
        acc += std::sqrt(e2 / es - (e1 / es) * (e1 / es));
    }
    CHECK(std::abs(acc / n - analytic) / analytic < 0.05);
}

TEST_CASE("doppler spectrum confined to the configured band") {
    TdlConfig config;
    config.max_doppler = 200.0;
    GridSpec spec = narrow_spec();
    const auto process = sample_tdl_process(config, spec, 31);

    const int n = 4096;
    const double dt = 5e-4;
    std::vector<cplx> h(n);
    for (int m = 0; m < n; ++m) h[m] = evaluate_ctf_at(process, m * dt, kDc)[0];
    // naive DFT periodogram; bin spacing 1/(n*dt) Hz
    const double df = 1.0 / (n * dt);
    double in_band = 0.0, total = 0.0;
    for (int b = -n / 2; b < n / 2; ++b) {
        cplx acc = 0.0;
        const double w = -2.0 * M_PI * b * df * dt;
        const cplx rot(std::cos(w), std::sin(w));
        cplx ph = 1.0;
        for (int m = 0; m < n; ++m) {
            acc += h[m] * ph;
            ph *= rot;
        }
        const double p = std::norm(acc);
        total += p;
        if (std::abs(b * df) <= config.max_doppler + df) in_band += p;
    }
    CHECK(in_band / total > 0.99);
}

TEST_CASE("dataset config sampling") {
    TdlRanges ranges;
    const auto configs = sample_dataset_configs(ranges, 500, 9);
    REQUIRE(configs.size() == 500);
    const auto again = sample_dataset_configs(ranges, 500, 9);
    int los = 0;
    for (int i = 0; i < 500; ++i) {
        const auto& c = configs[i];
        CHECK(c.total_power == again[i].total_power);
        CHECK(c.max_doppler == again[i].max_doppler);
        CHECK(c.max_doppler >= 50.0);
        CHECK(c.max_doppler <= 1000.0);
        CHECK(c.pdp_decay >= 0.3);
        CHECK(c.pdp_decay <= 1.2);
        const double snr_db = 10.0 * std::log10(c.total_power) + ranges.unit_gain_snr_db;
        CHECK(snr_db >= -1e-9);
        CHECK(snr_db <= 30.0 + 1e-9);
        if (c.rician_k_db) {
            ++los;
            CHECK(*c.rician_k_db >= 0.0);
            CHECK(*c.rician_k_db <= 15.0);
        }
    }
    CHECK(los > 180);
    CHECK(los < 320);
}

TEST_CASE("degenerate ranges collapse to constants") {
    TdlRanges ranges;
    ranges.snr_db_min = ranges.snr_db_max = 12.0;
    ranges.max_doppler_min = ranges.max_doppler_max = 300.0;
    ranges.pdp_decay_min = ranges.pdp_decay_max = 0.9;
    ranges.los_probability = 0.0;
    for (const auto& c : sample_dataset_configs(ranges, 20, 77)) {
        CHECK(c.max_doppler == doctest::Approx(300.0));
        CHECK(c.pdp_decay == doctest::Approx(0.9));
        CHECK_FALSE(c.rician_k_db.has_value());
        CHECK(10.0 * std::log10(c.total_power) + ranges.unit_gain_snr_db ==
              doctest::Approx(12.0).epsilon(1e-9));
    }
}
