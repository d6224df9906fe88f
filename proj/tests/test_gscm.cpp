#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ferlink/gscm.hpp"
#include "ferlink/rng.hpp"

using namespace ferlink;

namespace {

const std::vector<double> kDc{0.0};

CanyonScenario quiet_scenario() {
    CanyonScenario s;
    s.diffuse_density = 0.0;
    s.num_static_discrete = 0;
    s.num_mobile_discrete = 0;
    s.los_blockage_probability = 0.0;
    return s;
}

}  // namespace

TEST_CASE("scatterer placement counts and determinism") {
    CanyonScenario s;
    s.canyon_length = 100.0;
    s.diffuse_density = 1.0;
    s.num_static_discrete = 12;
    s.num_mobile_discrete = 6;
    const auto a = place_scatterers(s, 21);
    const auto b = place_scatterers(s, 21);
    int diffuse = 0, stat = 0, mobile = 0;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].position.x == b[i].position.x);
        CHECK(a[i].gain == b[i].gain);
        switch (a[i].kind) {
            case PathKind::Diffuse: ++diffuse; break;
            case PathKind::StaticDiscrete: ++stat; break;
            case PathKind::MobileDiscrete: ++mobile; break;
            default: FAIL("unexpected scatterer kind");
        }
    }
    CHECK(diffuse == 200);  // floor(1.0 * 100) per wall, two walls
    CHECK(stat == 12);
    CHECK(mobile == 6);
}

TEST_CASE("scatterer geometry constraints") {
    CanyonScenario s;
    for (const auto& sc : place_scatterers(s, 3)) {
        CHECK(sc.position.x >= 0.0);
        CHECK(sc.position.x <= s.canyon_length);
        CHECK(sc.position.y >= 0.0);
        CHECK(sc.position.y <= s.canyon_width);
        if (sc.kind == PathKind::Diffuse) {
            CHECK((sc.position.y == 0.0 || sc.position.y == s.canyon_width));
            CHECK(norm(sc.velocity) == 0.0);
        }
        if (sc.kind == PathKind::MobileDiscrete) {
            CHECK(norm(sc.velocity) <= s.mobile_speed_max + 1e-12);
        } else {
            CHECK(norm(sc.velocity) == 0.0);
        }
        CHECK(sc.gain <= 1.0);
        CHECK(sc.gain > 0.0);
    }
}

TEST_CASE("empty scenario yields empty scatterer list") {
    CHECK(place_scatterers(quiet_scenario(), 1).empty());
}

TEST_CASE("los-only path parameters") {
    const auto s = quiet_scenario();
    GridSpec spec;
    const Vec2 tx{0.0, 7.0}, rx{100.0, 7.0};
    const auto paths = compute_paths(s, {}, tx, {11.0, 0.0}, rx, spec, 99);
    REQUIRE(paths.size() == 1);
    const auto& los = paths[0];
    CHECK(los.kind == PathKind::Los);
    CHECK(los.delay_at_origin == doctest::Approx(333.56e-9).epsilon(1e-4));
    const double lambda = 299792458.0 / spec.carrier_frequency;
    CHECK(los.amplitude == doctest::Approx(lambda / (4.0 * M_PI * 100.0)).epsilon(1e-12));
    // Tx driving straight at the Rx: closing speed 11 m/s
    CHECK(los.relative_velocity == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(doppler_shift(los.relative_velocity, spec.carrier_frequency) ==
          doctest::Approx(216.483).epsilon(1e-4));
}

TEST_CASE("static geometry gives zero Doppler") {
    CanyonScenario s;
    s.num_mobile_discrete = 0;
    GridSpec spec;
    const auto scatterers = place_scatterers(s, 5);
    const auto paths =
        compute_paths(s, scatterers, {20.0, 7.0}, {0.0, 0.0}, {60.0, 1.0}, spec, 5);
    for (const auto& p : paths) CHECK(p.relative_velocity == 0.0);
}

TEST_CASE("scattered paths arrive after los and respect the Doppler bound") {
    CanyonScenario s;
    GridSpec spec;
    const auto scatterers = place_scatterers(s, 17);
    const Vec2 tx{30.0, 7.0}, rx{95.0, 1.0};
    const Vec2 vtx{11.0, 0.0};
    const auto paths = compute_paths(s, scatterers, tx, vtx, rx, spec, 17);
    REQUIRE(paths.size() >= scatterers.size());
    const double los_delay = norm(rx - tx) / 299792458.0;
    const double v_bound = 11.0 + 2.0 * s.mobile_speed_max;
    int los_count = 0;
    for (const auto& p : paths) {
        if (p.kind == PathKind::Los) {
            ++los_count;
            CHECK(p.delay_at_origin == doctest::Approx(los_delay).epsilon(1e-12));
        } else {
            CHECK(p.delay_at_origin >= los_delay - 1e-15);
        }
        CHECK(std::abs(p.relative_velocity) <= v_bound + 1e-9);
        CHECK(p.amplitude > 0.0);
        CHECK(p.phase >= 0.0);
        CHECK(p.phase < 2.0 * M_PI);
    }
    CHECK(los_count <= 1);
}

TEST_CASE("scattered amplitude is the two-segment free-space product") {
    CanyonScenario s = quiet_scenario();
    GridSpec spec;
    std::vector<Scatterer> sc(1);
    sc[0].position = {50.0, 0.0};
    sc[0].gain = 0.1;
    sc[0].kind = PathKind::StaticDiscrete;
    const Vec2 tx{10.0, 7.0}, rx{90.0, 7.0};
    const auto paths = compute_paths(s, sc, tx, {0.0, 0.0}, rx, spec, 3);
    REQUIRE(paths.size() == 2);
    const auto& bounce = paths[1];
    const double d1 = norm(sc[0].position - tx);
    const double d2 = norm(rx - sc[0].position);
    const double lambda = 299792458.0 / spec.carrier_frequency;
    CHECK(bounce.delay_at_origin == doctest::Approx((d1 + d2) / 299792458.0).epsilon(1e-12));
    CHECK(bounce.amplitude == doctest::Approx(0.1 * lambda / (4.0 * M_PI * d1) * lambda /
                                              (4.0 * M_PI * d2))
                                  .epsilon(1e-12));
}

TEST_CASE("los blockage is Bernoulli in the seed") {
    CanyonScenario s = quiet_scenario();
    s.los_blockage_probability = 0.3;
    GridSpec spec;
    int blocked = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const auto paths = compute_paths(s, {}, {10.0, 7.0}, {11.0, 0.0}, {50.0, 1.0}, spec, i);
        if (paths.empty()) ++blocked;
    }
    const double rate = static_cast<double>(blocked) / n;
    CHECK(rate > 0.27);
    CHECK(rate < 0.33);
}

TEST_CASE("blocked-los envelope is Rayleigh over phase realizations") {
    CanyonScenario s;
    s.los_blockage_probability = 1.0;
    s.num_mobile_discrete = 0;
    s.num_static_discrete = 0;
    s.diffuse_density = 2.0;  // many weak reflections for the CLT
    GridSpec spec;
    const auto scatterers = place_scatterers(s, 1234);
    const int n = 4000;
    std::vector<double> env;
    env.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto paths =
            compute_paths(s, scatterers, {60.0, 7.0}, {11.0, 0.0}, {100.0, 1.0}, spec, 70000 + i);
        StationaryProcess process;
        process.spec = spec;
        process.paths = paths;
        env.push_back(std::abs(evaluate_ctf_at(process, 0.0, kDc)[0]));
    }
    double m2 = 0.0;
    for (double v : env) m2 += v * v;
    const double sigma_sq = m2 / (2.0 * n);
    std::sort(env.begin(), env.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = 1.0 - std::exp(-env[i] * env[i] / (2.0 * sigma_sq));
        d = std::max(d, std::abs(cdf - (i + 1.0) / n));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    }
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("v2i run layout and determinism") {
    CanyonScenario s;
    GridSpec spec;
    const auto regions = generate_v2i_run(s, spec, 10, 77, 3);
    REQUIRE(regions.size() == 5 * 10);
    const auto again = generate_v2i_run(s, spec, 10, 77, 3);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        CHECK(regions[i].run_index == 3);
        CHECK(regions[i].rx_index == static_cast<int>(i) % 5);
        CHECK(regions[i].waypoint_index == static_cast<int>(i) / 5);
        CHECK(regions[i].process.delay_drift);
        REQUIRE(regions[i].process.paths.size() == again[i].process.paths.size());
        for (std::size_t j = 0; j < regions[i].process.paths.size(); ++j) {
            CHECK(regions[i].process.paths[j].phase == again[i].process.paths[j].phase);
            CHECK(regions[i].process.paths[j].amplitude == again[i].process.paths[j].amplitude);
        }
    }
    // waypoints advance: los/delay structure changes between waypoints
    bool moved = false;
    for (std::size_t j = 0; j < regions[0].process.paths.size() &&
                            j < regions[1].process.paths.size();
         ++j) {
        if (regions[0].process.paths[j].delay_at_origin !=
            regions[1].process.paths[j].delay_at_origin)
            moved = true;
    }
    CHECK(moved);
}

TEST_CASE("trajectory shorter than requested waypoints is rejected") {
    CanyonScenario s;
    s.tx_trajectory = {{10.0, 7.0}, {12.0, 7.0}};  // 2 m at 10 m/s: 2 waypoints max
    GridSpec spec;
    CHECK_THROWS_AS(generate_v2i_run(s, spec, 10, 1), std::invalid_argument);
}

TEST_CASE("scenario validation") {
    CanyonScenario s;
    CHECK_NOTHROW(s.validate());
    s.tx_speed = 25.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.tx_speed = 10.0;
    s.los_blockage_probability = 1.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("trajectory interpolation") {
    CanyonScenario s;
    s.tx_trajectory = {{0.0, 0.0}, {10.0, 0.0}, {10.0, 10.0}};
    CHECK(s.trajectory_length() == doctest::Approx(20.0));
    CHECK(s.position_at(5.0).x == doctest::Approx(5.0));
    CHECK(s.position_at(5.0).y == doctest::Approx(0.0));
    CHECK(s.position_at(15.0).x == doctest::Approx(10.0));
    CHECK(s.position_at(15.0).y == doctest::Approx(5.0));
    CHECK(s.direction_at(15.0).y == doctest::Approx(1.0));
}
