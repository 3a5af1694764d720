#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "locagen/geometry.hpp"
#include "locagen/rng.hpp"

using namespace locagen;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("equilateral spacing is exact") {
    const auto g = ArrayGeometry::equilateral(0.1);
    CHECK(g.pair_distance(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(g.pair_distance(0, 2) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(g.pair_distance(1, 2) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(g.reference_mic == 0);
    CHECK(g.mics[0].x == 0.0);
    CHECK(g.mics[0].y == 0.0);
}

TEST_CASE("true_toa equal at the circumcenter") {
    const auto g = ArrayGeometry::equilateral(0.1);
    const Medium medium{343.0};
    // circumcenter of the equilateral triangle
    const SourcePosition center{0.05, 0.1 / (2.0 * std::sqrt(3.0))};
    const auto toa = true_toa(g, medium, center);
    CHECK(toa[0] == doctest::Approx(toa[1]).epsilon(1e-14));
    CHECK(toa[1] == doctest::Approx(toa[2]).epsilon(1e-14));
}

TEST_CASE("true_toa unit ratio") {
    const auto g = ArrayGeometry::equilateral(0.1);
    const Medium medium{343.0};
    const auto toa = true_toa(g, medium, SourcePosition{343.0, 0.0});
    CHECK(toa[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("true_toa differences match a long-double distance oracle") {
    const auto g = ArrayGeometry::equilateral(0.1);
    const Medium medium{343.0};
    const SourcePosition src{100.0, 0.0};
    const auto toa = true_toa(g, medium, src);

    auto oracle_toa = [&](const Vec2& mic) {
        const long double dx = static_cast<long double>(src.x) - mic.x;
        const long double dy = static_cast<long double>(src.y) - mic.y;
        return static_cast<double>(sqrtl(dx * dx + dy * dy) / 343.0L);
    };
    const double o21 = oracle_toa(g.mics[1]) - oracle_toa(g.mics[0]);
    const double o31 = oracle_toa(g.mics[2]) - oracle_toa(g.mics[0]);
    CHECK(std::fabs((toa[1] - toa[0]) - o21) < 1e-12);
    CHECK(std::fabs((toa[2] - toa[0]) - o31) < 1e-12);
}

TEST_CASE("true_toa rejects a coincident source") {
    const auto g = ArrayGeometry::equilateral(0.1);
    CHECK_THROWS_AS(true_toa(g, Medium{}, SourcePosition{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("doa_from_tdoa known values") {
    CHECK(doa_from_tdoa(0.0, 0.1, 343.0) == 0.0);
    CHECK(doa_from_tdoa(0.05 / 343.0, 0.1, 343.0) == doctest::Approx(30.0).epsilon(1e-12));
    // the boundary arcsin(1) loses half the float digits to the sqrt singularity
    CHECK(doa_from_tdoa(0.1 / 343.0, 0.1, 343.0) == doctest::Approx(90.0).epsilon(1e-6));
    CHECK_THROWS_AS(doa_from_tdoa(0.11 / 343.0, 0.1, 343.0), std::invalid_argument);
}

TEST_CASE("doa_from_tdoa is odd in tau") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const double tau = rng.uniform(-0.1 / 343.0, 0.1 / 343.0);
        CHECK(doa_from_tdoa(-tau, 0.1, 343.0) ==
              doctest::Approx(-doa_from_tdoa(tau, 0.1, 343.0)).epsilon(1e-12));
    }
}

TEST_CASE("quantization_floor values and scaling") {
    const double f48 = quantization_floor(343.0, 48000.0);
    CHECK(f48 > 7.14e-3);
    CHECK(f48 < 7.15e-3);
    CHECK(quantization_floor(343.0, 10000.0) == doctest::Approx(0.0343).epsilon(1e-15));
    // doubling fs halves the floor exactly
    CHECK(quantization_floor(343.0, 24000.0) == 2.0 * f48);
    // floor * fs = c up to 1 ulp
    const double recovered = f48 * 48000.0;
    CHECK(std::fabs(recovered - 343.0) <= std::ldexp(1.0, -44));
}

TEST_CASE("pair_count") {
    CHECK(pair_count(3) == 3);
    CHECK(pair_count(2) == 1);
    CHECK(pair_count(10) == 45);
    CHECK_THROWS_AS(pair_count(1), std::invalid_argument);
}

TEST_CASE("placement jitter bounds and determinism") {
    const auto g = ArrayGeometry::equilateral(0.1);

    const auto same = apply_placement_jitter(g, 0.0, 42);
    for (int i = 0; i < 3; ++i) {
        CHECK(same.mics[i].x == g.mics[i].x);
        CHECK(same.mics[i].y == g.mics[i].y);
    }

    for (std::uint64_t seed : {1ull, 7ull, 123456ull}) {
        const auto j1 = apply_placement_jitter(g, 0.001, seed);
        const auto j2 = apply_placement_jitter(g, 0.001, seed);
        for (int i = 0; i < 3; ++i) {
            CHECK(distance(j1.mics[i], g.mics[i]) <= 0.001);
            CHECK(j1.mics[i].x == j2.mics[i].x);
            CHECK(j1.mics[i].y == j2.mics[i].y);
        }
        CHECK(j1.nominal_spacing == g.nominal_spacing);
    }
}

TEST_CASE("true TDOA bounded by pair distance over c") {
    const auto g = ArrayGeometry::equilateral(0.1);
    const Medium medium{343.0};
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const double r = rng.uniform(0.5, 120.0);
        const double th = rng.uniform(0.0, 2.0 * kPi);
        const auto toa = true_toa(g, medium, SourcePosition{r * std::cos(th), r * std::sin(th)});
        CHECK(std::fabs(toa[1] - toa[0]) <= g.pair_distance(0, 1) / 343.0 + 1e-15);
        CHECK(std::fabs(toa[2] - toa[0]) <= g.pair_distance(0, 2) / 343.0 + 1e-15);
        CHECK(std::fabs(toa[2] - toa[1]) <= g.pair_distance(1, 2) / 343.0 + 1e-15);
    }
}

TEST_CASE("azimuth round-trips through polar placement") {
    Rng rng(21);
    for (int i = 0; i < 500; ++i) {
        const double r = rng.uniform(1.0, 100.0);
        const double az = rng.uniform(0.0, 360.0);
        const SourcePosition s{r * std::cos(deg_to_rad(az)), r * std::sin(deg_to_rad(az))};
        CHECK(circular_distance_deg(s.azimuth_deg(), az) < 1e-9);
    }
}

TEST_CASE("medium from temperature") {
    CHECK(Medium::from_temperature(20.0).speed_of_sound ==
          doctest::Approx(343.42).epsilon(1e-12));
    CHECK(Medium{}.speed_of_sound == 343.0);
}

TEST_CASE("tdoa ratio guard") {
    const auto p = TdoaPair::from_taus(2e-4, 1e-4);
    CHECK(p.ratio == doctest::Approx(2.0));
    const auto clamped = TdoaPair::from_taus(2e-4, 0.0);
    CHECK(clamped.ratio == doctest::Approx(2e5));
    const auto capped = TdoaPair::from_taus(-0.5, 0.0);
    CHECK(capped.ratio == -1e6);
    const auto zero = TdoaPair::from_taus(0.0, 0.0);
    CHECK(zero.ratio == 0.0);
}

TEST_SUITE_END();
