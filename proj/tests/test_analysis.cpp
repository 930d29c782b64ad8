#include <doctest.h>

#include <cmath>

#include "roadfield/analysis.hpp"

using namespace roadfield;

namespace {
const ModelParams kParams{5.0, 1.0, 1.0, 1.0, 1.0};
}

TEST_CASE("front tracking") {
    const SimGrid g = SimGrid::make(20.0, 2.0, 0.25, 0.25);
    FieldState st;
    st.grid = g;
    st.model = SimModel::LocalLimit;
    st.u.assign(g.Nx, 0.0);
    st.v.assign(g.cells(), 0.0);

    SUBCASE("empty road gives the sentinel") {
        CHECK(track_front(st, 0.1) == doctest::Approx(-g.Lx));
    }
    SUBCASE("interpolated crossing") {
        // Plateau at 1 up to x = 12.25, drop below theta after.
        for (int i = 0; i < g.Nx; ++i) st.u[i] = g.x(i) <= 12.25 ? 1.0 : 0.0;
        const double theta = 0.1;
        const double pos = track_front(st, theta);
        CHECK(pos > 12.25);
        CHECK(pos < 12.5 + 1e-12);
        CHECK(pos == doctest::Approx(12.25 + g.dx * (1.0 - theta)));
    }
    SUBCASE("front at the wall returns the wall") {
        for (int i = 0; i < g.Nx; ++i) st.u[i] = 1.0;
        CHECK(track_front(st, 0.1) == doctest::Approx(g.Lx));
    }
    SUBCASE("theta must be positive") {
        CHECK_THROWS_AS(track_front(st, 0.0), std::invalid_argument);
    }
}

TEST_CASE("speed fitting") {
    FrontTrace trace;
    for (int i = 0; i < 40; ++i) {
        trace.times.push_back(0.5 * i);
        trace.positions.push_back(3.0 * (0.5 * i));
    }
    const SpeedFit fit = fit_speed(trace, 0.5);
    CHECK(fit.speed == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.residual == doctest::Approx(0.0));
    CHECK(fit.n_window == 20);

    FrontTrace flat;
    for (int i = 0; i < 20; ++i) {
        flat.times.push_back(i);
        flat.positions.push_back(7.0);
    }
    CHECK(fit_speed(flat).speed == doctest::Approx(0.0));

    FrontTrace tiny;
    for (int i = 0; i < 12; ++i) {
        tiny.times.push_back(i);
        tiny.positions.push_back(i);
    }
    CHECK_THROWS_AS(fit_speed(tiny, 0.5), std::invalid_argument); // 6-point window
    CHECK_NOTHROW(fit_speed(tiny, 1.0));
}

TEST_CASE("decay envelope checker") {
    const SimGrid g = SimGrid::make(10.0, 2.0, 0.25, 0.25);
    InitialDatum datum;
    datum.amplitude = 0.8;
    datum.radius = 3.0;
    const FieldState st = make_state(g, SimModel::LocalLimit, 0.0, datum, kParams);
    const double K = calibrate_envelope_K(kParams, datum);
    const EnvelopeCheck ok = check_decay_envelope(st, kParams, K);
    CHECK(ok.ok);
    CHECK(ok.max_violation <= 0.0);
    // A zero amplitude cannot dominate a positive datum.
    const EnvelopeCheck bad = check_decay_envelope(st, kParams, 0.0);
    CHECK_FALSE(bad.ok);
    CHECK(bad.max_violation > 0.0);
}

TEST_CASE("speed convergence experiment") {
    SUBCASE("field-driven regime short-circuits to zero gaps") {
        ModelParams p{1.0, 1.0, 1.0, 1.0, 1.0};
        const auto table = speed_convergence_experiment(p, KernelPair::proportional(), {0.4, 0.2});
        CHECK(table.c0 == doctest::Approx(2.0));
        for (const auto& r : table.rows) CHECK(r.gap == doctest::Approx(0.0));
    }
    SUBCASE("single-element list yields a single row") {
        FindSpeedOptions fast;
        fast.lambda_scan = 128;
        fast.n_nodes = 501;
        const auto table =
            speed_convergence_experiment(kParams, KernelPair::proportional(), {0.2}, fast);
        CHECK(table.rows.size() == 1);
        CHECK(table.monotone);
        CHECK(table.rows[0].c_eps > kParams.c_kpp());
    }
}

TEST_CASE("solution convergence experiment") {
    const Problem prob = Problem::with_defaults(kParams);
    const SimGrid g = SimGrid::make(5.0, 2.5, 0.25, 0.025);
    InitialDatum datum;
    datum.amplitude = 0.5;
    datum.radius = 1.5;

    CHECK_THROWS_AS(
        solution_convergence_experiment(prob, {0.4}, 0.05, g, datum),
        std::invalid_argument);

    const auto table = solution_convergence_experiment(prob, {0.4, 0.2}, 0.25, g, datum, 0.0, true);
    REQUIRE(table.rows.size() == 3);
    CHECK_FALSE(table.rows[0].eps.has_value());
    CHECK(table.rows[0].du == 0.0); // control row: identical runs, bitwise
    CHECK(table.rows[0].dv == 0.0);
    CHECK(table.rows[1].du + table.rows[1].dv > table.rows[2].du + table.rows[2].dv);
    CHECK(table.monotone);
}

TEST_CASE("uniform spreading experiment plumbing") {
    const Problem prob = Problem::with_defaults(kParams);
    const SimGrid g = SimGrid::make(10.0, 2.0, 0.25, 0.05);
    InitialDatum datum;
    datum.amplitude = 0.4;
    datum.radius = 2.0;

    SUBCASE("probe at the critical speed is rejected") {
        const double c0 = find_speed(kParams, prob.kernels, SpeedMode::local_limit()).c_star;
        CHECK_THROWS_AS(
            uniform_spreading_experiment(prob, {0.4}, {c0}, datum, 1.0, g),
            std::invalid_argument);
    }
    SUBCASE("oversized datum violates the smallness hypothesis") {
        InitialDatum big = datum;
        big.amplitude = 1.5;
        CHECK_THROWS_AS(
            uniform_spreading_experiment(prob, {0.4}, {1.0}, big, 1.0, g),
            std::invalid_argument);
    }
    SUBCASE("short run produces finite probes and records m") {
        const auto table = uniform_spreading_experiment(prob, {0.4}, {1.0, 10.0}, datum, 2.0, g);
        CHECK(table.m == doctest::Approx(1.0).epsilon(1e-6)); // proportional sandwich
        REQUIRE(table.probes.size() == 2);
        CHECK_FALSE(table.probes[0].supercritical);
        CHECK(table.probes[1].supercritical);
        CHECK(table.probes[1].vacuous); // 10 * 2 exceeds the box
        CHECK(table.probes[1].value == 0.0);
    }
}

TEST_CASE("measured front speed agrees with the dispersion speed at desk scale") {
    const Problem prob = Problem::with_defaults(kParams);
    const SimGrid g = SimGrid::make(40.0, 4.0, 0.25, 0.25);
    InitialDatum datum;
    datum.amplitude = 0.5;
    datum.radius = 2.0;
    const MeasuredSpeed ms = measure_front_speed(prob, SimModel::LocalLimit, 0.0, datum, g, 30.0);
    const double c0 = find_speed(kParams, prob.kernels, SpeedMode::local_limit()).c_star;
    // Short horizon and small box: a loose tolerance; the acceptance suite
    // runs the full-scale version.
    CHECK(std::abs(ms.fit.speed - c0) / c0 < 0.10);
    CHECK(ms.trace.times.size() >= 20);
}
