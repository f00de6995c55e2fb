#include <doctest.h>

#include <cmath>
#include <vector>

#include "qfstab/simulator.hpp"

using namespace qfs;

namespace {

const PlantModel& demo_plant() {
    static PlantModel p = builtin_demo_plant();
    return p;
}

const SynthesisResult& demo_synth() {
    static SynthesisResult s = synthesize(demo_plant(), 1.0 / 3.0, SamplingPlan{});
    return s;
}

} // namespace

TEST_CASE("rk4 integrates a linear system accurately") {
    OdeRhs rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
    std::vector<double> y{1.0};
    const double h = 0.01;
    for (int k = 0; k < 100; ++k) rk4_step(rhs, k * h, y, h, y);
    CHECK(y[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("guard crossing of a linear ramp is localized to tolerance") {
    // zetadot = -1 from zeta(0) = 1; guard at zeta = 0.5 crosses at t = 0.5
    OdeRhs rhs = [](double, std::span<const double>, std::span<double> dy) { dy[0] = -1.0; };
    auto hold = [](std::span<const double> y) { return y[0] > 0.5; };

    const double h = 1e-2, t_tol = h * std::pow(2.0, -20);
    std::vector<double> y{1.0};
    double t = 0.0;
    long samples = 0;
    bool crossed = integrate_until(rhs, y, t, 2.0, h, t_tol, hold,
                                   [&](double, std::span<const double>) { ++samples; });
    CHECK(crossed);
    CHECK(std::fabs(t - 0.5) <= 2.0 * t_tol);
    CHECK(y[0] <= 0.5);
    CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(samples == 49); // accepted full steps before the crossing step

    SUBCASE("halving the step moves the localized time by less than the tolerances") {
        std::vector<double> y2{1.0};
        double t2 = 0.0;
        double tol2 = (h / 2.0) * std::pow(2.0, -20);
        integrate_until(rhs, y2, t2, 2.0, h / 2.0, tol2, hold,
                        [](double, std::span<const double>) {});
        CHECK(std::fabs(t2 - t) <= 2.0 * (t_tol + tol2));
    }
}

TEST_CASE("no guard in reach integrates the full horizon") {
    OdeRhs rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
    auto hold = [](std::span<const double>) { return true; };
    std::vector<double> y{1.0};
    double t = 0.0;
    bool crossed = integrate_until(rhs, y, t, 1.0, 1e-2, 1e-8, hold,
                                   [](double, std::span<const double>) {});
    CHECK_FALSE(crossed);
    CHECK(t == doctest::Approx(1.0));
    CHECK(y[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("quantized run from the origin stays in the target set") {
    SimOptions opts;
    opts.horizon = 0.5;
    std::vector<double> x0{0.0}, mu{1.0};
    Trajectory traj = run_quantized(demo_plant(), demo_synth(), x0, 0.0, mu, opts);
    REQUIRE(traj.entered_sigma_at.has_value());
    CHECK(*traj.entered_sigma_at == 0.0);
    for (double w : traj.w) CHECK(w <= demo_synth().sigma * 1.001);
    CHECK(traj.monitors.all_pass());
}

TEST_CASE("quantized run from the outer shell converges and satisfies every monitor") {
    SimOptions opts;
    opts.horizon = 6.0;
    auto ics = boundary_shell_points(demo_plant(), 0.98, 9);
    REQUIRE(ics.size() == 9);
    const auto& [x0, zeta0] = ics[2];
    std::vector<double> mu{1.5};
    Trajectory traj = run_quantized(demo_plant(), demo_synth(), x0, zeta0, mu, opts);

    REQUIRE(traj.entered_sigma_at.has_value());
    CHECK(*traj.entered_sigma_at > 0.0);
    CHECK(*traj.entered_sigma_at < opts.horizon);
    INFO(traj.monitors.to_text());
    CHECK(traj.monitors.all_pass());
    CHECK(traj.hysteresis_jumps == 0);
    CHECK(traj.events.size() > 2);

    SUBCASE("u is constant between consecutive events") {
        size_t ei = 0;
        for (size_t k = 0; k + 1 < traj.sample_count(); ++k) {
            while (ei < traj.events.size() && traj.events[ei].time <= traj.t[k]) ++ei;
            bool event_between = ei < traj.events.size() && traj.events[ei].time <= traj.t[k + 1];
            if (!event_between) CHECK(traj.u[k] == traj.u[k + 1]);
        }
    }

    SUBCASE("events are strictly increasing and change the value") {
        for (size_t k = 0; k + 1 < traj.events.size(); ++k)
            CHECK(traj.events[k].time < traj.events[k + 1].time);
        for (const auto& ev : traj.events) CHECK(ev.old_value != ev.new_value);
    }

    SUBCASE("dwell time bound honored") {
        CHECK(traj.min_event_gap >= demo_synth().dt_min - 2.0 * traj.t_tol);
    }

    SUBCASE("rate bound honored") { CHECK(traj.rav_final <= demo_synth().rate_bound_quantized); }

    SUBCASE("the quantizer range is never exceeded") {
        double lim = demo_synth().u0 / (1.0 - demo_synth().delta);
        for (double z : traj.zeta) CHECK(std::fabs(demo_synth().kbar * z) <= lim);
    }
}

TEST_CASE("initial conditions outside the operating set are rejected before integration") {
    SimOptions opts;
    std::vector<double> mu{1.0};
    std::vector<double> x_big{1.38}; // W > 3
    CHECK_THROWS_AS(run_quantized(demo_plant(), demo_synth(), x_big, 1.1, mu, opts), error);
    std::vector<double> x_dom{1.45}; // V > c+1: outside the domain of W entirely
    CHECK_THROWS_AS(run_quantized(demo_plant(), demo_synth(), x_dom, 0.0, mu, opts), error);
    std::vector<double> mu_bad{2.0};
    CHECK_THROWS_AS(
        run_quantized(demo_plant(), demo_synth(), std::vector<double>{0.1}, 0.1, mu_bad, opts),
        error);
}

TEST_CASE("drift-free plant: switching ceases and the rate decays as 1/t") {
    PlantModel plant = builtin_demo_qzero_plant();
    SynthesisResult synth = synthesize(plant, 1.0 / 3.0, SamplingPlan{});
    SimOptions opts;
    opts.horizon = 20.0;
    auto ics = boundary_shell_points(plant, 0.98, 4);
    std::vector<double> mu{1.0};
    Trajectory traj = run_quantized(plant, synth, ics[0].first, ics[0].second, mu, opts);

    INFO(traj.monitors.to_text());
    // With q = 0 the input falls monotonically through the automaton. A half
    // level is entered at u_i/(1+delta) and left at u_i/(1+delta)^2, a gap
    // shorter by rho than the distance the dt_min formula accounts for, so
    // the dwell monitor reports the formula violation; the provable floor
    // rho * dt_min still holds. Every other claim passes.
    const auto* dwell = traj.monitors.find("dwell_time");
    REQUIRE(dwell != nullptr);
    CHECK(dwell->violations > 0);
    CHECK(traj.min_event_gap >= synth.rho() * synth.dt_min - 2.0 * traj.t_tol);
    for (const auto& c : traj.monitors.checks)
        if (c.name != "dwell_time") CHECK(c.pass());
    REQUIRE(traj.switching_ceased_at.has_value());
    CHECK(*traj.switching_ceased_at < opts.horizon / 2.0);
    CHECK(traj.events.back().new_value == 0.0);

    // after the last switch R_av[0,t] = const/t: fit the log-log slope on the tail
    double t0 = std::max(*traj.switching_ceased_at, 0.5 * opts.horizon);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (const auto& [t, r] : traj.rav_series) {
        if (t <= t0 || r <= 0.0) continue;
        double lx = std::log(t), ly = std::log(r);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    REQUIRE(n > 10);
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("ternary run engages the correct initial value and converges") {
    SimOptions opts;
    opts.horizon = 6.0;
    const SynthesisResult& synth = demo_synth();
    auto ics = boundary_shell_points(demo_plant(), 0.98, 9);

    bool tested = false;
    for (const auto& [x0, zeta0] : ics) {
        if (zeta0 < synth.eta) continue;
        std::vector<double> mu{1.0};
        Trajectory traj = run_ternary(demo_plant(), synth, x0, zeta0, mu, opts);
        REQUIRE(!traj.events.empty());
        CHECK(traj.events.front().time == 0.0);
        CHECK(traj.events.front().new_value == -synth.kbar_ternary);
        INFO(traj.monitors.to_text());
        CHECK(traj.monitors.all_pass());
        REQUIRE(traj.entered_sigma_at.has_value());
        CHECK(traj.rav_final <= synth.rate_bound_ternary);
        tested = true;
        break;
    }
    CHECK(tested);
}

TEST_CASE("ternary run with u = 0 in the small-zeta neighborhood still decreases W") {
    // start with |zeta| < eta but W > sigma: the control stays 0 while in U
    // and the decrease monitor covers exactly those samples
    const SynthesisResult& synth = demo_synth();
    SimOptions opts;
    opts.horizon = 6.0;
    std::vector<double> x0{0.9}, mu{1.0}; // W(0.9, 0) = 0.68, inside S
    Trajectory traj = run_ternary(demo_plant(), synth, x0, 0.0, mu, opts);
    INFO(traj.monitors.to_text());
    CHECK(traj.monitors.all_pass());
    REQUIRE(traj.entered_sigma_at.has_value());
    const auto* neg = traj.monitors.find("wdot_negative_in_S");
    REQUIRE(neg != nullptr);
    CHECK(neg->checked > 0);
    CHECK(neg->violations == 0);
}

TEST_CASE("identical runs are bit identical") {
    SimOptions opts;
    opts.horizon = 1.0;
    auto ics = boundary_shell_points(demo_plant(), 0.98, 9);
    std::vector<double> mu{0.5};
    Trajectory a = run_quantized(demo_plant(), demo_synth(), ics[4].first, ics[4].second, mu, opts);
    Trajectory b = run_quantized(demo_plant(), demo_synth(), ics[4].first, ics[4].second, mu, opts);
    REQUIRE(a.events.size() == b.events.size());
    for (size_t k = 0; k < a.events.size(); ++k) {
        CHECK(a.events[k].time == b.events[k].time);
        CHECK(a.events[k].old_value == b.events[k].old_value);
        CHECK(a.events[k].new_value == b.events[k].new_value);
        CHECK(a.events[k].trigger == b.events[k].trigger);
    }
    REQUIRE(a.t == b.t);
    CHECK(a.zeta == b.zeta);
    CHECK(a.w == b.w);
    CHECK(a.rav_final == b.rav_final);
}

TEST_CASE("measure_rate on synthetic event lists") {
    Trajectory traj;
    traj.horizon = 10.0;
    traj.t = {0.0, 2.5, 5.0, 7.5, 10.0};

    SUBCASE("no events gives zero after the first window") {
        auto [rav, series] = measure_rate(traj, 9);
        CHECK(rav == 0.0);
        for (const auto& [t, r] : series) CHECK(r == 0.0);
    }

    SUBCASE("k+1 events in [0,T] give (k+1) B / T at T") {
        traj.events = {{0.0, 0, 1, "init"}, {1.0, 1, 2, "a"}, {2.0, 2, 1, "b"}};
        auto [rav, series] = measure_rate(traj, 9);
        REQUIRE(!series.empty());
        CHECK(series.back().first == 10.0);
        CHECK(series.back().second == doctest::Approx(3.0 * 9.0 / 10.0));
    }

    SUBCASE("periodic switching tends to B / period") {
        traj.t.clear();
        traj.horizon = 100.0;
        const double period = 0.5;
        double old = 0.0;
        for (double t = period; t <= 100.0; t += period) {
            traj.events.push_back({t, old, old == 0.0 ? 1.0 : 0.0, "flip"});
            old = traj.events.back().new_value;
        }
        for (double t = 0.0; t <= 100.0; t += 1.0) traj.t.push_back(t);
        auto [rav, series] = measure_rate(traj, 3);
        CHECK(rav == doctest::Approx(3.0 / period).epsilon(0.05));
    }
}

TEST_CASE("boundary shell points sit on the requested level") {
    auto ics = boundary_shell_points(demo_plant(), 0.98, 9);
    const LyapunovSpec& lyap = demo_plant().lyapunov;
    for (const auto& [x, zeta] : ics) {
        double w = eval_W(x, zeta, lyap);
        CHECK(w == doctest::Approx(0.98 * 3.0).epsilon(1e-6));
        CHECK(w <= 3.0);
    }
}

TEST_CASE("largest inscribed cube of the demo operating set") {
    // corner (R, R): 2 R^2 / (2 - R^2) = 3 gives R = sqrt(1.2)
    double R = largest_inscribed_cube(demo_plant());
    CHECK(R == doctest::Approx(std::sqrt(1.2)).epsilon(1e-6));
}

TEST_CASE("the deadzone decrease monitor engages when the deadzone reaches past eta") {
    // For properly synthesized level counts the deadzone ends far below
    // |zeta| = eta and the deadzone-margin monitor is vacuous. Shrinking j by
    // hand widens the deadzone into S_tilde; the monitor must then actually
    // measure that region (and will report violations, since a single level
    // cannot stabilize the shell -- this checks the bookkeeping, not a claim).
    SynthesisResult doctored = demo_synth();
    doctored.j = 1;
    SimOptions opts;
    opts.horizon = 1.0;
    auto ics = boundary_shell_points(demo_plant(), 0.98, 9);
    std::vector<double> mu{1.0};
    Trajectory traj = run_quantized(demo_plant(), doctored, ics[2].first, ics[2].second, mu, opts);
    const auto* dz = traj.monitors.find("margin_deadzone");
    REQUIRE(dz != nullptr);
    CHECK(dz->checked > 0);
}

TEST_CASE("event sequence and times match a closed-form flow oracle") {
    // Between switches the demo loop is linear: rdot = mu r + kbar u with
    // r = kbar zeta, so guard-hitting times have a closed form. Replaying the
    // automaton on exact flows gives an integration-free reference for the
    // event sequence produced by the RK4 + bisection loop.
    const PlantModel& plant = demo_plant();
    const SynthesisResult& synth = demo_synth();
    const double mu = 1.3;
    auto ics = boundary_shell_points(plant, 0.98, 9);
    const auto& [x0, zeta0] = ics[1];
    SimOptions opts;
    opts.horizon = 0.3;
    Trajectory traj = run_quantized(plant, synth, x0, zeta0, std::vector<double>{mu}, opts);
    REQUIRE(traj.events.size() > 10);

    QuantizerConfig cfg{synth.u0, synth.delta, static_cast<int>(synth.j), synth.kbar};
    HysteresisState node = hysteresis_init(cfg.kbar * zeta0, cfg);
    double t = 0.0;
    double r = cfg.kbar * zeta0;
    std::vector<std::pair<double, std::string>> expected;
    if (hysteresis_output(node, cfg) != 0.0)
        expected.push_back({0.0, "init:" + hysteresis_node_name(node)});

    const double inf = std::numeric_limits<double>::infinity();
    while (t < opts.horizon && expected.size() < traj.events.size() + 4) {
        double u = -hysteresis_output(node, cfg);
        double lo, hi;
        hysteresis_interval(node, cfg, lo, hi);
        // r(t+s) = (r - r_eq) e^{mu s} + r_eq with r_eq = -kbar u / mu
        double r_eq = -cfg.kbar * u / mu;
        auto hit_time = [&](double target) {
            double a = r - r_eq, b = target - r_eq;
            if (a == 0.0) return inf;
            double ratio = b / a;
            if (!(ratio > 0.0)) return inf;
            double s = std::log(ratio) / mu;
            return s > 1e-300 ? s : inf;
        };
        double s_lo = hit_time(lo), s_hi = hit_time(hi);
        double s = std::min(s_lo, s_hi);
        if (!std::isfinite(s) || t + s > opts.horizon) break;
        // land exactly on the boundary, then nudge outward until the node's
        // own membership predicate reports the exit
        double rb = s_lo <= s_hi ? lo : hi;
        double dir = s_lo <= s_hi ? -inf : inf;
        while (hysteresis_contains(node, rb, cfg)) rb = std::nextafter(rb, dir);
        HysteresisState prev = node;
        node = hysteresis_step(node, rb, cfg);
        t += s;
        r = rb;
        expected.push_back(
            {t, hysteresis_node_name(prev) + "->" + hysteresis_node_name(node)});
    }

    REQUIRE(traj.events.size() == expected.size());
    for (size_t k = 0; k < expected.size(); ++k) {
        CHECK(traj.events[k].trigger == expected[k].second);
        CHECK(std::fabs(traj.events[k].time - expected[k].first) <= 1e-6);
    }
}
