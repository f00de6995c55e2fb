#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>

#include "qfstab/synthesis.hpp"

using namespace qfs;

TEST_CASE("halton sequence basics") {
    CHECK(halton(1, 2) == 0.5);
    CHECK(halton(2, 2) == 0.25);
    CHECK(halton(3, 2) == 0.75);
    CHECK(halton(1, 3) == doctest::Approx(1.0 / 3.0));
    for (int i = 1; i < 1000; ++i) {
        double v = halton(i, 5);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("gain formulas reproduce the hand fixture") {
    // d=1, w_bar=2, b0=1, eta=0.4, delta=1/3: k0 = 10, k* = 15
    BoundEstimates b;
    b.w_bar = 2.0;
    b.b_bar = 1.0;
    Gains g = compute_gains(1.0 / 3.0, b, 0.4, 1.0, 1.0, 1.0);
    CHECK(g.k0 == 10.0);
    CHECK(g.k_star == doctest::Approx(15.0).epsilon(1e-12));
    // the identity k*(1-delta) = k0, here exactly
    CHECK(g.k_star * (1.0 - 1.0 / 3.0) == g.k0);
    // j* = ceil(ln(0.00625)/ln(0.5)) = 8 for c = d = 1, b_bar = 1
    CHECK(g.j_star == 8);
}

TEST_CASE("gain identity holds to machine precision across parameters") {
    std::uint64_t s = 12345;
    auto next = [&]() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return static_cast<double>(s >> 11) * 0x1.0p-53;
    };
    for (int k = 0; k < 1000; ++k) {
        BoundEstimates b;
        b.w_bar = 0.1 + 50.0 * next();
        b.b_bar = 1.0 + 4.0 * next();
        double delta = 0.05 + 0.9 * next();
        double eta = 1e-3 + next();
        double b0 = 0.1 + 2.0 * next();
        Gains g = compute_gains(delta, b, eta, b0, 1.0 + 2.0 * next(), 1.0 + 2.0 * next());
        CHECK(std::fabs(g.k_star * (1.0 - delta) - g.k0) <=
              4.0 * std::numeric_limits<double>::epsilon() * g.k0);
    }
}

TEST_CASE("k* approaches k0 from above as delta -> 0") {
    BoundEstimates b;
    b.w_bar = 2.0;
    b.b_bar = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {0.5, 0.1, 1e-3, 1e-6, 1e-9}) {
        Gains g = compute_gains(delta, b, 0.4, 1.0, 1.0, 1.0);
        CHECK(g.k_star > g.k0);
        CHECK(g.k_star < prev);
        prev = g.k_star;
    }
}

TEST_CASE("dwell and rate closed forms reproduce the hand fixture") {
    // q_bar=1, zeta_bar=1, rho=1/2 (delta=1/3), j=2, k0=10, b_bar=1:
    // DT_m = (1/12)(1/4) = 1/48, quantized bound 9*48 = 432
    BoundEstimates b;
    b.q_bar = 1.0;
    b.zeta_bar = 1.0;
    b.b_bar = 1.0;
    DwellRates r = compute_dwell_and_rates(b, 10.0, 1.0 / 3.0, 2, 0.4);
    CHECK(r.dt_min == 1.0 / 48.0);
    CHECK(r.rate_bound_quantized == 432.0);
    // ternary: 6(1/0.4 + 10) = 75
    CHECK(r.rate_bound_ternary == 75.0);
}

TEST_CASE("per-level dwell bound decreases and ends at dt_min") {
    BoundEstimates b;
    b.q_bar = 1.0;
    b.zeta_bar = 1.0;
    b.b_bar = 1.0;
    const double k0 = 10.0, delta = 1.0 / 3.0;
    const long j = 2;
    DwellRates r = compute_dwell_and_rates(b, k0, delta, j, 0.4);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= j; ++i) {
        double ti = per_level_dwell_bound(b, k0, delta, i);
        CHECK(ti < prev);
        prev = ti;
    }
    CHECK(per_level_dwell_bound(b, k0, delta, 2) ==
          doctest::Approx(r.dt_min).epsilon(1e-12));
}

TEST_CASE("dwell degenerates gracefully for q_bar = 0 and rejects j = 0 otherwise") {
    BoundEstimates b;
    b.q_bar = 0.0;
    b.zeta_bar = 1.0;
    b.b_bar = 1.0;
    DwellRates r = compute_dwell_and_rates(b, 10.0, 1.0 / 3.0, 0, 0.4);
    CHECK(r.dt_min == doctest::Approx((0.25) / 10.0)); // delta/(1+delta) / (k0 b_bar)
    b.q_bar = 1.0;
    CHECK_THROWS_AS(compute_dwell_and_rates(b, 10.0, 1.0 / 3.0, 0, 0.4), error);
}

TEST_CASE("sampled bounds on the demo plant") {
    PlantModel plant = builtin_demo_plant();
    SamplingPlan plan;
    plan.samples = 20000;
    SampleSet samples = draw_samples(plant, plan);
    CHECK(samples.points.size() > 10000);
    BoundEstimates est = estimate_bounds(plant, samples, plan);

    // b = 1 everywhere: b_bar = safety factor exactly
    CHECK(est.b_bar == doctest::Approx(1.1));
    CHECK(est.b_bar >= plant.b0);
    // max |zeta| over W <= 3 is sqrt(1.5): zeta^2/(2-zeta^2) <= 3
    CHECK(est.zeta_bar == doctest::Approx(std::sqrt(1.5) * 1.1).epsilon(0.01));
    CHECK(est.zeta_bar <= std::sqrt(1.5) * 1.1 * (1 + 1e-9));
    // q = mu zeta: q_bar close to 1.5 sqrt(1.5) * safety
    CHECK(est.q_bar <= 1.5 * std::sqrt(1.5) * 1.1 * (1 + 1e-9));
    CHECK(est.q_bar >= 1.5 * std::sqrt(1.5) * 1.1 * 0.9);
    CHECK(est.w_bar > 0.0);
    CHECK(est.max_grad_vf == doctest::Approx(3.0).epsilon(0.02)); // max 2x^2, x^2 <= 1.5
}

TEST_CASE("q_bar is zero for the drift-free plant regardless of the grid") {
    PlantModel plant = builtin_demo_qzero_plant();
    for (long n : {2000L, 8000L}) {
        SamplingPlan plan;
        plan.samples = n;
        SampleSet samples = draw_samples(plant, plan);
        CHECK(estimate_bounds(plant, samples, plan).q_bar == 0.0);
    }
}

TEST_CASE("refining the grid never decreases any bound") {
    PlantModel plant = builtin_demo_plant();
    SamplingPlan coarse;
    coarse.samples = 5000;
    SamplingPlan fine;
    fine.samples = 20000;
    BoundEstimates a = estimate_bounds(plant, draw_samples(plant, coarse), coarse);
    BoundEstimates b = estimate_bounds(plant, draw_samples(plant, fine), fine);
    CHECK(b.w_bar >= a.w_bar);
    CHECK(b.b_bar >= a.b_bar);
    CHECK(b.zeta_bar >= a.zeta_bar);
    CHECK(b.q_bar >= a.q_bar);
}

TEST_CASE("eta search on the demo plant") {
    PlantModel plant = builtin_demo_plant();
    SamplingPlan plan;
    SampleSet samples = draw_samples(plant, plan);
    BoundEstimates est = estimate_bounds(plant, samples, plan);
    double eta = estimate_eta(plant, est, samples, plan);
    CHECK(eta > 0.0);
    CHECK(eta < est.zeta_bar);

    // doubling the grid density does not change the certified ladder level
    SamplingPlan dense = plan;
    dense.samples = 2 * plan.samples;
    SampleSet samples2 = draw_samples(plant, dense);
    BoundEstimates est2 = estimate_bounds(plant, samples2, dense);
    double eta2 = estimate_eta(plant, est2, samples2, dense);
    CHECK(eta2 == doctest::Approx(eta).epsilon(0.51)); // same ladder, at most one halving apart
}

TEST_CASE("smaller sigma certifies a smaller eta, or fails outright") {
    SamplingPlan plan;
    PlantModel big = builtin_demo_plant(0.2);
    PlantModel small = builtin_demo_plant(0.01);
    SampleSet sb = draw_samples(big, plan);
    SampleSet ss = draw_samples(small, plan);
    double eta_big = estimate_eta(big, estimate_bounds(big, sb, plan), sb, plan);
    CHECK(eta_big > 0.0);
    // as sigma shrinks, S reaches closer to the origin and the certified
    // neighborhood shrinks with it, possibly to nothing
    try {
        double eta_small = estimate_eta(small, estimate_bounds(small, ss, plan), ss, plan);
        CHECK(eta_small <= eta_big);
    } catch (const error& e) {
        CHECK(e.code() == errc::synthesis);
    }
}

TEST_CASE("eta search fails for a plant without zero-input decrease") {
    PlantModel plant = builtin_demo_plant();
    plant.F = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    SamplingPlan plan;
    SampleSet samples = draw_samples(plant, plan);
    BoundEstimates est = estimate_bounds(plant, samples, plan);
    CHECK_THROWS_AS(estimate_eta(plant, est, samples, plan), error);
}

TEST_CASE("full synthesis on the demo plant") {
    PlantModel plant = builtin_demo_plant();
    SamplingPlan plan;
    SynthesisResult s = synthesize(plant, 1.0 / 3.0, plan);

    CHECK(s.eta > 0.0);
    CHECK(s.k_star > 0.0);
    CHECK(s.kbar == s.k_star); // gain_margin 1
    CHECK(s.j == s.j_star);
    CHECK(s.j >= 1);
    CHECK(s.dt_min > 0.0);
    CHECK(s.u0 == (1.0 + s.delta) * s.kbar * s.zeta_tilde);
    CHECK(std::fabs(s.k_star * (1.0 - s.delta) - s.k0) <= 1e-12 * s.k0);
    CHECK(s.rate_bound_quantized == doctest::Approx((4.0 * s.j + 1.0) / s.dt_min));
    CHECK(s.kbar_ternary == doctest::Approx(2.0 * s.bounds.w_bar));

    SUBCASE("idempotence: identical plan gives identical result") {
        SynthesisResult t = synthesize(plant, 1.0 / 3.0, plan);
        CHECK(t == s);
    }

    SUBCASE("gain margin below one is rejected") {
        CHECK_THROWS_AS(synthesize(plant, 1.0 / 3.0, plan, 0.9), error);
    }

    SUBCASE("margins scale the released constants") {
        SynthesisResult t = synthesize(plant, 1.0 / 3.0, plan, 2.0, 3);
        CHECK(t.kbar == doctest::Approx(2.0 * t.k_star));
        CHECK(t.j == t.j_star + 3);
        CHECK(t.kbar >= t.k_star);
    }
}

TEST_CASE("synthesis serialization round-trips exactly") {
    PlantModel plant = builtin_demo_plant();
    SamplingPlan plan;
    plan.samples = 4000;
    SynthesisResult s = synthesize(plant, 1.0 / 3.0, plan);
    s.config_hash = 0xdeadbeefcafe1234ull;
    std::string text = synthesis_to_text(s);
    SynthesisResult t = synthesis_from_text(text);
    CHECK(t == s);

    std::string path = "/tmp/qfstab_test_synth.txt";
    save_synthesis(s, path);
    CHECK(load_synthesis(path) == s);
    std::remove(path.c_str());

    CHECK_THROWS_AS(synthesis_from_text("bogus\n"), error);
    CHECK_THROWS_AS(synthesis_from_text("qfstab-synthesis v1\ndelta = 0.5\n"), error);

    std::string deriv = synthesis_derivation(s);
    CHECK(deriv.find("k_star") != std::string::npos);
    CHECK(deriv.find("dt_min") != std::string::npos);
}

TEST_CASE("sampling fails loudly when no point lands in the operating set") {
    PlantModel plant = builtin_demo_plant();
    plant.x_box = {{10.0}, {11.0}}; // entirely outside the domain of V < c+1
    SamplingPlan plan;
    plan.samples = 500;
    CHECK_THROWS_AS(draw_samples(plant, plan), error);
    try {
        draw_samples(plant, plan);
    } catch (const error& e) {
        CHECK(e.code() == errc::config);
    }
}
