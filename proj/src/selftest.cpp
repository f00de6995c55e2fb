#include "qfstab/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qfstab/lyapunov.hpp"
#include "qfstab/plants.hpp"
#include "qfstab/synthesis.hpp"

namespace qfs {

namespace {

struct SplitMix64 {
    std::uint64_t s;
    explicit SplitMix64(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

void set_detail(std::string* detail, const std::string& msg) {
    if (detail) *detail = msg;
}

} // namespace

bool selftest_sector(const QuantizerConfig& cfg, double delta_bound, int samples,
                     std::string* detail) {
    const double lo = cfg.deadzone_bound();
    const double hi = cfg.input_limit();
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        double r = lo + (hi - lo) * (k + 0.5) / samples;
        for (double s : {r, -r}) {
            double err = std::fabs(psi(s, cfg) - s);
            double allowed = delta_bound * std::fabs(s);
            worst = std::max(worst, err - allowed);
            if (err > allowed + 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(s)) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "sector bound violated at r=%.17g (excess %.3g)", s,
                              err - allowed);
                set_detail(detail, buf);
                return false;
            }
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d samples, worst excess %.3g", samples, worst);
    set_detail(detail, buf);
    return true;
}

bool selftest_odd_symmetry(const QuantizerConfig& cfg, int samples, std::string* detail) {
    const double hi = cfg.input_limit();
    for (int k = 0; k < samples; ++k) {
        double r = -hi + 2.0 * hi * k / (samples - 1);
        if (psi(-r, cfg) != -psi(r, cfg)) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "asymmetry at r=%.17g", r);
            set_detail(detail, buf);
            return false;
        }
    }
    set_detail(detail, std::to_string(samples) + " samples, exact");
    return true;
}

bool selftest_deadzone(const QuantizerConfig& cfg, int samples, std::string* detail) {
    const double dz = cfg.deadzone_bound();
    for (int k = 0; k < samples; ++k) {
        double r = dz * k / (samples - 1);
        if (psi(r, cfg) != 0.0 || psi(-r, cfg) != 0.0) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "nonzero output at r=%.17g", r);
            set_detail(detail, buf);
            return false;
        }
    }
    set_detail(detail, std::to_string(samples) + " samples, exact");
    return true;
}

bool selftest_scaled_equivalence(const QuantizerConfig& cfg, int samples, std::string* detail) {
    const double hi = cfg.input_limit() / cfg.kbar;
    for (int k = 0; k < samples; ++k) {
        double zeta = -hi + 2.0 * hi * (k + 0.5) / samples;
        if (!psi_bar_equivalent(zeta, cfg)) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "mismatch at zeta=%.17g", zeta);
            set_detail(detail, buf);
            return false;
        }
    }
    set_detail(detail, std::to_string(samples) + " samples");
    return true;
}

bool selftest_krasowskii_of_psi(const QuantizerConfig& cfg, int samples, std::string* detail) {
    const double hi = cfg.input_limit() / cfg.kbar;
    for (int k = 0; k < samples; ++k) {
        double zeta = -hi + 2.0 * hi * (k + 0.5) / samples;
        double v = psi(cfg.kbar * zeta, cfg);
        if (!krasowskii_membership(v, zeta, cfg)) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "Psi value outside the set at zeta=%.17g", zeta);
            set_detail(detail, buf);
            return false;
        }
    }
    set_detail(detail, std::to_string(samples) + " samples");
    return true;
}

bool selftest_no_chatter(const QuantizerConfig& cfg, int periods, int steps_per_period,
                         std::string* detail) {
    // sweep across exactly one guard pair of the top level: down-guard
    // u0/(1+delta), up-guard u0/(1-delta^2)
    const double center = cfg.u0;
    const double down_guard = cfg.u0 / (1.0 + cfg.delta);
    const double up_guard = down_guard / (1.0 - cfg.delta);
    const double amp = 1.15 * std::max(center - down_guard, up_guard - center);
    if (center + amp > cfg.input_limit()) {
        set_detail(detail, "fixture amplitude exceeds the quantizer range");
        return false;
    }
    HysteresisState st = hysteresis_init(center, cfg);
    long transitions = 0, jumps = 0;
    for (long k = 1; k <= static_cast<long>(periods) * steps_per_period; ++k) {
        double r = center + amp * std::sin(2.0 * M_PI * k / steps_per_period);
        HysteresisStepInfo info;
        st = hysteresis_step(st, r, cfg, &info);
        if (info.transitioned) ++transitions;
        if (info.reinitialized) ++jumps;
    }
    // the first rising crossing is absorbed by the initial node
    long expected = 2L * periods - 1;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%ld transitions over %d periods (expected %ld), %ld jumps",
                  transitions, periods, expected, jumps);
    set_detail(detail, buf);
    return transitions == expected && jumps == 0;
}

bool selftest_gain_identity(std::uint64_t seed, int trials, std::string* detail) {
    SplitMix64 rng(seed);
    double worst = 0.0;
    for (int k = 0; k < trials; ++k) {
        BoundEstimates b;
        b.w_bar = rng.uniform(0.1, 50.0);
        b.b_bar = rng.uniform(1.0, 5.0);
        double delta = rng.uniform(0.05, 0.95);
        double eta = rng.uniform(1e-3, 1.0);
        double b0 = rng.uniform(0.1, 2.0);
        double c = rng.uniform(1.0, 3.0), d = rng.uniform(1.0, 3.0);
        Gains g = compute_gains(delta, b, eta, b0, c, d);
        double lhs = g.k_star * (1.0 - delta);
        double rel = std::fabs(lhs - g.k0) / g.k0;
        worst = std::max(worst, rel);
        if (rel > 4.0 * std::numeric_limits<double>::epsilon()) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "identity off by %.3g (relative) at trial %d", rel, k);
            set_detail(detail, buf);
            return false;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d trials, worst relative error %.3g", trials, worst);
    set_detail(detail, buf);
    return true;
}

bool selftest_dwell_monotone(std::string* detail) {
    BoundEstimates b;
    b.q_bar = 1.0;
    b.zeta_bar = 1.0;
    b.b_bar = 1.0;
    const double k0 = 10.0, delta = 1.0 / 3.0;
    const long j = 2;
    DwellRates dr = compute_dwell_and_rates(b, k0, delta, j, 0.4);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= j; ++i) {
        double ti = per_level_dwell_bound(b, k0, delta, i);
        if (!(ti < prev)) {
            set_detail(detail, "per-level dwell bound is not strictly decreasing");
            return false;
        }
        prev = ti;
    }
    double tj = per_level_dwell_bound(b, k0, delta, static_cast<int>(j));
    double rel = std::fabs(tj - dr.dt_min) / dr.dt_min;
    char buf[96];
    std::snprintf(buf, sizeof buf, "min at i=j matches dt_min to %.3g (relative)", rel);
    set_detail(detail, buf);
    return rel <= 1e-12;
}

bool selftest_gradient(std::uint64_t seed, int points, double rel_tol, std::string* detail) {
    PlantModel plant = builtin_demo_plant();
    const LyapunovSpec& lyap = plant.lyapunov;
    SplitMix64 rng(seed);
    const double eps = 1e-6;
    double worst = 0.0;
    int done = 0;
    long guard = 0;
    while (done < points) {
        if (++guard > 100000) {
            set_detail(detail, "could not draw enough usable points");
            return false;
        }
        double xv = rng.uniform(-1.4, 1.4);
        double zeta = rng.uniform(-1.4, 1.4);
        double mu = rng.uniform(0.5, 1.5);
        double v = rng.uniform(-30.0, 30.0);
        std::vector<double> x{xv}, muv{mu};
        if (!in_W_domain(x, zeta, lyap) || eval_W(x, zeta, lyap) > lyap.outer_level()) continue;

        double wd = wdot_closed_loop(x, zeta, muv, v, plant, lyap);
        if (std::fabs(wd) < 1e-3) continue; // avoid meaningless relative errors

        std::vector<double> f(1), g(1);
        plant.F(x, muv, f);
        plant.G(x, muv, g);
        double xdot = f[0] + g[0] * zeta;
        double zetadot = plant.q(x, zeta, muv) + plant.b(x, zeta, muv) * v;
        std::vector<double> xp{xv + eps * xdot}, xm{xv - eps * xdot};
        if (!in_W_domain(xp, zeta + eps * zetadot, lyap) ||
            !in_W_domain(xm, zeta - eps * zetadot, lyap))
            continue;
        double fd = (eval_W(xp, zeta + eps * zetadot, lyap) -
                     eval_W(xm, zeta - eps * zetadot, lyap)) /
                    (2.0 * eps);
        double rel = std::fabs(fd - wd) / std::fabs(wd);
        worst = std::max(worst, rel);
        if (rel > rel_tol) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "finite differences disagree: rel=%.3g at x=%.6g zeta=%.6g v=%.6g", rel,
                          xv, zeta, v);
            set_detail(detail, buf);
            return false;
        }
        ++done;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d points, worst relative error %.3g", points, worst);
    set_detail(detail, buf);
    return true;
}

bool SelfTestReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string SelfTestReport::to_text() const {
    std::ostringstream o;
    for (const auto& c : checks)
        o << (c.pass ? "pass" : "FAIL") << "  " << c.name << ": " << c.detail << "\n";
    o << "selftest: " << (all_pass() ? "all checks passed" : "FAILURES PRESENT") << "\n";
    return o.str();
}

SelfTestReport run_selftest(std::uint64_t seed) {
    QuantizerConfig cfg{1.0, 1.0 / 3.0, 2, 2.0};
    SelfTestReport rep;
    auto add = [&](const char* name, auto&& fn) {
        SelfTestCheck c;
        c.name = name;
        c.pass = fn(&c.detail);
        rep.checks.push_back(std::move(c));
    };
    add("quantizer_odd_symmetry",
        [&](std::string* d) { return selftest_odd_symmetry(cfg, 10001, d); });
    add("quantizer_sector",
        [&](std::string* d) { return selftest_sector(cfg, cfg.delta, 10000, d); });
    add("quantizer_deadzone", [&](std::string* d) { return selftest_deadzone(cfg, 10000, d); });
    add("scaled_equivalence",
        [&](std::string* d) { return selftest_scaled_equivalence(cfg, 10000, d); });
    add("krasowskii_of_psi",
        [&](std::string* d) { return selftest_krasowskii_of_psi(cfg, 10000, d); });
    add("hysteresis_no_chatter",
        [&](std::string* d) { return selftest_no_chatter(cfg, 25, 4000, d); });
    add("gain_identity", [&](std::string* d) { return selftest_gain_identity(seed, 500, d); });
    add("dwell_monotone", [&](std::string* d) { return selftest_dwell_monotone(d); });
    add("lyapunov_gradient", [&](std::string* d) { return selftest_gradient(seed, 100, 1e-6, d); });
    return rep;
}

} // namespace qfs
