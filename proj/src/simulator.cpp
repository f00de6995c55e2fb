#include "qfstab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qfstab/lyapunov.hpp"
#include "qfstab/sampling.hpp"

namespace qfs {

// --- monitor report -----------------------------------------------------------

bool MonitorReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass()) return false;
    return true;
}

const MonitorCheck* MonitorReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string MonitorReport::to_text() const {
    std::ostringstream o;
    for (const auto& c : checks) {
        o << "monitor " << c.name << ": " << (c.pass() ? "pass" : "FAIL");
        o << " (checked=" << c.checked << ", violations=" << c.violations;
        if (c.checked > 0 && std::isfinite(c.worst)) {
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.6g", c.worst);
            o << ", worst_excess=" << buf;
        }
        if (c.vacuous()) o << ", vacuous";
        o << ")";
        if (!c.detail.empty()) o << " " << c.detail;
        o << "\n";
    }
    o << "overall: " << (all_pass() ? "pass" : "FAIL") << "\n";
    return o.str();
}

// --- integration core -----------------------------------------------------------

void rk4_step(const OdeRhs& rhs, double t, std::span<const double> y, double h,
              std::span<double> out) {
    thread_local std::vector<double> k1, k2, k3, k4, tmp;
    const size_t n = y.size();
    k1.resize(n);
    k2.resize(n);
    k3.resize(n);
    k4.resize(n);
    tmp.resize(n);
    rhs(t, y, k1);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (size_t i = 0; i < n; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

bool integrate_until(const OdeRhs& rhs, std::vector<double>& y, double& t, double t_end, double h,
                     double t_tol, const std::function<bool(std::span<const double>)>& hold,
                     const std::function<void(double, std::span<const double>)>& on_sample) {
    const size_t n = y.size();
    std::vector<double> cand(n), yhi(n);
    while (t < t_end) {
        double hs = std::min(h, t_end - t);
        rk4_step(rhs, t, y, hs, cand);
        if (hs <= t_tol) { // final sliver, below guard resolution
            y = cand;
            t = t_end;
            on_sample(t, y);
            return false;
        }
        if (hold(cand)) {
            y = cand;
            t += hs;
            on_sample(t, y);
            continue;
        }
        // the guard fired inside (t, t+hs]: bisect the substep
        double lo = 0.0, hi = hs;
        yhi = cand;
        while (hi - lo > t_tol) {
            double mid = 0.5 * (lo + hi);
            rk4_step(rhs, t, y, mid, cand);
            if (hold(cand))
                lo = mid;
            else {
                hi = mid;
                yhi = cand;
            }
        }
        y = yhi;
        t += hi;
        return true;
    }
    return false;
}

// --- controllers ------------------------------------------------------------------

namespace {

struct QuantizedController {
    QuantizerConfig cfg;
    HysteresisState state;
    double lo = 0.0, hi = 0.0;
    long jumps = 0;

    void refresh() { hysteresis_interval(state, cfg, lo, hi); }

    void init(double zeta) {
        state = hysteresis_init(cfg.kbar * zeta, cfg);
        refresh();
    }

    double control() const { return -hysteresis_output(state, cfg); }

    bool holds(double zeta) const {
        double r = cfg.kbar * zeta;
        switch (state.kind) {
        case HysteresisNodeKind::Zero: return lo <= r && r <= hi;
        case HysteresisNodeKind::PlusLevel:
        case HysteresisNodeKind::PlusHalf: return lo < r && r <= hi;
        default: return lo <= r && r < hi;
        }
    }

    std::string label() const { return hysteresis_node_name(state); }

    std::string transition(double zeta) {
        HysteresisState old = state;
        HysteresisStepInfo info;
        state = hysteresis_step(state, cfg.kbar * zeta, cfg, &info);
        refresh();
        std::string trig = hysteresis_node_name(old) + "->" + hysteresis_node_name(state);
        if (info.reinitialized) {
            ++jumps;
            trig += "(jump)";
        }
        return trig;
    }
};

struct TernaryController {
    TernaryState state;
    double kbar = 0.0;
    double eta = 0.0;

    void init(double zeta) { state = ternary_init(zeta, eta, kbar); }

    double control() const { return state.output; }

    bool holds(double zeta) const { return ternary_holds(state, zeta); }

    std::string label() const { return value_name(state.output); }

    std::string value_name(double v) const {
        if (v == 0.0) return "0";
        return v < 0.0 ? "-kbar" : "+kbar";
    }

    std::string transition(double zeta) {
        TernaryState old = state;
        state = ternary_step(state, zeta, kbar);
        return value_name(old.output) + "->" + value_name(state.output);
    }
};

// --- runtime monitors ----------------------------------------------------------

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct RunMonitors {
    const PlantModel& plant;
    const SynthesisResult& synth;
    const SimOptions& opts;
    bool quantized;
    QuantizerConfig cfg; // valid when quantized

    MonitorCheck wdot_neg{"wdot_negative_in_S", 0, 0, kNegInf, ""};
    MonitorCheck shat{"margin_shat", 0, 0, kNegInf, ""};
    MonitorCheck dead{"margin_deadzone", 0, 0, kNegInf, ""};
    MonitorCheck tern{"margin_ternary", 0, 0, kNegInf, ""};
    MonitorCheck kras{"krasowskii", 0, 0, kNegInf, ""};
    MonitorCheck practical{"practical_stability", 0, 0, kNegInf, ""};
    MonitorCheck dwell{"dwell_time", 0, 0, kNegInf, ""};
    MonitorCheck rate{"rate_bound", 0, 0, kNegInf, ""};

    double dz_bound = 0.0;
    double shat_required = 0.0; // wdot must stay below these (both negative)
    double dead_required = 0.0;
    double tern_required = 0.0;
    std::optional<double> entered;

    RunMonitors(const PlantModel& p, const SynthesisResult& s, const SimOptions& o, bool quant)
        : plant(p), synth(s), opts(o), quantized(quant) {
        if (quantized) {
            cfg = QuantizerConfig{s.u0, s.delta, static_cast<int>(s.j), s.kbar};
            dz_bound = cfg.deadzone_bound();
        }
        double slack = 1.0 - opts.margin_tolerance;
        shat_required = -slack * s.bounds.w_bar * s.eta;
        tern_required = shat_required;
        dead_required = -slack * 0.5 * (s.d / (s.d + 1.0)) * s.kbar * s.b0 * s.eta * s.eta;
    }

    static void hit(MonitorCheck& c, double excess) {
        ++c.checked;
        c.worst = std::max(c.worst, excess);
        if (excess > 0.0) ++c.violations;
    }

    double observe(double t, std::span<const double> x, double zeta, std::span<const double> mu,
                   double u) {
        const LyapunovSpec& lyap = plant.lyapunov;
        RegionTag tag = classify(x, zeta, synth.eta, lyap);

        if (tag.in_S) {
            double wd = wdot_closed_loop(x, zeta, mu, u, plant, lyap);
            hit(wdot_neg, wd >= 0.0 ? wd + std::numeric_limits<double>::min() : wd);
            if (quantized && tag.in_S_tilde) {
                double r = std::fabs(cfg.kbar * zeta);
                if (r > dz_bound && r <= synth.u0)
                    hit(shat, wd - shat_required);
                else if (r <= dz_bound)
                    hit(dead, wd - dead_required);
            }
        }
        if (!quantized && tag.in_omega_outer && std::fabs(zeta) >= synth.eta) {
            double wd = wdot_closed_loop(x, zeta, mu, u, plant, lyap);
            hit(tern, wd - tern_required);
        }
        if (quantized) {
            bool member = krasowskii_membership(-u, zeta, cfg);
            hit(kras, member ? -1.0 : 1.0);
        }
        if (!entered && tag.W <= synth.sigma) entered = t;
        if (entered && t >= *entered)
            hit(practical, tag.W - synth.sigma * (1.0 + opts.sigma_overshoot_tol));
        return tag.W;
    }

    void finalize(Trajectory& traj) {
        if (!entered) {
            practical.checked = std::max(practical.checked, 1L);
            ++practical.violations;
            practical.detail = "never entered the target sublevel set";
        } else {
            traj.entered_sigma_at = entered;
            char buf[64];
            std::snprintf(buf, sizeof buf, "entered at t=%.6g", *entered);
            practical.detail = buf;
        }

        // dwell time between genuine switches (the initial engagement can sit
        // arbitrarily close to a guard, so it carries no dwell claim)
        double min_gap = std::numeric_limits<double>::infinity();
        const SwitchEvent* prev = nullptr;
        for (const auto& ev : traj.events) {
            if (ev.trigger.rfind("init", 0) == 0) continue;
            if (prev) min_gap = std::min(min_gap, ev.time - prev->time);
            prev = &ev;
        }
        traj.min_event_gap = std::isfinite(min_gap) ? min_gap : 0.0;
        if (quantized) {
            if (std::isfinite(min_gap)) {
                double required = synth.dt_min - 2.0 * traj.t_tol;
                hit(dwell, required - min_gap);
                char buf[96];
                std::snprintf(buf, sizeof buf, "min_gap=%.6g, bound=%.6g", min_gap, required);
                dwell.detail = buf;
            }
            double bound = synth.rate_bound_quantized;
            hit(rate, traj.rav_final - bound);
            char buf[96];
            std::snprintf(buf, sizeof buf, "rav_final=%.6g, bound=%.6g", traj.rav_final, bound);
            rate.detail = buf;
        } else {
            double bound = synth.rate_bound_ternary;
            hit(rate, traj.rav_final - bound);
            char buf[96];
            std::snprintf(buf, sizeof buf, "rav_final=%.6g, bound=%.6g", traj.rav_final, bound);
            rate.detail = buf;
        }

        traj.monitors.checks = {wdot_neg, practical, rate};
        if (quantized) {
            traj.monitors.checks.push_back(shat);
            traj.monitors.checks.push_back(dead);
            traj.monitors.checks.push_back(kras);
            traj.monitors.checks.push_back(dwell);
        } else {
            traj.monitors.checks.push_back(tern);
        }
    }
};

// --- shared run loop ------------------------------------------------------------

template <class Controller>
Trajectory run_loop(const PlantModel& plant, const SynthesisResult& synth,
                    std::span<const double> x0, double zeta0, std::span<const double> mu,
                    const SimOptions& opts, Controller& ctl, int bits, bool quantized) {
    plant.validate();
    const LyapunovSpec& lyap = plant.lyapunov;
    const int n = plant.dim_x;
    if (static_cast<int>(x0.size()) != n)
        fail(errc::invalid_argument, "run: x0 dimension mismatch");
    if (static_cast<int>(mu.size()) != plant.param_box.dim())
        fail(errc::invalid_argument, "run: mu dimension mismatch");
    for (int i = 0; i < plant.param_box.dim(); ++i)
        if (mu[i] < plant.param_box.lo[i] - 1e-12 || mu[i] > plant.param_box.hi[i] + 1e-12)
            fail(errc::invalid_argument, "run: mu outside the parameter box");
    if (!in_W_domain(x0, zeta0, lyap))
        fail(errc::invalid_argument, "run: initial condition outside the domain of W");
    if (eval_W(x0, zeta0, lyap) > lyap.outer_level() * (1.0 + 1e-12))
        fail(errc::invalid_argument,
             "run: initial condition outside the operating sublevel set (hypothesis violated)");
    if (!(opts.horizon > 0.0)) fail(errc::invalid_argument, "run: horizon must be positive");

    double h = opts.step;
    if (h <= 0.0) {
        double base = quantized
                          ? synth.dt_min
                          : 1.0 / (2.0 * (synth.bounds.q_bar / synth.eta +
                                          synth.bounds.b_bar * synth.k0));
        h = base / 20.0;
    }
    h = std::min(h, opts.horizon / 1000.0);
    if (!(h > 0.0)) fail(errc::invalid_argument, "run: nonpositive integration step");
    const double t_tol = h * std::pow(2.0, -20);

    Trajectory traj;
    traj.dim_x = n;
    traj.mu.assign(mu.begin(), mu.end());
    traj.horizon = opts.horizon;
    traj.step = h;
    traj.t_tol = t_tol;
    traj.bits_per_switch = bits;

    long stride = opts.sample_stride;
    if (stride <= 0) stride = std::max(1L, static_cast<long>(opts.horizon / h / 5000.0));

    std::vector<double> y(n + 1);
    std::copy(x0.begin(), x0.end(), y.begin());
    y[n] = zeta0;

    ctl.init(zeta0);
    double u = ctl.control();
    if (u != 0.0) traj.events.push_back({0.0, 0.0, u, "init:" + ctl.label()});

    RunMonitors mon(plant, synth, opts, quantized);

    long steps_since_record = 0;
    auto record = [&](double t, std::span<const double> yy, bool force) {
        double W = mon.observe(t, yy.first(n), yy[n], mu, u);
        if (force || steps_since_record >= stride) {
            steps_since_record = 0;
            traj.t.push_back(t);
            for (int i = 0; i < n; ++i) traj.x.push_back(yy[i]);
            traj.zeta.push_back(yy[n]);
            traj.u.push_back(u);
            traj.w.push_back(W);
        }
    };

    std::vector<double> g_ws(n);
    OdeRhs rhs = [&](double, std::span<const double> yy, std::span<double> dy) {
        auto xx = yy.first(n);
        double zeta = yy[n];
        plant.F(xx, mu, dy.first(n));
        plant.G(xx, mu, g_ws);
        for (int i = 0; i < n; ++i) dy[i] += g_ws[i] * zeta;
        dy[n] = plant.q(xx, zeta, mu) + plant.b(xx, zeta, mu) * u;
    };
    auto hold = [&](std::span<const double> yy) { return ctl.holds(yy[n]); };
    auto on_sample = [&](double t, std::span<const double> yy) {
        ++traj.total_steps;
        ++steps_since_record;
        record(t, yy, false);
    };

    double t = 0.0;
    try {
        record(0.0, y, true);
        while (t < opts.horizon) {
            bool crossed = integrate_until(rhs, y, t, opts.horizon, h, t_tol, hold, on_sample);
            if (!crossed) break;
            double old_u = u;
            std::string trig = ctl.transition(y[n]);
            u = ctl.control();
            if (u != old_u) traj.events.push_back({t, old_u, u, trig});
            record(t, y, true);
            if (static_cast<long>(traj.events.size()) > opts.max_events)
                fail(errc::internal, "run: event budget exceeded (switching did not settle)");
        }
    } catch (const error& e) {
        if (e.code() == errc::domain || e.code() == errc::range) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "run aborted at t=%.9g: ", t);
            fail(e.code(), buf + std::string(e.what()));
        }
        throw;
    }

    if constexpr (std::is_same_v<Controller, QuantizedController>)
        traj.hysteresis_jumps = ctl.jumps;

    auto [rav_final, series] = measure_rate(traj, bits, opts.rate_window_fraction);
    traj.rav_final = rav_final;
    traj.rav_series = std::move(series);

    if (!traj.events.empty()) {
        double last = traj.events.back().time;
        if (u == 0.0 && last <= 0.5 * opts.horizon) traj.switching_ceased_at = last;
    } else if (u == 0.0) {
        traj.switching_ceased_at = 0.0;
    }

    mon.finalize(traj);
    return traj;
}

} // namespace

Trajectory run_quantized(const PlantModel& plant, const SynthesisResult& synth,
                         std::span<const double> x0, double zeta0, std::span<const double> mu,
                         const SimOptions& opts) {
    QuantizedController ctl;
    ctl.cfg = QuantizerConfig{synth.u0, synth.delta, static_cast<int>(synth.j), synth.kbar};
    ctl.cfg.validate();
    int bits = static_cast<int>(4 * synth.j + 1);
    return run_loop(plant, synth, x0, zeta0, mu, opts, ctl, bits, true);
}

Trajectory run_ternary(const PlantModel& plant, const SynthesisResult& synth,
                       std::span<const double> x0, double zeta0, std::span<const double> mu,
                       const SimOptions& opts) {
    double required = (1.0 / synth.b0) * ((synth.d + 1.0) / synth.d) * synth.bounds.w_bar;
    if (synth.kbar_ternary < required * (1.0 - 1e-12))
        fail(errc::invalid_argument, "run_ternary: gain below (1/b0)((d+1)/d) w_bar");
    TernaryController ctl;
    ctl.kbar = synth.kbar_ternary;
    ctl.eta = synth.eta;
    return run_loop(plant, synth, x0, zeta0, mu, opts, ctl, 3, false);
}

std::pair<double, std::vector<std::pair<double, double>>> measure_rate(const Trajectory& traj,
                                                                       int bits_per_switch,
                                                                       double window_fraction) {
    if (!(traj.horizon > 0.0)) fail(errc::invalid_argument, "measure_rate: horizon must be positive");
    // merge recorded sample times with event times (both ascending)
    std::vector<double> times;
    times.reserve(traj.t.size() + traj.events.size());
    size_t i = 0, j = 0;
    while (i < traj.t.size() || j < traj.events.size()) {
        double next;
        if (j >= traj.events.size() || (i < traj.t.size() && traj.t[i] <= traj.events[j].time))
            next = traj.t[i++];
        else
            next = traj.events[j++].time;
        if (times.empty() || times.back() != next) times.push_back(next);
    }

    std::vector<std::pair<double, double>> series;
    series.reserve(times.size());
    size_t ei = 0;
    long count = 0;
    for (double tt : times) {
        while (ei < traj.events.size() && traj.events[ei].time <= tt) {
            ++count;
            ++ei;
        }
        if (tt > 0.0) series.push_back({tt, bits_per_switch * static_cast<double>(count) / tt});
    }
    double tail_start = (1.0 - window_fraction) * traj.horizon;
    double final_rate = 0.0;
    bool seen = false;
    for (const auto& [tt, rv] : series)
        if (tt >= tail_start) {
            final_rate = std::max(final_rate, rv);
            seen = true;
        }
    if (!seen && !series.empty()) final_rate = series.back().second;
    return {final_rate, series};
}

std::vector<std::pair<std::vector<double>, double>> boundary_shell_points(const PlantModel& plant,
                                                                          double shell_fraction,
                                                                          int count) {
    plant.validate();
    if (!(shell_fraction > 0.0 && shell_fraction <= 1.0))
        fail(errc::invalid_argument, "boundary_shell_points: shell fraction in (0,1]");
    const LyapunovSpec& lyap = plant.lyapunov;
    const int n = plant.dim_x;
    const int dims = n + 1;
    const double target = shell_fraction * lyap.outer_level();

    std::vector<std::pair<std::vector<double>, double>> out;
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17};
    for (int k = 0; k < count; ++k) {
        std::vector<double> dir(dims);
        if (dims == 2) {
            double th = 2.0 * M_PI * (k + 0.5) / count;
            dir[0] = std::cos(th);
            dir[1] = std::sin(th);
        } else {
            double norm = 0.0;
            for (int i = 0; i < dims; ++i) {
                dir[i] = 2.0 * halton(k + 1, primes[i % 7]) - 1.0;
                norm += dir[i] * dir[i];
            }
            norm = std::sqrt(norm);
            if (norm < 1e-9) {
                dir.assign(dims, 0.0);
                dir[k % dims] = 1.0;
                norm = 1.0;
            }
            for (double& v : dir) v /= norm;
        }
        // scale the direction until W crosses the target level
        auto below = [&](double s) {
            std::vector<double> x(n);
            for (int i = 0; i < n; ++i) x[i] = s * dir[i];
            double zeta = s * dir[n];
            if (!in_W_domain(x, zeta, lyap)) return false;
            return eval_W(x, zeta, lyap) < target;
        };
        double lo = 0.0, hi = 1e-3;
        while (below(hi)) {
            lo = hi;
            hi *= 1.5;
            if (hi > 1e9) fail(errc::internal, "boundary_shell_points: W never reaches the target");
        }
        for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
            double mid = 0.5 * (lo + hi);
            (below(mid) ? lo : hi) = mid;
        }
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = lo * dir[i];
        out.push_back({std::move(x), lo * dir[n]});
    }
    return out;
}

double largest_inscribed_cube(const PlantModel& plant) {
    const LyapunovSpec& lyap = plant.lyapunov;
    const int n = plant.dim_x;
    const double outer = lyap.outer_level();
    // corner-checked estimate; exact for V monotone in each |x_i|
    auto fits = [&](double R) {
        std::vector<double> x(n);
        for (unsigned mask = 0; mask < (1u << (n + 1)); ++mask) {
            for (int i = 0; i < n; ++i) x[i] = ((mask >> i) & 1u) ? R : -R;
            double zeta = ((mask >> n) & 1u) ? R : -R;
            if (!in_W_domain(x, zeta, lyap)) return false;
            if (eval_W(x, zeta, lyap) > outer) return false;
        }
        return true;
    };
    double lo = 0.0, hi = 1e-3;
    while (fits(hi)) {
        lo = hi;
        hi *= 1.5;
        if (hi > 1e9) break;
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (fits(mid) ? lo : hi) = mid;
    }
    return lo;
}

} // namespace qfs
