#include "qfstab/synthesis.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "qfstab/lyapunov.hpp"

namespace qfs {

BoundEstimates estimate_bounds(const PlantModel& plant, const SampleSet& samples,
                               const SamplingPlan& plan) {
    if (samples.points.empty()) fail(errc::config, "estimate_bounds: empty sample set");
    const LyapunovSpec& lyap = plant.lyapunov;
    const int n = plant.dim_x;
    std::vector<double> grad(n), f(n);

    BoundEstimates est;
    est.sample_count = static_cast<long>(samples.points.size());
    est.safety_factor = plan.safety_factor;
    for (const SamplePoint& p : samples.points) {
        double w = coupling_w(p.x, p.zeta, p.mu, plant, lyap);
        double bval = plant.b(p.x, p.zeta, p.mu);
        double qval = plant.q(p.x, p.zeta, p.mu);
        if (bval < plant.b0 - 1e-12)
            fail(errc::synthesis, "estimate_bounds: b(x,zeta,mu) < b0 at a sampled point");
        lyap.gradV(p.x, grad);
        plant.F(p.x, p.mu, f);
        double gvf = 0.0;
        for (int i = 0; i < n; ++i) gvf += grad[i] * f[i];
        est.w_bar = std::max(est.w_bar, std::fabs(w));
        est.b_bar = std::max(est.b_bar, std::fabs(bval));
        est.zeta_bar = std::max(est.zeta_bar, std::fabs(p.zeta));
        est.q_bar = std::max(est.q_bar, std::fabs(qval));
        est.max_grad_vf = std::max(est.max_grad_vf, std::fabs(gvf));
    }
    est.w_bar *= plan.safety_factor;
    est.b_bar *= plan.safety_factor;
    est.zeta_bar *= plan.safety_factor;
    est.q_bar *= plan.safety_factor;
    return est;
}

double estimate_eta(const PlantModel& plant, const BoundEstimates& bounds,
                    const SampleSet& samples, const SamplingPlan& plan) {
    const LyapunovSpec& lyap = plant.lyapunov;
    const double margin = plan.eta_margin_fraction * bounds.max_grad_vf;
    if (!(margin > 0.0))
        fail(errc::synthesis,
             "estimate_eta: gradV.F vanishes on the operating set; the zero-input subsystem is "
             "not certifiably decreasing");

    double zeta_extent = 0.0;
    for (const SamplePoint& p : samples.points)
        if (p.W >= lyap.sigma) zeta_extent = std::max(zeta_extent, std::fabs(p.zeta));
    if (!(zeta_extent > 0.0)) fail(errc::synthesis, "estimate_eta: S contains no sampled points");

    const auto extra_mus = plant.param_box.corners_and_center();
    const int n = plant.dim_x;
    std::vector<double> grad(n), f(n);

    auto decrease_at = [&](const SamplePoint& p, std::span<const double> mu) {
        lyap.gradV(p.x, grad);
        plant.F(p.x, mu, f);
        double gvf = 0.0;
        for (int i = 0; i < n; ++i) gvf += grad[i] * f[i];
        return lyap.c / (lyap.c + 1.0) * gvf + coupling_w(p.x, p.zeta, mu, plant, lyap) * p.zeta;
    };

    for (int k = 1; k <= plan.eta_max_halvings; ++k) {
        const double cand = zeta_extent / std::pow(2.0, k);
        long count = 0;
        bool ok = true;
        for (const SamplePoint& p : samples.points) {
            if (p.W < lyap.sigma) continue;
            if (std::fabs(p.zeta) > cand) continue;
            ++count;
            if (decrease_at(p, p.mu) > -margin) {
                ok = false;
                break;
            }
            for (const auto& mu : extra_mus) {
                if (decrease_at(p, mu) > -margin) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok && count >= plan.eta_min_region_samples) return cand;
    }
    fail(errc::synthesis,
         "estimate_eta: no eta on the halving ladder keeps the zero-input decrease below the "
         "margin (the plant may not satisfy the uniform Lyapunov property, or the margin "
         "fraction is too strict)");
}

Gains compute_gains(double delta, const BoundEstimates& bounds, double eta, double b0, double c,
                    double d) {
    if (!(delta > 0.0 && delta < 1.0)) fail(errc::invalid_argument, "compute_gains: delta in (0,1)");
    if (!(eta > 0.0) || !(b0 > 0.0) || !(bounds.w_bar > 0.0) || !(bounds.b_bar > 0.0))
        fail(errc::invalid_argument, "compute_gains: inputs must be positive");
    Gains g;
    g.k0 = (d + 1.0) / d * (bounds.w_bar / b0) / eta;
    g.k_star = g.k0 / (1.0 - delta);
    double outer_plus_d = c * c + d * d + d + 1.0;
    double arg = (d * d / (outer_plus_d * outer_plus_d)) * (eta / 4.0) * (b0 / bounds.b_bar);
    double rho = (1.0 - delta) / (1.0 + delta);
    double ratio = std::log(arg) / std::log(rho);
    g.j_star = std::max(0L, static_cast<long>(std::ceil(ratio)));
    return g;
}

double per_level_dwell_bound(const BoundEstimates& bounds, double k0, double delta, int i) {
    double rho = (1.0 - delta) / (1.0 + delta);
    double num = bounds.zeta_bar * std::pow(rho, i) * delta / (1.0 - delta);
    double den = bounds.q_bar + k0 * bounds.b_bar * bounds.zeta_bar * std::pow(rho, i - 1);
    return num / den;
}

DwellRates compute_dwell_and_rates(const BoundEstimates& bounds, double k0, double delta, long j,
                                   double eta) {
    if (!(delta > 0.0 && delta < 1.0))
        fail(errc::invalid_argument, "compute_dwell_and_rates: delta in (0,1)");
    if (!(k0 > 0.0) || !(bounds.b_bar > 0.0) || !(eta > 0.0))
        fail(errc::invalid_argument, "compute_dwell_and_rates: inputs must be positive");
    DwellRates r;
    double rho = (1.0 - delta) / (1.0 + delta);
    double factor = delta / (1.0 + delta);
    if (bounds.q_bar == 0.0) {
        r.dt_min = factor / (k0 * bounds.b_bar);
    } else {
        if (j < 1)
            fail(errc::invalid_argument,
                 "compute_dwell_and_rates: j must be >= 1 when q_bar > 0 (the level-j dwell "
                 "bound carries rho^(j-1))");
        if (!(bounds.zeta_bar > 0.0))
            fail(errc::invalid_argument, "compute_dwell_and_rates: zeta_bar must be positive");
        r.dt_min =
            factor / (bounds.q_bar / (bounds.zeta_bar * std::pow(rho, j - 1)) + k0 * bounds.b_bar);
    }
    r.rate_bound_quantized = (4.0 * static_cast<double>(j) + 1.0) / r.dt_min;
    r.rate_bound_ternary = 6.0 * (bounds.q_bar / eta + bounds.b_bar * k0);
    return r;
}

SynthesisResult synthesize(const PlantModel& plant, double delta, const SamplingPlan& plan,
                           double gain_margin, long level_margin) {
    if (!(delta > 0.0 && delta < 1.0)) fail(errc::invalid_argument, "synthesize: delta in (0,1)");
    if (!(gain_margin >= 1.0))
        fail(errc::invalid_argument, "synthesize: gain_margin must be >= 1 (kbar >= k_star)");
    if (level_margin < 0) fail(errc::invalid_argument, "synthesize: level_margin must be >= 0");
    ulp_preflight(plant);

    const LyapunovSpec& lyap = plant.lyapunov;
    SampleSet samples = draw_samples(plant, plan);
    BoundEstimates bounds = estimate_bounds(plant, samples, plan);
    double eta = estimate_eta(plant, bounds, samples, plan);
    Gains gains = compute_gains(delta, bounds, eta, plant.b0, lyap.c, lyap.d);

    SynthesisResult s;
    s.delta = delta;
    s.gain_margin = gain_margin;
    s.level_margin = level_margin;
    s.c = lyap.c;
    s.d = lyap.d;
    s.sigma = lyap.sigma;
    s.b0 = plant.b0;
    s.bounds = bounds;
    s.eta = eta;
    s.k_star = gains.k_star;
    s.k0 = gains.k0;
    s.j_star = gains.j_star;
    s.kbar = gain_margin * gains.k_star;
    s.j = gains.j_star + level_margin;
    if (bounds.q_bar > 0.0 && s.j == 0) {
        s.j = 1;
        s.j_raised_to_one = true;
    }

    double zt = 0.0;
    for (const SamplePoint& p : samples.points)
        if (p.W >= lyap.sigma && std::fabs(p.zeta) >= eta) zt = std::max(zt, std::fabs(p.zeta));
    if (!(zt > 0.0))
        fail(errc::synthesis, "synthesize: no sampled points with |zeta| >= eta inside S");
    s.zeta_tilde = zt * plan.safety_factor;
    s.u0 = (1.0 + delta) * s.kbar * s.zeta_tilde;

    DwellRates dw = compute_dwell_and_rates(bounds, s.kbar * (1.0 - delta), delta, s.j, eta);
    s.dt_min = dw.dt_min;
    s.rate_bound_quantized = dw.rate_bound_quantized;
    s.rate_bound_ternary = dw.rate_bound_ternary;
    s.kbar_ternary = (1.0 / plant.b0) * ((lyap.d + 1.0) / lyap.d) * bounds.w_bar;
    s.s_hat_inside_s_tilde = s.u0 * std::pow(s.rho(), s.j) / (1.0 + delta) >= s.kbar * eta;
    s.seed = plan.seed;
    return s;
}

// --- serialization -----------------------------------------------------------

namespace {

constexpr const char* kHeader = "qfstab-synthesis v1";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Emitter {
    std::ostringstream out;
    void num(const char* key, double v) { out << key << " = " << fmt_double(v) << "\n"; }
    void integer(const char* key, long long v) { out << key << " = " << v << "\n"; }
    void uinteger(const char* key, unsigned long long v) { out << key << " = " << v << "\n"; }
};

} // namespace

std::string synthesis_to_text(const SynthesisResult& s) {
    Emitter e;
    e.out << kHeader << "\n";
    e.num("delta", s.delta);
    e.num("gain_margin", s.gain_margin);
    e.integer("level_margin", s.level_margin);
    e.num("c", s.c);
    e.num("d", s.d);
    e.num("sigma", s.sigma);
    e.num("b0", s.b0);
    e.num("w_bar", s.bounds.w_bar);
    e.num("b_bar", s.bounds.b_bar);
    e.num("zeta_bar", s.bounds.zeta_bar);
    e.num("q_bar", s.bounds.q_bar);
    e.num("max_grad_vf", s.bounds.max_grad_vf);
    e.integer("sample_count", s.bounds.sample_count);
    e.num("safety_factor", s.bounds.safety_factor);
    e.num("eta", s.eta);
    e.num("zeta_tilde", s.zeta_tilde);
    e.num("k_star", s.k_star);
    e.num("k0", s.k0);
    e.integer("j_star", s.j_star);
    e.num("kbar", s.kbar);
    e.integer("j", s.j);
    e.num("u0", s.u0);
    e.num("dt_min", s.dt_min);
    e.num("rate_bound_quantized", s.rate_bound_quantized);
    e.num("rate_bound_ternary", s.rate_bound_ternary);
    e.num("kbar_ternary", s.kbar_ternary);
    e.integer("s_hat_inside_s_tilde", s.s_hat_inside_s_tilde ? 1 : 0);
    e.integer("j_raised_to_one", s.j_raised_to_one ? 1 : 0);
    e.uinteger("seed", s.seed);
    e.uinteger("config_hash", s.config_hash);
    return e.out.str();
}

SynthesisResult synthesis_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        fail(errc::io, "synthesis file: missing or unrecognized header");
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(errc::io, "synthesis file: malformed line '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& t) {
            t.erase(0, t.find_first_not_of(" \t"));
            t.erase(t.find_last_not_of(" \t") + 1);
        };
        trim(key);
        trim(val);
        kv[key] = val;
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) fail(errc::io, std::string("synthesis file: missing key '") + key + "'");
        return it->second;
    };
    auto num = [&](const char* key) { return std::strtod(need(key).c_str(), nullptr); };
    auto integer = [&](const char* key) { return std::strtol(need(key).c_str(), nullptr, 10); };
    auto uinteger = [&](const char* key) { return std::strtoull(need(key).c_str(), nullptr, 10); };

    SynthesisResult s;
    s.delta = num("delta");
    s.gain_margin = num("gain_margin");
    s.level_margin = integer("level_margin");
    s.c = num("c");
    s.d = num("d");
    s.sigma = num("sigma");
    s.b0 = num("b0");
    s.bounds.w_bar = num("w_bar");
    s.bounds.b_bar = num("b_bar");
    s.bounds.zeta_bar = num("zeta_bar");
    s.bounds.q_bar = num("q_bar");
    s.bounds.max_grad_vf = num("max_grad_vf");
    s.bounds.sample_count = integer("sample_count");
    s.bounds.safety_factor = num("safety_factor");
    s.eta = num("eta");
    s.zeta_tilde = num("zeta_tilde");
    s.k_star = num("k_star");
    s.k0 = num("k0");
    s.j_star = integer("j_star");
    s.kbar = num("kbar");
    s.j = integer("j");
    s.u0 = num("u0");
    s.dt_min = num("dt_min");
    s.rate_bound_quantized = num("rate_bound_quantized");
    s.rate_bound_ternary = num("rate_bound_ternary");
    s.kbar_ternary = num("kbar_ternary");
    s.s_hat_inside_s_tilde = integer("s_hat_inside_s_tilde") != 0;
    s.j_raised_to_one = integer("j_raised_to_one") != 0;
    s.seed = uinteger("seed");
    s.config_hash = uinteger("config_hash");
    return s;
}

void save_synthesis(const SynthesisResult& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(errc::io, "cannot open '" + path + "' for writing");
    out << synthesis_to_text(s);
    if (!out) fail(errc::io, "write failed for '" + path + "'");
}

SynthesisResult load_synthesis(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io, "cannot open synthesis file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return synthesis_from_text(buf.str());
}

std::string synthesis_derivation(const SynthesisResult& s) {
    std::ostringstream o;
    char buf[512];
    o << "derivation of the synthesized constants\n";
    o << "---------------------------------------\n";
    std::snprintf(buf, sizeof buf,
                  "operating set bounds (sampled maxima x safety %.3g over %ld points, seed %llu):\n"
                  "  w_bar = %.10g   b_bar = %.10g   zeta_bar = %.10g   q_bar = %.10g\n",
                  s.bounds.safety_factor, s.bounds.sample_count,
                  static_cast<unsigned long long>(s.seed), s.bounds.w_bar, s.bounds.b_bar,
                  s.bounds.zeta_bar, s.bounds.q_bar);
    o << buf;
    std::snprintf(buf, sizeof buf,
                  "eta = %.10g  (largest ladder value with certified zero-input decrease)\n", s.eta);
    o << buf;
    std::snprintf(buf, sizeof buf,
                  "k0     = (d+1)/d * w_bar/b0 / eta = (%.3g/%.3g) * (%.10g/%.10g) / %.10g = %.10g\n",
                  s.d + 1.0, s.d, s.bounds.w_bar, s.b0, s.eta, s.k0);
    o << buf;
    std::snprintf(buf, sizeof buf, "k_star = k0/(1-delta) = %.10g/(1-%.10g) = %.10g\n", s.k0,
                  s.delta, s.k_star);
    o << buf;
    double outer_plus_d = s.c * s.c + s.d * s.d + s.d + 1.0;
    double arg = (s.d * s.d / (outer_plus_d * outer_plus_d)) * (s.eta / 4.0) * (s.b0 / s.bounds.b_bar);
    std::snprintf(buf, sizeof buf,
                  "j_star = ceil(log(%.10g)/log(rho)) = %ld   (rho = %.10g)%s\n", arg, s.j_star,
                  s.rho(), s.j_raised_to_one ? "  [j raised to 1: q_bar > 0]" : "");
    o << buf;
    std::snprintf(buf, sizeof buf, "kbar = gain_margin * k_star = %.10g * %.10g = %.10g\n",
                  s.gain_margin, s.k_star, s.kbar);
    o << buf;
    std::snprintf(buf, sizeof buf, "j = j_star + level_margin = %ld + %ld = %ld\n", s.j_star,
                  s.level_margin, s.j);
    o << buf;
    std::snprintf(buf, sizeof buf,
                  "u0 = (1+delta) * kbar * zeta_tilde = (1+%.10g) * %.10g * %.10g = %.10g\n",
                  s.delta, s.kbar, s.zeta_tilde, s.u0);
    o << buf;
    std::snprintf(buf, sizeof buf,
                  "dt_min = [delta/(1+delta)] / (q_bar/(zeta_bar*rho^(j-1)) + kbar(1-delta)*b_bar) "
                  "= %.10g\n",
                  s.dt_min);
    o << buf;
    std::snprintf(buf, sizeof buf, "rate bound (quantized) = (4j+1)/dt_min = %ld values -> %.10g\n",
                  4 * s.j + 1, s.rate_bound_quantized);
    o << buf;
    std::snprintf(buf, sizeof buf,
                  "rate bound (ternary)  = 6(q_bar/eta + b_bar*k0) = %.10g\n", s.rate_bound_ternary);
    o << buf;
    std::snprintf(buf, sizeof buf, "ternary gain = (1/b0)((d+1)/d) w_bar = %.10g\n", s.kbar_ternary);
    o << buf;
    if (!s.s_hat_inside_s_tilde)
        o << "note: the quantizer deadzone ends below |zeta| = eta (S_hat extends into U); the\n"
             "      deadzone decrease case is vacuous along trajectories that stay in S_tilde.\n";
    return o.str();
}

} // namespace qfs
