#include "qfstab/quantizer.hpp"

#include <cmath>
#include <cstdio>

namespace qfs {

double QuantizerConfig::level(int i) const {
    return u0 * std::pow(rho(), i);
}

double QuantizerConfig::deadzone_bound() const {
    return level(j) / (1.0 + delta);
}

void QuantizerConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0))
        fail(errc::invalid_argument, "quantizer: delta must lie in (0,1)");
    if (!(u0 > 0.0))
        fail(errc::invalid_argument, "quantizer: u0 must be positive");
    if (j < 0)
        fail(errc::invalid_argument, "quantizer: j must be nonnegative");
    if (!(kbar > 0.0))
        fail(errc::invalid_argument, "quantizer: kbar must be positive");
}

namespace {

[[noreturn]] void range_fail(double r, const QuantizerConfig& cfg) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "quantizer: |r|=%.17g exceeds designed range u0/(1-delta)=%.17g", std::fabs(r),
                  cfg.input_limit());
    fail(errc::range, buf);
}

// Index of the level interval containing r > 0, or -1 for the deadzone.
// Interval i is (u_i/(1+delta), upper_i] with upper_i the next boundary up;
// scanning the strictly decreasing boundaries u_i/(1+delta) from i = 0 makes
// the tiling exact.
int positive_interval_index(double r, const QuantizerConfig& cfg) {
    for (int i = 0; i <= cfg.j; ++i) {
        if (r > cfg.level(i) / (1.0 + cfg.delta)) return i;
    }
    return -1;
}

} // namespace

double psi(double r, const QuantizerConfig& cfg) {
    if (r < 0.0) return -psi(-r, cfg);
    if (!(r <= cfg.input_limit())) range_fail(r, cfg); // also rejects NaN
    int i = positive_interval_index(r, cfg);
    return i < 0 ? 0.0 : cfg.level(i);
}

bool psi_bar_equivalent(double zeta, const QuantizerConfig& cfg, double rel_tol) {
    QuantizerConfig scaled = cfg;
    scaled.u0 = cfg.u0 / cfg.kbar;
    double lhs = cfg.kbar * psi(zeta, scaled);
    double rhs = psi(cfg.kbar * zeta, cfg);
    if (lhs == rhs) return true;
    double scale = std::max(std::fabs(lhs), std::fabs(rhs));
    return std::fabs(lhs - rhs) <= rel_tol * scale;
}

// --- hysteretic quantizer ---------------------------------------------------

namespace {

// Chain ordinal: 0 = Zero, positive side counts up toward +L0 = 2j+2,
// negative side mirrored. Adjacent ordinals are adjacent nodes.
int node_ordinal(const HysteresisState& s, const QuantizerConfig& cfg) {
    switch (s.kind) {
    case HysteresisNodeKind::Zero: return 0;
    case HysteresisNodeKind::PlusLevel: return 2 * (cfg.j - s.index) + 2;
    case HysteresisNodeKind::PlusHalf: return 2 * (cfg.j - s.index) + 1;
    case HysteresisNodeKind::MinusLevel: return -(2 * (cfg.j - s.index) + 2);
    case HysteresisNodeKind::MinusHalf: return -(2 * (cfg.j - s.index) + 1);
    }
    fail(errc::internal, "hysteresis: bad node kind");
}

HysteresisState node_from_ordinal(int p, const QuantizerConfig& cfg) {
    if (p == 0) return {HysteresisNodeKind::Zero, 0};
    int a = std::abs(p);
    bool level = (a % 2) == 0;
    int index = level ? cfg.j - (a - 2) / 2 : cfg.j - (a - 1) / 2;
    if (p > 0)
        return {level ? HysteresisNodeKind::PlusLevel : HysteresisNodeKind::PlusHalf, index};
    return {level ? HysteresisNodeKind::MinusLevel : HysteresisNodeKind::MinusHalf, index};
}

void positive_interval(HysteresisNodeKind kind, int i, const QuantizerConfig& cfg, double& lo,
                       double& hi) {
    double lo_level = cfg.level(i) / (1.0 + cfg.delta);
    if (kind == HysteresisNodeKind::PlusLevel) {
        lo = lo_level;
        hi = i == 0 ? cfg.input_limit() : cfg.level(i - 1) / (1.0 + cfg.delta);
    } else { // PlusHalf
        lo = lo_level / (1.0 + cfg.delta);
        hi = lo_level / (1.0 - cfg.delta);
    }
}

} // namespace

double hysteresis_output(const HysteresisState& s, const QuantizerConfig& cfg) {
    switch (s.kind) {
    case HysteresisNodeKind::Zero: return 0.0;
    case HysteresisNodeKind::PlusLevel: return cfg.level(s.index);
    case HysteresisNodeKind::PlusHalf: return cfg.level(s.index) / (1.0 + cfg.delta);
    case HysteresisNodeKind::MinusLevel: return -cfg.level(s.index);
    case HysteresisNodeKind::MinusHalf: return -cfg.level(s.index) / (1.0 + cfg.delta);
    }
    fail(errc::internal, "hysteresis: bad node kind");
}

void hysteresis_interval(const HysteresisState& s, const QuantizerConfig& cfg, double& lo,
                         double& hi) {
    switch (s.kind) {
    case HysteresisNodeKind::Zero:
        hi = cfg.deadzone_bound();
        lo = -hi;
        return;
    case HysteresisNodeKind::PlusLevel:
    case HysteresisNodeKind::PlusHalf:
        positive_interval(s.kind, s.index, cfg, lo, hi);
        return;
    case HysteresisNodeKind::MinusLevel: {
        double plo, phi;
        positive_interval(HysteresisNodeKind::PlusLevel, s.index, cfg, plo, phi);
        lo = -phi;
        hi = -plo;
        return;
    }
    case HysteresisNodeKind::MinusHalf: {
        double plo, phi;
        positive_interval(HysteresisNodeKind::PlusHalf, s.index, cfg, plo, phi);
        lo = -phi;
        hi = -plo;
        return;
    }
    }
    fail(errc::internal, "hysteresis: bad node kind");
}

bool hysteresis_contains(const HysteresisState& s, double r, const QuantizerConfig& cfg) {
    double lo, hi;
    hysteresis_interval(s, cfg, lo, hi);
    switch (s.kind) {
    case HysteresisNodeKind::Zero: return lo <= r && r <= hi;
    case HysteresisNodeKind::PlusLevel:
    case HysteresisNodeKind::PlusHalf: return lo < r && r <= hi;
    case HysteresisNodeKind::MinusLevel:
    case HysteresisNodeKind::MinusHalf: return lo <= r && r < hi;
    }
    fail(errc::internal, "hysteresis: bad node kind");
}

HysteresisState hysteresis_init(double r, const QuantizerConfig& cfg) {
    if (!(std::fabs(r) <= cfg.input_limit())) range_fail(r, cfg);
    bool neg = r < 0.0;
    int i = positive_interval_index(neg ? -r : r, cfg);
    if (i < 0) return {HysteresisNodeKind::Zero, 0};
    return {neg ? HysteresisNodeKind::MinusLevel : HysteresisNodeKind::PlusLevel, i};
}

HysteresisState hysteresis_step(const HysteresisState& s, double r, const QuantizerConfig& cfg,
                                HysteresisStepInfo* info) {
    if (info) *info = {};
    if (!(std::fabs(r) <= cfg.input_limit())) range_fail(r, cfg);
    if (hysteresis_contains(s, r, cfg)) return s;

    double lo, hi;
    hysteresis_interval(s, cfg, lo, hi);
    int dir = r > lo ? +1 : -1; // r is outside [lo,hi]: above hi or at/below lo
    HysteresisState next = node_from_ordinal(node_ordinal(s, cfg) + dir, cfg);
    if (hysteresis_contains(next, r, cfg)) {
        if (info) info->transitioned = true;
        return next;
    }
    // r moved past the adjacent node within one sample: fall back to the
    // static quantizer and report the jump.
    if (info) {
        info->transitioned = true;
        info->reinitialized = true;
    }
    return hysteresis_init(r, cfg);
}

std::string hysteresis_node_name(const HysteresisState& s) {
    switch (s.kind) {
    case HysteresisNodeKind::Zero: return "0";
    case HysteresisNodeKind::PlusLevel: return "+L" + std::to_string(s.index);
    case HysteresisNodeKind::PlusHalf: return "+H" + std::to_string(s.index);
    case HysteresisNodeKind::MinusLevel: return "-L" + std::to_string(s.index);
    case HysteresisNodeKind::MinusHalf: return "-H" + std::to_string(s.index);
    }
    return "?";
}

// --- ternary controller -----------------------------------------------------

TernaryState ternary_init(double zeta, double eta, double kbar) {
    if (!(eta > 0.0)) fail(errc::invalid_argument, "ternary: eta must be positive");
    if (!(kbar > 0.0)) fail(errc::invalid_argument, "ternary: kbar must be positive");
    TernaryState s;
    s.eta = eta;
    if (zeta >= eta)
        s.output = -kbar;
    else if (zeta <= -eta)
        s.output = kbar;
    else
        s.output = 0.0;
    return s;
}

namespace {

void ternary_check(const TernaryState& s, double kbar) {
    if (s.output != 0.0 && s.output != kbar && s.output != -kbar)
        fail(errc::internal, "ternary: state output is not one of {-kbar, 0, +kbar}");
    if (!(s.eta > 0.0)) fail(errc::internal, "ternary: state eta must be positive");
}

} // namespace

TernaryState ternary_step(const TernaryState& s, double zeta, double kbar) {
    ternary_check(s, kbar);
    TernaryState next = s;
    if (s.output == 0.0) {
        bool go_minus = zeta >= s.eta;
        bool go_plus = zeta <= -s.eta;
        if (go_minus && go_plus) fail(errc::internal, "ternary: conflicting guards");
        if (go_minus)
            next.output = -kbar;
        else if (go_plus)
            next.output = kbar;
    } else if (s.output < 0.0) { // -kbar
        if (zeta <= s.eta / 2.0) next.output = 0.0;
    } else { // +kbar
        if (zeta >= -s.eta / 2.0) next.output = 0.0;
    }
    return next;
}

bool ternary_holds(const TernaryState& s, double zeta) {
    if (s.output == 0.0) return std::fabs(zeta) < s.eta;
    if (s.output < 0.0) return zeta > s.eta / 2.0;
    return zeta < -s.eta / 2.0;
}

// --- Krasowskii inclusion ----------------------------------------------------

bool krasowskii_membership(double v, double zeta, const QuantizerConfig& cfg) {
    double s = cfg.kbar * zeta;
    if (std::fabs(s) <= cfg.deadzone_bound()) {
        double top = (1.0 + cfg.delta) * s;
        return s >= 0.0 ? (0.0 <= v && v <= top) : (top <= v && v <= 0.0);
    }
    return std::fabs(v - s) <= cfg.delta * std::fabs(s);
}

} // namespace qfs
