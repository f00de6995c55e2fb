#ifndef QFSTAB_QUANTIZER_HPP
#define QFSTAB_QUANTIZER_HPP

#include <string>

#include "qfstab/errors.hpp"

namespace qfs {

// Logarithmic quantizer parameters. Levels are u_i = rho^i * u0 with
// rho = (1-delta)/(1+delta); the map is designed for |r| <= u0/(1-delta)
// and deliberately undefined beyond that (see psi).
struct QuantizerConfig {
    double u0 = 1.0;    // coarsest level
    double delta = 0.5; // density parameter, in (0,1)
    int j = 0;          // finest level index; levels u_0..u_j
    double kbar = 1.0;  // controller gain applied to zeta

    double rho() const { return (1.0 - delta) / (1.0 + delta); }
    double level(int i) const;
    double input_limit() const { return u0 / (1.0 - delta); }
    double deadzone_bound() const; // u_j/(1+delta)
    void validate() const;
};

// Static quantizer: returns u_i on (u_i/(1+delta), u_i/(1-delta)], 0 on the
// deadzone [0, u_j/(1+delta)], odd-mirrored for r < 0. Lower interval bounds
// are strict, upper bounds inclusive. All interval boundaries are derived
// from the single family u_i/(1+delta) so adjacent intervals tile without
// floating-point cracks. Throws a range error for |r| > u0/(1-delta): the
// synthesized u0 guarantees that bound is never exceeded in closed loop, so
// exceeding it means the configuration was not synthesized for this input.
double psi(double r, const QuantizerConfig& cfg);

// Checks kbar * PsiBar(zeta) == Psi(kbar * zeta) where PsiBar quantizes over
// the rescaled levels u_i/kbar. Holds everywhere by construction; kept as an
// executable self-test predicate.
bool psi_bar_equivalent(double zeta, const QuantizerConfig& cfg, double rel_tol = 1e-12);

// ---------------------------------------------------------------------------
// Hysteretic multi-valued quantizer.
//
// The selection automaton is a chain of nodes ordered by output value,
//   +L0 +H0 +L1 +H1 ... +Lj +Hj 0 -Hj -Lj ... -H0 -L0
// where Li outputs u_i and Hi outputs u_i/(1+delta). A node holds while the
// input stays inside its validity interval; leaving the interval moves to
// the adjacent node on that side. Adjacent intervals overlap, which is what
// rules out chattering.

enum class HysteresisNodeKind { Zero, PlusLevel, PlusHalf, MinusLevel, MinusHalf };

struct HysteresisState {
    HysteresisNodeKind kind = HysteresisNodeKind::Zero;
    int index = 0; // level index for Level/Half nodes, unused for Zero

    bool operator==(const HysteresisState&) const = default;
};

struct HysteresisStepInfo {
    bool transitioned = false;
    bool reinitialized = false; // input jumped past more than one guard
};

double hysteresis_output(const HysteresisState& s, const QuantizerConfig& cfg);

// Validity interval of a node. Positive nodes are (lo, hi], negative nodes
// [lo, hi), Zero is closed on both sides.
void hysteresis_interval(const HysteresisState& s, const QuantizerConfig& cfg,
                         double& lo, double& hi);
bool hysteresis_contains(const HysteresisState& s, double r, const QuantizerConfig& cfg);

// Initial node: the one whose output equals psi(r).
HysteresisState hysteresis_init(double r, const QuantizerConfig& cfg);

// Advance by one sampled input. If r is still inside the current node's
// interval the state is returned unchanged. If r left the interval, the
// state moves to the adjacent node in that direction; should r have jumped
// past the adjacent node too (caller violated input continuity), the state
// is re-initialized from psi(r) and the jump is flagged in `info`.
HysteresisState hysteresis_step(const HysteresisState& s, double r, const QuantizerConfig& cfg,
                                HysteresisStepInfo* info = nullptr);

std::string hysteresis_node_name(const HysteresisState& s);

// ---------------------------------------------------------------------------
// Ternary controller with thresholds eta (engage) and eta/2 (release).

struct TernaryState {
    double output = 0.0; // exactly one of {-kbar, 0, +kbar}
    double eta = 0.0;

    bool operator==(const TernaryState&) const = default;
};

TernaryState ternary_init(double zeta, double eta, double kbar);
TernaryState ternary_step(const TernaryState& s, double zeta, double kbar);
// Hold region of the current output (complement of all exit guards).
bool ternary_holds(const TernaryState& s, double zeta);

// ---------------------------------------------------------------------------
// Membership of a control value v in the Krasowskii set K(Psi(kbar*zeta)):
// outside the deadzone |v - kbar*zeta| <= delta*|kbar*zeta|, inside it v
// lies between 0 and (1+delta)*kbar*zeta (both inclusive).
bool krasowskii_membership(double v, double zeta, const QuantizerConfig& cfg);

} // namespace qfs

#endif
