#ifndef QFSTAB_SELFTEST_HPP
#define QFSTAB_SELFTEST_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qfstab/quantizer.hpp"

namespace qfs {

// Module-level property checks, runnable without any plant simulation.
// The individual predicates are exposed so tests can run them against
// deliberately mutated fixtures.

struct SelfTestCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SelfTestReport {
    std::vector<SelfTestCheck> checks;
    bool all_pass() const;
    std::string to_text() const;
};

// |Psi(r) - r| <= delta_bound * |r| on the quantized range, dense sampling.
bool selftest_sector(const QuantizerConfig& cfg, double delta_bound, int samples,
                     std::string* detail = nullptr);
// Psi(-r) == -Psi(r), exactly.
bool selftest_odd_symmetry(const QuantizerConfig& cfg, int samples, std::string* detail = nullptr);
// Psi == 0 on [0, u_j/(1+delta)].
bool selftest_deadzone(const QuantizerConfig& cfg, int samples, std::string* detail = nullptr);
// kbar PsiBar(zeta) == Psi(kbar zeta) on the admissible range.
bool selftest_scaled_equivalence(const QuantizerConfig& cfg, int samples,
                                 std::string* detail = nullptr);
// Psi(kbar zeta) always lies in the Krasowskii set.
bool selftest_krasowskii_of_psi(const QuantizerConfig& cfg, int samples,
                                std::string* detail = nullptr);
// One hysteresis transition per directed guard crossing under a sine sweep.
bool selftest_no_chatter(const QuantizerConfig& cfg, int periods, int steps_per_period,
                         std::string* detail = nullptr);
// k_star(1-delta) == k0 across sampled parameter combinations.
bool selftest_gain_identity(std::uint64_t seed, int trials, std::string* detail = nullptr);
// Level dwell bounds decrease in i and end at dt_min.
bool selftest_dwell_monotone(std::string* detail = nullptr);
// Exact derivative of W vs central finite differences on the demo plant.
bool selftest_gradient(std::uint64_t seed, int points, double rel_tol,
                       std::string* detail = nullptr);

SelfTestReport run_selftest(std::uint64_t seed = 1);

} // namespace qfs

#endif
