#ifndef QFSTAB_LYAPUNOV_HPP
#define QFSTAB_LYAPUNOV_HPP

#include <functional>
#include <span>
#include <vector>

#include "qfstab/errors.hpp"

namespace qfs {

struct PlantModel; // plants.hpp

// Composite Lyapunov data: a user-supplied V with analytic gradient plus the
// shaping constants. W(x, zeta) = c V/(c+1-V) + d zeta^2/(d+1-zeta^2) on the
// open domain V < c+1, zeta^2 < d+1.
struct LyapunovSpec {
    std::function<double(std::span<const double>)> V;
    std::function<void(std::span<const double>, std::span<double>)> gradV;
    double c = 1.0;
    double d = 1.0;
    double sigma = 0.05; // target sublevel

    double outer_level() const { return c * c + d * d + 1.0; }
    void validate() const;
};

// Region membership of a point, relative to the sets used throughout:
// Omega_sigma (target), S (shell between sigma and the outer level), its
// small-|zeta| part U, the remainder S_tilde, and the eta-split of the outer
// sublevel set into Omega_-/Omega_0/Omega_+.
struct RegionTag {
    double W = 0.0;
    bool inside_sigma = false; // W < sigma
    bool in_S = false;         // sigma <= W <= outer (boundary W = sigma included)
    bool in_U = false;         // in_S and |zeta| < eta
    bool in_S_tilde = false;   // in_S and |zeta| >= eta
    bool outside = false;      // W > outer
    bool in_omega_outer = false;
    bool omega_minus = false; // W <= outer and zeta >= eta
    bool omega_zero = false;  // W <= outer and |zeta| < eta
    bool omega_plus = false;  // W <= outer and zeta <= -eta
};

// Throws a domain error when (x, zeta) is outside the domain of W.
double eval_W(std::span<const double> x, double zeta, const LyapunovSpec& spec);

// True iff the point is strictly inside W's domain (no throw).
bool in_W_domain(std::span<const double> x, double zeta, const LyapunovSpec& spec);

RegionTag classify(std::span<const double> x, double zeta, double eta, const LyapunovSpec& spec);

// Coupling coefficient of the zeta-cross terms in the derivative of W:
//   w = c(c+1)/(c+1-V)^2 * gradV.G + 2 d(d+1)/(d+1-zeta^2)^2 * q
double coupling_w(std::span<const double> x, double zeta, std::span<const double> mu,
                  const PlantModel& plant, const LyapunovSpec& spec);

// Exact derivative of W along the closed-loop field with control value v:
//   dW/dt = c(c+1)/(c+1-V)^2 * gradV.(F + G zeta)
//         + 2 d(d+1) zeta/(d+1-zeta^2)^2 * (q + b v)
double wdot_closed_loop(std::span<const double> x, double zeta, std::span<const double> mu,
                        double v, const PlantModel& plant, const LyapunovSpec& spec);

} // namespace qfs

#endif
