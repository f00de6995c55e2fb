#ifndef QFSTAB_PLANTS_HPP
#define QFSTAB_PLANTS_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qfstab/errors.hpp"
#include "qfstab/lyapunov.hpp"

namespace qfs {

// Axis-aligned box, one [lo, hi] pair per dimension. May be zero-dimensional
// (a plant with no uncertain parameter).
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    void validate(const char* what) const;
    // Deterministic corner enumeration (lexicographic in dimension order)
    // followed by the center point.
    std::vector<std::vector<double>> corners_and_center() const;
};

// The controlled system
//   xdot    = F(x, mu) + G(x, mu) * zeta
//   zetadot = q(x, zeta, mu) + b(x, zeta, mu) * u
// with b >= b0 > 0 everywhere and mu constant in param_box.
struct PlantModel {
    std::string name;
    int dim_x = 0;
    std::function<void(std::span<const double> x, std::span<const double> mu, std::span<double> out)> F;
    std::function<void(std::span<const double> x, std::span<const double> mu, std::span<double> out)> G;
    std::function<double(std::span<const double> x, double zeta, std::span<const double> mu)> q;
    std::function<double(std::span<const double> x, double zeta, std::span<const double> mu)> b;
    double b0 = 1.0;
    Box param_box;
    Box x_box; // encloses the validity region {V <= c+1}
    LyapunovSpec lyapunov;

    void validate() const;
};

// Sampled sanity check of the stabilizability assumptions: gradV.F < 0 away
// from the origin on {V <= c+1} for all corner/center values of mu, plus
// F(0, mu) = 0 and b >= b0 on a coarse grid. Throws on failure.
void ulp_preflight(const PlantModel& plant, int samples_per_dim = 21);

// ---------------------------------------------------------------------------
// Normal form with uniform relative degree r:
//   zdot     = f(z, xi_1)
//   xidot_i  = xi_{i+1}          (1 <= i <= r-1)
//   xidot_r  = qbar(z, xi) + bbar(z, xi) * u
// stabilized through the chain feedback xi_r = -a.xi and the shifted
// coordinate zeta = a.xi + xi_r.
struct NormalFormPlant {
    std::string name;
    int dim_z = 0;
    int r = 1;
    std::vector<double> a; // length r-1; chain polynomial s^(r-1)+a_{r-1}s^(r-2)+...+a_1
    std::function<void(std::span<const double> z, double xi1, std::span<double> out)> f;
    std::function<double(std::span<const double> z, std::span<const double> xi)> q_bar;
    std::function<double(std::span<const double> z, std::span<const double> xi)> b_bar;
    double b0 = 1.0;
    Box x_box;
    LyapunovSpec lyapunov;

    void validate() const;
};

// Hurwitz test for s^(n) + c_{n-1} s^(n-1) + ... + c_0 via the Routh array.
// `coeffs` holds (c_0, ..., c_{n-1}); the leading coefficient is 1.
bool is_hurwitz(std::span<const double> coeffs);

// Rewrites the normal form in the shifted coordinates x = (z, xi_1..xi_{r-1}),
// zeta = a.xi + xi_r. Rejects a non-Hurwitz chain vector. For r = 1 the shift
// is the identity relabeling zeta = xi_1 and f must be affine in xi_1 (the
// target form is affine in zeta); affinity is checked numerically.
PlantModel normal_form_to_plant(const NormalFormPlant& nf);

// ---------------------------------------------------------------------------
// Built-in examples.

// Scalar demo: xdot = -x + zeta, zetadot = mu*zeta + u, mu in [0.5, 1.5],
// b = 1, V = x^2, c = d = 1.
PlantModel builtin_demo_plant(double sigma = 0.05);

// Same plant with q = 0 (drift-free zeta subsystem).
PlantModel builtin_demo_qzero_plant(double sigma = 0.05);

// The r = 2 chain zdot = -z + xi1, xidot1 = xi2, xidot2 = u with a = [1],
// converted through normal_form_to_plant. V = z^2 + xi1^2, c = d = 1.
NormalFormPlant builtin_chain2_normal_form(double sigma = 0.05);
PlantModel builtin_chain2_plant(double sigma = 0.05);

// Lookup by name ("demo", "demo_qzero", "chain2"); throws config error on
// unknown names.
PlantModel builtin_plant(const std::string& name, double sigma);
std::vector<std::string> builtin_plant_names();

} // namespace qfs

#endif
