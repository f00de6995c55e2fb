#include "qfstab/lyapunov.hpp"

#include <cmath>
#include <cstdio>

#include "qfstab/plants.hpp"

namespace qfs {

void LyapunovSpec::validate() const {
    if (!V || !gradV) fail(errc::invalid_argument, "lyapunov: V and gradV must be set");
    if (!(c >= 1.0)) fail(errc::invalid_argument, "lyapunov: c must be >= 1");
    if (!(d >= 1.0)) fail(errc::invalid_argument, "lyapunov: d must be >= 1");
    if (!(sigma > 0.0 && sigma < outer_level()))
        fail(errc::invalid_argument, "lyapunov: sigma must lie in (0, c^2+d^2+1)");
}

namespace {

[[noreturn]] void domain_fail(double V, double zeta, const LyapunovSpec& spec) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "lyapunov: point outside domain of W (V=%.6g needs < %.6g, zeta^2=%.6g needs < "
                  "%.6g)",
                  V, spec.c + 1.0, zeta * zeta, spec.d + 1.0);
    fail(errc::domain, buf);
}

} // namespace

bool in_W_domain(std::span<const double> x, double zeta, const LyapunovSpec& spec) {
    return spec.V(x) < spec.c + 1.0 && zeta * zeta < spec.d + 1.0;
}

double eval_W(std::span<const double> x, double zeta, const LyapunovSpec& spec) {
    double V = spec.V(x);
    double z2 = zeta * zeta;
    if (!(V < spec.c + 1.0) || !(z2 < spec.d + 1.0)) domain_fail(V, zeta, spec);
    return spec.c * V / (spec.c + 1.0 - V) + spec.d * z2 / (spec.d + 1.0 - z2);
}

RegionTag classify(std::span<const double> x, double zeta, double eta, const LyapunovSpec& spec) {
    if (!(eta > 0.0)) fail(errc::invalid_argument, "classify: eta must be positive");
    RegionTag tag;
    tag.W = eval_W(x, zeta, spec);
    double outer = spec.outer_level();
    tag.outside = tag.W > outer;
    tag.inside_sigma = tag.W < spec.sigma;
    tag.in_S = !tag.outside && !tag.inside_sigma; // sigma <= W <= outer
    tag.in_U = tag.in_S && std::fabs(zeta) < eta;
    tag.in_S_tilde = tag.in_S && !tag.in_U;
    tag.in_omega_outer = !tag.outside;
    tag.omega_minus = tag.in_omega_outer && zeta >= eta;
    tag.omega_plus = tag.in_omega_outer && zeta <= -eta;
    tag.omega_zero = tag.in_omega_outer && std::fabs(zeta) < eta;
    return tag;
}

namespace {

struct Weights {
    double wx; // c(c+1)/(c+1-V)^2
    double wz; // d(d+1)/(d+1-zeta^2)^2
};

Weights weights_at(std::span<const double> x, double zeta, const LyapunovSpec& spec) {
    double V = spec.V(x);
    double z2 = zeta * zeta;
    if (!(V < spec.c + 1.0) || !(z2 < spec.d + 1.0)) domain_fail(V, zeta, spec);
    double ax = spec.c + 1.0 - V;
    double az = spec.d + 1.0 - z2;
    return {spec.c * (spec.c + 1.0) / (ax * ax), spec.d * (spec.d + 1.0) / (az * az)};
}

} // namespace

double coupling_w(std::span<const double> x, double zeta, std::span<const double> mu,
                  const PlantModel& plant, const LyapunovSpec& spec) {
    Weights wt = weights_at(x, zeta, spec);
    thread_local std::vector<double> grad, g;
    grad.resize(plant.dim_x);
    g.resize(plant.dim_x);
    spec.gradV(x, grad);
    plant.G(x, mu, g);
    double grad_dot_G = 0.0;
    for (int i = 0; i < plant.dim_x; ++i) grad_dot_G += grad[i] * g[i];
    return wt.wx * grad_dot_G + 2.0 * wt.wz * plant.q(x, zeta, mu);
}

double wdot_closed_loop(std::span<const double> x, double zeta, std::span<const double> mu,
                        double v, const PlantModel& plant, const LyapunovSpec& spec) {
    Weights wt = weights_at(x, zeta, spec);
    thread_local std::vector<double> grad, f, g;
    grad.resize(plant.dim_x);
    f.resize(plant.dim_x);
    g.resize(plant.dim_x);
    spec.gradV(x, grad);
    plant.F(x, mu, f);
    plant.G(x, mu, g);
    double grad_dot_flow = 0.0;
    for (int i = 0; i < plant.dim_x; ++i) grad_dot_flow += grad[i] * (f[i] + g[i] * zeta);
    double zetadot = plant.q(x, zeta, mu) + plant.b(x, zeta, mu) * v;
    return wt.wx * grad_dot_flow + 2.0 * wt.wz * zeta * zetadot;
}

} // namespace qfs
