#include "qfstab/plants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qfs {

void Box::validate(const char* what) const {
    if (lo.size() != hi.size())
        fail(errc::invalid_argument, std::string(what) + ": box lo/hi size mismatch");
    for (size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i])) fail(errc::invalid_argument, std::string(what) + ": box has lo > hi");
}

std::vector<std::vector<double>> Box::corners_and_center() const {
    int n = dim();
    if (n > 16) fail(errc::invalid_argument, "box: corner enumeration limited to 16 dimensions");
    std::vector<std::vector<double>> pts;
    if (n == 0) {
        pts.push_back({});
        return pts;
    }
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<double> p(n);
        for (int i = 0; i < n; ++i) p[i] = (mask >> i) & 1u ? hi[i] : lo[i];
        pts.push_back(std::move(p));
    }
    std::vector<double> center(n);
    for (int i = 0; i < n; ++i) center[i] = 0.5 * (lo[i] + hi[i]);
    bool dup = std::find(pts.begin(), pts.end(), center) != pts.end();
    if (!dup) pts.push_back(std::move(center));
    return pts;
}

void PlantModel::validate() const {
    if (dim_x < 0) fail(errc::invalid_argument, "plant: dim_x must be >= 0");
    if (!F || !G || !q || !b) fail(errc::invalid_argument, "plant: F, G, q, b must all be set");
    if (!(b0 > 0.0)) fail(errc::invalid_argument, "plant: b0 must be positive");
    param_box.validate("plant.param_box");
    x_box.validate("plant.x_box");
    if (x_box.dim() != dim_x) fail(errc::invalid_argument, "plant: x_box dimension != dim_x");
    lyapunov.validate();
}

void ulp_preflight(const PlantModel& plant, int samples_per_dim) {
    plant.validate();
    const int n = plant.dim_x;
    // keep the grid around 2e5 points for high-dimensional plants
    if (n > 0) {
        int cap = std::max(3, static_cast<int>(std::floor(std::pow(2e5, 1.0 / n))));
        samples_per_dim = std::min(samples_per_dim, cap);
    }
    const auto mus = plant.param_box.corners_and_center();
    std::vector<double> x(n), f(n), grad(n);

    for (const auto& mu : mus) {
        std::fill(x.begin(), x.end(), 0.0);
        plant.F(x, mu, f);
        for (int i = 0; i < n; ++i)
            if (std::fabs(f[i]) > 1e-12)
                fail(errc::invalid_argument, "plant '" + plant.name + "': F(0, mu) != 0");
    }

    long total = 1;
    for (int i = 0; i < n; ++i) total *= samples_per_dim;
    const double zeta_extent = std::sqrt(plant.lyapunov.d + 1.0);
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        double sup = 0.0;
        for (int i = 0; i < n; ++i) {
            int k = static_cast<int>(rem % samples_per_dim);
            rem /= samples_per_dim;
            x[i] = plant.x_box.lo[i] +
                   (plant.x_box.hi[i] - plant.x_box.lo[i]) * k / double(samples_per_dim - 1);
            sup = std::max(sup, std::fabs(x[i]));
        }
        if (plant.lyapunov.V(x) > plant.lyapunov.c + 1.0) continue;
        for (const auto& mu : mus) {
            if (sup > 1e-9) {
                plant.F(x, mu, f);
                plant.lyapunov.gradV(x, grad);
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += grad[i] * f[i];
                if (!(dot < 0.0)) {
                    char buf[128];
                    std::snprintf(buf, sizeof buf, "gradV.F = %.6g >= 0 at a sampled point", dot);
                    fail(errc::invalid_argument,
                         "plant '" + plant.name + "' fails the stability precheck: " + buf);
                }
            }
            for (int kz = 0; kz < 5; ++kz) {
                double zeta = -zeta_extent + 2.0 * zeta_extent * kz / 4.0;
                zeta *= 0.999; // stay strictly inside the domain of W
                if (plant.b(x, zeta, mu) < plant.b0 - 1e-12)
                    fail(errc::invalid_argument,
                         "plant '" + plant.name + "': b(x,zeta,mu) < b0 at a sampled point");
            }
        }
    }
}

// --- normal form --------------------------------------------------------------

bool is_hurwitz(std::span<const double> coeffs) {
    const int n = static_cast<int>(coeffs.size()); // degree of the monic polynomial
    if (n == 0) return true;
    for (double ci : coeffs)
        if (!(ci > 0.0)) return false; // positivity is necessary
    // a[k] = coefficient of s^(n-k); a[0] = 1
    std::vector<double> a(n + 1);
    a[0] = 1.0;
    for (int i = 1; i <= n; ++i) a[i] = coeffs[n - i];
    size_t width = static_cast<size_t>(n) / 2 + 2;
    std::vector<double> r0(width, 0.0), r1(width, 0.0);
    for (int i = 0; i <= n; i += 2) r0[i / 2] = a[i];
    for (int i = 1; i <= n; i += 2) r1[(i - 1) / 2] = a[i];
    if (!(r0[0] > 0.0) || !(r1[0] > 0.0)) return false;
    for (int row = 2; row <= n; ++row) {
        std::vector<double> r2(width, 0.0);
        if (r1[0] == 0.0) return false;
        for (size_t k = 0; k + 1 < width; ++k) r2[k] = (r1[0] * r0[k + 1] - r0[0] * r1[k + 1]) / r1[0];
        if (!(r2[0] > 0.0)) return false;
        r0 = r1;
        r1 = r2;
    }
    return true;
}

void NormalFormPlant::validate() const {
    if (dim_z < 0) fail(errc::invalid_argument, "normal form: dim_z must be >= 0");
    if (r < 1) fail(errc::invalid_argument, "normal form: relative degree must be >= 1");
    if (static_cast<int>(a.size()) != r - 1)
        fail(errc::invalid_argument, "normal form: a must have length r-1");
    if (!f || !q_bar || !b_bar) fail(errc::invalid_argument, "normal form: f, q_bar, b_bar must be set");
    if (!(b0 > 0.0)) fail(errc::invalid_argument, "normal form: b0 must be positive");
    if (!is_hurwitz(a))
        fail(errc::invalid_argument,
             "normal form '" + name + "': chain vector a is not Hurwitz");
}

PlantModel normal_form_to_plant(const NormalFormPlant& nf) {
    nf.validate();
    const int nz = nf.dim_z;
    const int nxi = nf.r - 1;
    const int nx = nz + nxi;

    PlantModel p;
    p.name = nf.name;
    p.dim_x = nx;
    p.b0 = nf.b0;
    p.x_box = nf.x_box;
    p.lyapunov = nf.lyapunov;

    auto a = nf.a;
    auto fz = nf.f;
    auto qb = nf.q_bar;
    auto bb = nf.b_bar;

    if (nf.r == 1) {
        // zeta = xi_1; the z-dynamics must be affine in it. Split numerically
        // and verify affinity at the box corners.
        auto corners = nf.x_box.corners_and_center();
        std::vector<double> f0(nz), f1(nz), f2(nz);
        for (const auto& z : corners) {
            fz(z, 0.0, f0);
            fz(z, 1.0, f1);
            fz(z, 2.0, f2);
            for (int i = 0; i < nz; ++i) {
                double d10 = f1[i] - f0[i], d21 = f2[i] - f1[i];
                if (std::fabs(d21 - d10) > 1e-9 * std::max(1.0, std::fabs(d10)))
                    fail(errc::invalid_argument,
                         "normal form '" + nf.name + "': f is not affine in xi_1 (required for r=1)");
            }
        }
        p.F = [fz, nz](std::span<const double> x, std::span<const double>, std::span<double> out) {
            fz(x.first(nz), 0.0, out);
        };
        p.G = [fz, nz](std::span<const double> x, std::span<const double>, std::span<double> out) {
            std::vector<double> f0(nz);
            fz(x.first(nz), 0.0, f0);
            fz(x.first(nz), 1.0, out);
            for (int i = 0; i < nz; ++i) out[i] -= f0[i];
        };
        p.q = [qb, nz](std::span<const double> x, double zeta, std::span<const double>) {
            std::vector<double> xi{zeta};
            return qb(x.first(nz), xi);
        };
        p.b = [bb, nz](std::span<const double> x, double zeta, std::span<const double>) {
            std::vector<double> xi{zeta};
            return bb(x.first(nz), xi);
        };
        return p;
    }

    // r >= 2: x = (z, xi_1..xi_{r-1}), zeta = a.xi + xi_r.
    p.F = [fz, a, nz, nxi](std::span<const double> x, std::span<const double>, std::span<double> out) {
        auto z = x.first(nz);
        auto xi = x.subspan(nz, nxi);
        fz(z, xi[0], out.first(nz));
        for (int i = 0; i + 1 < nxi; ++i) out[nz + i] = xi[i + 1];
        double axi = 0.0;
        for (int i = 0; i < nxi; ++i) axi += a[i] * xi[i];
        out[nz + nxi - 1] = -axi;
    };
    p.G = [nz, nxi](std::span<const double>, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        out[nz + nxi - 1] = 1.0;
    };
    // zetadot = a.xidot + xidot_r; the shift contributes
    //   sum_{i<r-1} a_i xi_{i+1} + a_{r-1} (-a.xi + zeta)
    // and qbar, bbar are evaluated at xi_r = zeta - a.xi.
    auto full_xi = [a, nz, nxi](std::span<const double> x, double zeta) {
        std::vector<double> xi(nxi + 1);
        double axi = 0.0;
        for (int i = 0; i < nxi; ++i) {
            xi[i] = x[nz + i];
            axi += a[i] * x[nz + i];
        }
        xi[nxi] = zeta - axi;
        return xi;
    };
    p.q = [qb, a, full_xi, nz, nxi](std::span<const double> x, double zeta,
                                    std::span<const double>) {
        auto xi = full_xi(x, zeta);
        double drift = 0.0;
        for (int i = 0; i + 1 < nxi; ++i) drift += a[i] * xi[i + 1];
        double axi = 0.0;
        for (int i = 0; i < nxi; ++i) axi += a[i] * xi[i];
        drift += a[nxi - 1] * (-axi + zeta);
        return drift + qb(x.first(nz), std::span<const double>(xi.data(), xi.size()));
    };
    p.b = [bb, full_xi, nz](std::span<const double> x, double zeta, std::span<const double>) {
        auto xi = full_xi(x, zeta);
        return bb(x.first(nz), std::span<const double>(xi.data(), xi.size()));
    };
    return p;
}

// --- built-ins ----------------------------------------------------------------

namespace {

LyapunovSpec quadratic_lyapunov(int dim, double sigma) {
    LyapunovSpec lyap;
    lyap.c = 1.0;
    lyap.d = 1.0;
    lyap.sigma = sigma;
    lyap.V = [dim](std::span<const double> x) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += x[i] * x[i];
        return s;
    };
    lyap.gradV = [dim](std::span<const double> x, std::span<double> out) {
        for (int i = 0; i < dim; ++i) out[i] = 2.0 * x[i];
    };
    return lyap;
}

PlantModel make_demo(double sigma, bool with_drift) {
    PlantModel p;
    p.name = with_drift ? "demo" : "demo_qzero";
    p.dim_x = 1;
    p.F = [](std::span<const double> x, std::span<const double>, std::span<double> out) {
        out[0] = -x[0];
    };
    p.G = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        out[0] = 1.0;
    };
    if (with_drift)
        p.q = [](std::span<const double>, double zeta, std::span<const double> mu) {
            return mu[0] * zeta;
        };
    else
        p.q = [](std::span<const double>, double, std::span<const double>) { return 0.0; };
    p.b = [](std::span<const double>, double, std::span<const double>) { return 1.0; };
    p.b0 = 1.0;
    p.param_box = {{0.5}, {1.5}};
    double ext = std::sqrt(2.0);
    p.x_box = {{-ext}, {ext}};
    p.lyapunov = quadratic_lyapunov(1, sigma);
    return p;
}

} // namespace

PlantModel builtin_demo_plant(double sigma) { return make_demo(sigma, true); }

PlantModel builtin_demo_qzero_plant(double sigma) { return make_demo(sigma, false); }

NormalFormPlant builtin_chain2_normal_form(double sigma) {
    NormalFormPlant nf;
    nf.name = "chain2";
    nf.dim_z = 1;
    nf.r = 2;
    nf.a = {1.0};
    nf.f = [](std::span<const double> z, double xi1, std::span<double> out) {
        out[0] = -z[0] + xi1;
    };
    nf.q_bar = [](std::span<const double>, std::span<const double>) { return 0.0; };
    nf.b_bar = [](std::span<const double>, std::span<const double>) { return 1.0; };
    nf.b0 = 1.0;
    double ext = std::sqrt(2.0);
    nf.x_box = {{-ext, -ext}, {ext, ext}};
    nf.lyapunov = quadratic_lyapunov(2, sigma);
    return nf;
}

PlantModel builtin_chain2_plant(double sigma) {
    return normal_form_to_plant(builtin_chain2_normal_form(sigma));
}

PlantModel builtin_plant(const std::string& name, double sigma) {
    if (name == "demo") return builtin_demo_plant(sigma);
    if (name == "demo_qzero") return builtin_demo_qzero_plant(sigma);
    if (name == "chain2") return builtin_chain2_plant(sigma);
    fail(errc::config, "unknown builtin plant '" + name + "'");
}

std::vector<std::string> builtin_plant_names() { return {"demo", "demo_qzero", "chain2"}; }

} // namespace qfs
