#include "qfstab/sampling.hpp"

#include <cmath>

#include "qfstab/lyapunov.hpp"

namespace qfs {

void SamplingPlan::validate() const {
    if (samples <= 0) fail(errc::invalid_argument, "sampling: samples must be positive");
    if (!(safety_factor >= 1.0)) fail(errc::invalid_argument, "sampling: safety_factor must be >= 1");
    if (!(eta_margin_fraction > 0.0 && eta_margin_fraction < 1.0))
        fail(errc::invalid_argument, "sampling: eta_margin_fraction must lie in (0,1)");
    if (eta_max_halvings < 1) fail(errc::invalid_argument, "sampling: eta_max_halvings must be >= 1");
    if (seed < 1) fail(errc::invalid_argument, "sampling: seed must be >= 1");
}

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

SampleSet draw_samples(const PlantModel& plant, const SamplingPlan& plan) {
    plan.validate();
    plant.validate();
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43};
    const int nx = plant.dim_x;
    const int nmu = plant.param_box.dim();
    const int dims = nx + 1 + nmu;
    if (dims > static_cast<int>(sizeof primes / sizeof *primes))
        fail(errc::invalid_argument, "sampling: too many dimensions");

    const LyapunovSpec& lyap = plant.lyapunov;
    const double outer = lyap.outer_level();
    const double zeta_extent = std::sqrt(lyap.d + 1.0);

    SampleSet set;
    set.requested = plan.samples;
    set.seed = plan.seed;
    set.points.reserve(plan.samples);

    // The seed offsets the start of the sequence; a fixed seed with a larger
    // sample count extends the same point set.
    const std::uint64_t start = 1 + (plan.seed - 1) * static_cast<std::uint64_t>(plan.samples);
    std::vector<double> x(nx), mu(nmu);
    for (long k = 0; k < plan.samples; ++k) {
        const std::uint64_t idx = start + static_cast<std::uint64_t>(k);
        int dim = 0;
        for (int i = 0; i < nx; ++i, ++dim)
            x[i] = plant.x_box.lo[i] + (plant.x_box.hi[i] - plant.x_box.lo[i]) * halton(idx, primes[dim]);
        double zeta = -zeta_extent + 2.0 * zeta_extent * halton(idx, primes[dim]);
        ++dim;
        for (int i = 0; i < nmu; ++i, ++dim)
            mu[i] = plant.param_box.lo[i] +
                    (plant.param_box.hi[i] - plant.param_box.lo[i]) * halton(idx, primes[dim]);

        if (!in_W_domain(x, zeta, lyap)) continue;
        double W = eval_W(x, zeta, lyap);
        if (W > outer) continue;
        set.points.push_back({x, zeta, mu, W});
    }
    if (set.points.empty())
        fail(errc::config, "sampling: no points of the enclosing box fall inside the operating set");
    return set;
}

} // namespace qfs
