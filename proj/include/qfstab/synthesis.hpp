#ifndef QFSTAB_SYNTHESIS_HPP
#define QFSTAB_SYNTHESIS_HPP

#include <cstdint>
#include <string>

#include "qfstab/plants.hpp"
#include "qfstab/sampling.hpp"

namespace qfs {

// Sampled maxima over the operating set, inflated by the plan's safety
// factor. All four are upper-bound estimates of the corresponding exact
// maxima; max_grad_vf additionally records max |gradV.F| for the eta search.
struct BoundEstimates {
    double w_bar = 0.0;
    double b_bar = 0.0;
    double zeta_bar = 0.0;
    double q_bar = 0.0;
    double max_grad_vf = 0.0;
    long sample_count = 0;
    double safety_factor = 1.0;

    bool operator==(const BoundEstimates&) const = default;
};

struct SynthesisResult {
    // inputs
    double delta = 0.0;
    double gain_margin = 1.0;
    long level_margin = 0;
    double c = 1.0, d = 1.0, sigma = 0.0, b0 = 0.0;
    // estimation stage
    BoundEstimates bounds;
    double eta = 0.0;
    double zeta_tilde = 0.0; // safety-scaled max |zeta| over S with |zeta| >= eta
    // closed forms
    double k_star = 0.0, k0 = 0.0;
    long j_star = 0;
    double kbar = 0.0;
    long j = 0;
    double u0 = 0.0;
    double dt_min = 0.0;
    double rate_bound_quantized = 0.0;
    double rate_bound_ternary = 0.0;
    double kbar_ternary = 0.0; // (1/b0)((d+1)/d) w_bar
    // diagnostics
    bool s_hat_inside_s_tilde = false; // deadzone reaches past |zeta| = eta
    bool j_raised_to_one = false;
    std::uint64_t seed = 1;
    std::uint64_t config_hash = 0; // filled by the experiment layer

    bool operator==(const SynthesisResult&) const = default;
    double rho() const { return (1.0 - delta) / (1.0 + delta); }
};

BoundEstimates estimate_bounds(const PlantModel& plant, const SampleSet& samples,
                               const SamplingPlan& plan);

// Largest eta on the halving ladder below the zeta-extent of S such that
// (c/(c+1)) gradV.F + w*zeta stays below -margin on every sampled point of S
// with |zeta| <= eta, for the sample's own mu and all box corners/center.
double estimate_eta(const PlantModel& plant, const BoundEstimates& bounds,
                    const SampleSet& samples, const SamplingPlan& plan);

struct Gains {
    double k_star = 0.0;
    long j_star = 0;
    double k0 = 0.0;
};

Gains compute_gains(double delta, const BoundEstimates& bounds, double eta, double b0, double c,
                    double d);

struct DwellRates {
    double dt_min = 0.0;
    double rate_bound_quantized = 0.0;
    double rate_bound_ternary = 0.0;
};

// For q_bar = 0 the dwell bound degenerates gracefully; otherwise j >= 1 is
// required (the level-j term carries rho^(j-1)).
DwellRates compute_dwell_and_rates(const BoundEstimates& bounds, double k0, double delta, long j,
                                   double eta);

// Lower bound on the time the control holds level u_i once entered.
// Monotonically decreasing in i; its value at i = j equals dt_min.
double per_level_dwell_bound(const BoundEstimates& bounds, double k0, double delta, int i);

// Full pipeline: bound estimation, eta search, gains, dwell/rate bounds.
SynthesisResult synthesize(const PlantModel& plant, double delta, const SamplingPlan& plan,
                           double gain_margin = 1.0, long level_margin = 0);

// Human-readable key = value serialization; load() round-trips exactly.
std::string synthesis_to_text(const SynthesisResult& s);
SynthesisResult synthesis_from_text(const std::string& text);
void save_synthesis(const SynthesisResult& s, const std::string& path);
SynthesisResult load_synthesis(const std::string& path);

// Derivation trace: every constant with the formula inputs that produced it.
std::string synthesis_derivation(const SynthesisResult& s);

} // namespace qfs

#endif
