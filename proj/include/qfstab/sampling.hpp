#ifndef QFSTAB_SAMPLING_HPP
#define QFSTAB_SAMPLING_HPP

#include <cstdint>
#include <vector>

#include "qfstab/plants.hpp"

namespace qfs {

// Deterministic sampling plan for the compact-set maximizations. The same
// (seed, samples) pair always yields the same point set, and growing
// `samples` with a fixed seed extends the set (max estimates never shrink
// under refinement).
struct SamplingPlan {
    long samples = 20000;
    double safety_factor = 1.1;
    std::uint64_t seed = 1;
    double eta_margin_fraction = 0.01; // margin as a fraction of max |gradV.F|
    int eta_max_halvings = 20;
    long eta_min_region_samples = 50; // candidate levels this thin are rejected

    bool operator==(const SamplingPlan&) const = default;
    void validate() const;
};

// Low-discrepancy radical-inverse sequence.
double halton(std::uint64_t index, int base);

struct SamplePoint {
    std::vector<double> x;
    double zeta = 0.0;
    std::vector<double> mu;
    double W = 0.0;
};

// Points of the enclosing box kept by rejection to the operating sublevel
// set {W <= c^2+d^2+1}, each paired with a parameter draw from the box.
struct SampleSet {
    std::vector<SamplePoint> points;
    long requested = 0;
    std::uint64_t seed = 1;
};

SampleSet draw_samples(const PlantModel& plant, const SamplingPlan& plan);

} // namespace qfs

#endif
