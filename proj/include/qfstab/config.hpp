#ifndef QFSTAB_CONFIG_HPP
#define QFSTAB_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qfstab/plants.hpp"
#include "qfstab/polynomial.hpp"
#include "qfstab/sampling.hpp"

namespace qfs {

enum class ControllerKind { StaticQuantized, HystereticQuantized, Ternary };

const char* controller_kind_name(ControllerKind k);
ControllerKind controller_kind_from_name(const std::string& name);

// Plant section: either a builtin name or declarative polynomial terms.
struct PlantConfig {
    std::string builtin; // empty for declarative plants
    int dim_x = 0;
    double b0 = 1.0;
    std::vector<double> mu_lo, mu_hi;
    std::vector<double> x_lo, x_hi;
    std::vector<Polynomial> F, G; // one per x dimension; must not reference zeta
    Polynomial q, b, V;

    bool operator==(const PlantConfig&) const = default;
};

struct InitialConfig {
    double shell = 0.98; // start points sit on W = shell * (c^2+d^2+1)
    int count = 9;
    bool mu_list = false;          // false: parameter-box corners + center
    std::vector<double> mu_values; // used when mu_list (1-D parameter boxes only)

    bool operator==(const InitialConfig&) const = default;
};

struct ExperimentConfig {
    ControllerKind controller = ControllerKind::HystereticQuantized;
    std::uint64_t seed = 1;
    double horizon = 10.0;
    std::string output_dir = "out";
    long sample_stride = 0; // 0 = auto

    double c = 1.0, d = 1.0;
    std::optional<double> sigma; // required

    bool has_quantizer = false; // [quantizer] section present
    double delta = 0.0;
    double gain_margin = 1.0;
    long level_margin = 0;

    SamplingPlan plan; // seed mirrored from the experiment section

    PlantConfig plant;
    InitialConfig initial;

    bool operator==(const ExperimentConfig&) const = default;

    bool quantized() const { return controller != ControllerKind::Ternary; }
};

// Strict INI-style parser: unknown sections or keys are config errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

// Instantiate the plant (builtin lookup or declarative assembly + validation).
PlantModel make_plant(const ExperimentConfig& cfg);

// Hash over the synthesis-relevant part of the config (lyapunov, quantizer,
// grid, plant); stored in synthesis files and checked before runs.
std::uint64_t config_synthesis_hash(const ExperimentConfig& cfg);

// Parameter draws for runs: box corners + center, or the explicit list.
std::vector<std::vector<double>> mu_sweep_values(const ExperimentConfig& cfg,
                                                 const PlantModel& plant);

} // namespace qfs

#endif
