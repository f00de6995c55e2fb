#ifndef QFSTAB_EXPERIMENT_HPP
#define QFSTAB_EXPERIMENT_HPP

#include <limits>
#include <string>

#include "qfstab/config.hpp"
#include "qfstab/selftest.hpp"
#include "qfstab/simulator.hpp"
#include "qfstab/synthesis.hpp"

namespace qfs {

// Aggregate over one or more runs (the sweep summary).
struct SweepStats {
    long runs = 0;
    long monitor_failures = 0;
    double min_dwell = std::numeric_limits<double>::infinity();
    double max_rav = 0.0;
    double max_entry_time = 0.0;
    long never_entered = 0;
    long switching_ceased = 0;
    double latest_ceased_at = 0.0;
    long hysteresis_jumps = 0;
};

// Fixed per-run file names inside each run directory.
inline constexpr const char* kSamplesFile = "samples.tsv";
inline constexpr const char* kEventsFile = "events.tsv";
inline constexpr const char* kRateFile = "rate.tsv";
inline constexpr const char* kMonitorsFile = "monitors.txt";
inline constexpr const char* kSynthesisFile = "synthesis.txt";
inline constexpr const char* kDerivationFile = "derivation.txt";
inline constexpr const char* kSummaryFile = "summary.txt";

std::string run_dir_name(int ic_index, int mu_index);

// Synthesize from a config and write synthesis.txt + derivation.txt under the
// config's output directory. Returns the result (config_hash filled in).
SynthesisResult cmd_synthesize(const ExperimentConfig& cfg);

// Verifies the synthesis file belongs to this config, then executes one run
// (ic_index into the shell grid, mu_index into the parameter sweep) and
// writes its files. Returns false iff a runtime monitor failed.
bool cmd_run(const ExperimentConfig& cfg, const std::string& synthesis_path, int ic_index,
             int mu_index, SweepStats* stats = nullptr);

// All initial conditions x all parameter draws; writes per-run directories
// plus summary.txt. Returns false iff any monitor failed.
bool cmd_sweep(const ExperimentConfig& cfg, const std::string& synthesis_path, SweepStats* stats);

// Executes one run in memory (no files); shared by cmd_run/cmd_sweep.
Trajectory execute_run(const ExperimentConfig& cfg, const PlantModel& plant,
                       const SynthesisResult& synth, std::span<const double> x0, double zeta0,
                       std::span<const double> mu);

void write_trajectory_files(const Trajectory& traj, const std::string& dir);
std::string summary_text(const SweepStats& stats, const SynthesisResult& synth);

} // namespace qfs

#endif
