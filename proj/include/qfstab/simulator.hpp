#ifndef QFSTAB_SIMULATOR_HPP
#define QFSTAB_SIMULATOR_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfstab/plants.hpp"
#include "qfstab/quantizer.hpp"
#include "qfstab/synthesis.hpp"

namespace qfs {

struct SimOptions {
    double horizon = 10.0;
    double step = 0.0;            // 0: derived from the dwell-time bound (dt/20)
    long sample_stride = 0;       // 0: aim for ~5000 recorded samples
    double margin_tolerance = 0.05;       // slack on the quantitative decrease margins
    double sigma_overshoot_tol = 1e-3;    // allowed relative overshoot after entering the target
    double rate_window_fraction = 0.25;   // final fraction of the horizon used as limsup proxy
    long max_events = 10000000;
};

struct SwitchEvent {
    double time = 0.0;
    double old_value = 0.0;
    double new_value = 0.0;
    std::string trigger;
};

struct MonitorCheck {
    std::string name;
    long checked = 0;
    long violations = 0;
    double worst = 0.0; // most adverse signed margin seen (> 0 means violated)
    std::string detail;

    bool vacuous() const { return checked == 0; }
    bool pass() const { return violations == 0; }
};

struct MonitorReport {
    std::vector<MonitorCheck> checks;

    bool all_pass() const;
    const MonitorCheck* find(const std::string& name) const;
    std::string to_text() const;
};

struct Trajectory {
    int dim_x = 0;
    // recorded samples (decimated by sample_stride; events always recorded)
    std::vector<double> t, zeta, u, w;
    std::vector<double> x; // dim_x entries per sample
    std::vector<SwitchEvent> events;
    std::vector<std::pair<double, double>> rav_series; // (t, R_av[0,t])
    double rav_final = 0.0;
    int bits_per_switch = 0;
    std::optional<double> entered_sigma_at;
    std::optional<double> switching_ceased_at;
    double min_event_gap = 0.0; // between genuine switches; 0 when < 2 of them
    long total_steps = 0;
    long hysteresis_jumps = 0;
    MonitorReport monitors;
    std::vector<double> mu;
    double horizon = 0.0;
    double step = 0.0;
    double t_tol = 0.0;

    size_t sample_count() const { return t.size(); }
};

// Single RK4 step of size h from (t, y) into out (out may alias y).
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
void rk4_step(const OdeRhs& rhs, double t, std::span<const double> y, double h,
              std::span<double> out);

// Fixed-step integration from (t, y) until `hold` first fails or t_end is
// reached. On a guard crossing the offending step is bisected down to t_tol
// and (t, y) is left at the first state outside the hold region; accepted
// full steps are reported through on_sample. Returns true iff a crossing was
// localized.
bool integrate_until(const OdeRhs& rhs, std::vector<double>& y, double& t, double t_end, double h,
                     double t_tol, const std::function<bool(std::span<const double>)>& hold,
                     const std::function<void(double, std::span<const double>)>& on_sample);

// Closed loop with the hysteretic quantizer, u = -Psi_m(kbar * zeta).
Trajectory run_quantized(const PlantModel& plant, const SynthesisResult& synth,
                         std::span<const double> x0, double zeta0, std::span<const double> mu,
                         const SimOptions& opts);

// Closed loop with the ternary controller at gain synth.kbar_ternary.
Trajectory run_ternary(const PlantModel& plant, const SynthesisResult& synth,
                       std::span<const double> x0, double zeta0, std::span<const double> mu,
                       const SimOptions& opts);

// Average data rate series R_av[0,t] = bits * (#events with time <= t) / t,
// evaluated at every recorded sample time and event time, plus the limsup
// proxy (max over the trailing window of the horizon).
std::pair<double, std::vector<std::pair<double, double>>> measure_rate(
    const Trajectory& traj, int bits_per_switch, double window_fraction = 0.25);

// Initial conditions on the shell W = shell_fraction * (c^2+d^2+1): `count`
// deterministic directions, each scaled until W hits the target level.
std::vector<std::pair<std::vector<double>, double>> boundary_shell_points(
    const PlantModel& plant, double shell_fraction, int count);

// Half-side of the largest cube {|x_i| <= R, |zeta| <= R} inside the
// operating sublevel set, found by bisection on the worst corner.
double largest_inscribed_cube(const PlantModel& plant);

} // namespace qfs

#endif
