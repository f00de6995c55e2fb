#include "qfstab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace qfs {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(errc::io, "cannot create directory '" + dir + "': " + ec.message());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) fail(errc::io, "cannot open '" + path + "' for writing");
    out << content;
    if (!out) fail(errc::io, "write failed for '" + path + "'");
}

} // namespace

std::string run_dir_name(int ic_index, int mu_index) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "run_ic%02d_mu%02d", ic_index, mu_index);
    return buf;
}

SynthesisResult cmd_synthesize(const ExperimentConfig& cfg) {
    PlantModel plant = make_plant(cfg);
    if (cfg.quantized() && !cfg.has_quantizer)
        fail(errc::config, "synthesize: quantized controller kinds need a [quantizer] section");
    // Ternary synthesis still needs a sector parameter for the quantized
    // constants it reports; default to 1/2 when no [quantizer] is given.
    double delta = cfg.has_quantizer ? cfg.delta : 0.5;
    SynthesisResult s = synthesize(plant, delta, cfg.plan, cfg.gain_margin, cfg.level_margin);
    s.config_hash = config_synthesis_hash(cfg);

    ensure_dir(cfg.output_dir);
    save_synthesis(s, (fs::path(cfg.output_dir) / kSynthesisFile).string());
    std::string deriv = synthesis_derivation(s);
    {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "largest cube inside the operating set: half-side %.10g (corner-checked)\n",
                      largest_inscribed_cube(plant));
        deriv += buf;
    }
    write_file((fs::path(cfg.output_dir) / kDerivationFile).string(), deriv);
    return s;
}

Trajectory execute_run(const ExperimentConfig& cfg, const PlantModel& plant,
                       const SynthesisResult& synth, std::span<const double> x0, double zeta0,
                       std::span<const double> mu) {
    SimOptions opts;
    opts.horizon = cfg.horizon;
    opts.sample_stride = cfg.sample_stride;
    switch (cfg.controller) {
    case ControllerKind::HystereticQuantized: return run_quantized(plant, synth, x0, zeta0, mu, opts);
    case ControllerKind::Ternary: return run_ternary(plant, synth, x0, zeta0, mu, opts);
    case ControllerKind::StaticQuantized:
        fail(errc::config,
             "the static quantizer loop is not integrated directly (its solutions are "
             "set-valued); use hysteretic-quantized, whose output is checked against the static "
             "quantizer's inclusion set at every sample");
    }
    fail(errc::internal, "unreachable controller kind");
}

void write_trajectory_files(const Trajectory& traj, const std::string& dir) {
    ensure_dir(dir);
    {
        std::ostringstream o;
        o << "# t";
        for (int i = 0; i < traj.dim_x; ++i) o << "\tx" << i + 1;
        o << "\tzeta\tu\tW\n";
        for (size_t k = 0; k < traj.sample_count(); ++k) {
            o << fmt(traj.t[k]);
            for (int i = 0; i < traj.dim_x; ++i) o << "\t" << fmt(traj.x[k * traj.dim_x + i]);
            o << "\t" << fmt(traj.zeta[k]) << "\t" << fmt(traj.u[k]) << "\t" << fmt(traj.w[k])
              << "\n";
        }
        write_file((fs::path(dir) / kSamplesFile).string(), o.str());
    }
    {
        std::ostringstream o;
        o << "# t\told_value\tnew_value\ttrigger\n";
        for (const auto& ev : traj.events)
            o << fmt(ev.time) << "\t" << fmt(ev.old_value) << "\t" << fmt(ev.new_value) << "\t"
              << ev.trigger << "\n";
        write_file((fs::path(dir) / kEventsFile).string(), o.str());
    }
    {
        std::ostringstream o;
        o << "# t\trav\n";
        for (const auto& [t, r] : traj.rav_series) o << fmt(t) << "\t" << fmt(r) << "\n";
        write_file((fs::path(dir) / kRateFile).string(), o.str());
    }
    {
        std::ostringstream o;
        o << traj.monitors.to_text();
        o << "samples_recorded: " << traj.sample_count() << "\n";
        o << "integration_steps: " << traj.total_steps << "\n";
        o << "events: " << traj.events.size() << "\n";
        o << "bits_per_switch: " << traj.bits_per_switch << "\n";
        o << "rav_final: " << fmt(traj.rav_final) << "\n";
        o << "min_event_gap: " << fmt(traj.min_event_gap) << "\n";
        o << "hysteresis_jumps: " << traj.hysteresis_jumps << "\n";
        if (traj.entered_sigma_at) o << "entered_sigma_at: " << fmt(*traj.entered_sigma_at) << "\n";
        if (traj.switching_ceased_at)
            o << "switching_ceased_at: " << fmt(*traj.switching_ceased_at) << "\n";
        write_file((fs::path(dir) / kMonitorsFile).string(), o.str());
    }
}

namespace {

void fold_stats(SweepStats& st, const Trajectory& traj) {
    ++st.runs;
    if (!traj.monitors.all_pass()) ++st.monitor_failures;
    if (traj.min_event_gap > 0.0) st.min_dwell = std::min(st.min_dwell, traj.min_event_gap);
    st.max_rav = std::max(st.max_rav, traj.rav_final);
    if (traj.entered_sigma_at)
        st.max_entry_time = std::max(st.max_entry_time, *traj.entered_sigma_at);
    else
        ++st.never_entered;
    if (traj.switching_ceased_at) {
        ++st.switching_ceased;
        st.latest_ceased_at = std::max(st.latest_ceased_at, *traj.switching_ceased_at);
    }
    st.hysteresis_jumps += traj.hysteresis_jumps;
}

struct RunContext {
    PlantModel plant;
    SynthesisResult synth;
    std::vector<std::pair<std::vector<double>, double>> ics;
    std::vector<std::vector<double>> mus;
};

RunContext prepare(const ExperimentConfig& cfg, const std::string& synthesis_path) {
    RunContext ctx{make_plant(cfg), load_synthesis(synthesis_path), {}, {}};
    std::uint64_t expected = config_synthesis_hash(cfg);
    if (ctx.synth.config_hash != expected)
        fail(errc::config,
             "synthesis file '" + synthesis_path +
                 "' was produced from a different configuration (hash mismatch); re-run synthesize");
    ctx.ics = boundary_shell_points(ctx.plant, cfg.initial.shell, cfg.initial.count);
    ctx.mus = mu_sweep_values(cfg, ctx.plant);
    return ctx;
}

} // namespace

bool cmd_run(const ExperimentConfig& cfg, const std::string& synthesis_path, int ic_index,
             int mu_index, SweepStats* stats) {
    RunContext ctx = prepare(cfg, synthesis_path);
    if (ic_index < 0 || ic_index >= static_cast<int>(ctx.ics.size()))
        fail(errc::config, "run: ic index out of range");
    if (mu_index < 0 || mu_index >= static_cast<int>(ctx.mus.size()))
        fail(errc::config, "run: mu index out of range");
    const auto& [x0, zeta0] = ctx.ics[ic_index];
    Trajectory traj = execute_run(cfg, ctx.plant, ctx.synth, x0, zeta0, ctx.mus[mu_index]);
    write_trajectory_files(traj, (fs::path(cfg.output_dir) / run_dir_name(ic_index, mu_index)).string());
    if (stats) fold_stats(*stats, traj);
    return traj.monitors.all_pass();
}

std::string summary_text(const SweepStats& st, const SynthesisResult& synth) {
    std::ostringstream o;
    o << "runs: " << st.runs << "\n";
    o << "monitor_failures: " << st.monitor_failures << "\n";
    o << "min_dwell: " << (std::isfinite(st.min_dwell) ? fmt(st.min_dwell) : "n/a")
      << "  (bound " << fmt(synth.dt_min) << ")\n";
    o << "max_rav: " << fmt(st.max_rav) << "  (quantized bound "
      << fmt(synth.rate_bound_quantized) << ", ternary bound " << fmt(synth.rate_bound_ternary)
      << ")\n";
    o << "max_entry_time: " << fmt(st.max_entry_time) << "\n";
    o << "never_entered: " << st.never_entered << "\n";
    o << "switching_ceased_runs: " << st.switching_ceased << "\n";
    if (st.switching_ceased > 0)
        o << "switching_ceased_latest: " << fmt(st.latest_ceased_at) << "\n";
    o << "hysteresis_jumps: " << st.hysteresis_jumps << "\n";
    o << "overall: " << (st.monitor_failures == 0 ? "pass" : "FAIL") << "\n";
    return o.str();
}

bool cmd_sweep(const ExperimentConfig& cfg, const std::string& synthesis_path, SweepStats* stats) {
    RunContext ctx = prepare(cfg, synthesis_path);
    SweepStats local;
    for (int ic = 0; ic < static_cast<int>(ctx.ics.size()); ++ic) {
        for (int mi = 0; mi < static_cast<int>(ctx.mus.size()); ++mi) {
            const auto& [x0, zeta0] = ctx.ics[ic];
            Trajectory traj = execute_run(cfg, ctx.plant, ctx.synth, x0, zeta0, ctx.mus[mi]);
            write_trajectory_files(traj,
                                   (fs::path(cfg.output_dir) / run_dir_name(ic, mi)).string());
            fold_stats(local, traj);
        }
    }
    write_file((fs::path(cfg.output_dir) / kSummaryFile).string(), summary_text(local, ctx.synth));
    if (stats) *stats = local;
    return local.monitor_failures == 0;
}

} // namespace qfs
