// Command-line driver. Deliberately a pure client of the C API.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "qfstab/qfstab.h"

namespace {

int exit_code_of(qfs_status s) {
    if (s == QFS_OK) return 0;
    if (s == QFS_ERROR_MONITOR) return 1;
    return 2;
}

int report(qfs_status s, const char* what) {
    if (s == QFS_OK) {
        std::printf("%s: ok\n", what);
        return 0;
    }
    std::fprintf(stderr, "%s: %s: %s\n", what, qfs_status_name(s), qfs_last_error());
    return exit_code_of(s);
}

struct ExperimentHandle {
    qfs_experiment* e = nullptr;
    ~ExperimentHandle() { qfs_experiment_free(e); }
};

qfs_status open_experiment(const std::string& config_path, std::uint64_t seed, bool seed_set,
                           double horizon, bool horizon_set, const std::string& output,
                           ExperimentHandle& h) {
    qfs_status s = qfs_experiment_load(config_path.c_str(), &h.e);
    if (s != QFS_OK) return s;
    if (seed_set) {
        s = qfs_experiment_set_seed(h.e, seed);
        if (s != QFS_OK) return s;
    }
    if (horizon_set) {
        s = qfs_experiment_set_horizon(h.e, horizon);
        if (s != QFS_OK) return s;
    }
    if (!output.empty()) {
        s = qfs_experiment_set_output_dir(h.e, output.c_str());
        if (s != QFS_OK) return s;
    }
    return QFS_OK;
}

void print_stats(const qfs_sweep_stats& st) {
    std::printf("runs: %ld  monitor_failures: %ld\n", st.runs, st.monitor_failures);
    std::printf("min_dwell: %.6g  max_rav: %.6g  max_entry_time: %.6g\n", st.min_dwell, st.max_rav,
                st.max_entry_time);
    if (st.never_entered) std::printf("never_entered: %ld\n", st.never_entered);
    if (st.switching_ceased) std::printf("switching_ceased_runs: %ld\n", st.switching_ceased);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantized and ternary feedback stabilization toolkit"};
    app.require_subcommand(1);

    std::string config_path, output_dir, synthesis_path, report_path;
    std::uint64_t seed = 0;
    double horizon = 0.0;
    int ic_index = 0, mu_index = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "experiment config file")->required();
        cmd->add_option("--seed", seed, "override the sampling seed");
        cmd->add_option("--horizon", horizon, "override the simulation horizon");
        cmd->add_option("-o,--output", output_dir, "override the output directory");
    };

    CLI::App* synth = app.add_subcommand("synthesize", "estimate bounds and compute the controller constants");
    add_common(synth);

    CLI::App* run = app.add_subcommand("run", "execute a single closed-loop run");
    add_common(run);
    run->add_option("-s,--synthesis", synthesis_path, "synthesis file from `synthesize`")->required();
    run->add_option("--ic", ic_index, "initial-condition index on the shell grid");
    run->add_option("--mu", mu_index, "parameter-draw index");

    CLI::App* sweep = app.add_subcommand("sweep", "run every initial condition and parameter draw");
    add_common(sweep);
    sweep->add_option("-s,--synthesis", synthesis_path, "synthesis file from `synthesize`")->required();

    CLI::App* selftest = app.add_subcommand("selftest", "run the module property checks");
    selftest->add_option("--report", report_path, "write the report to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    if (selftest->parsed())
        return exit_code_of(qfs_selftest(report_path.empty() ? nullptr : report_path.c_str()));

    ExperimentHandle h;
    bool seed_set = synth->count("--seed") || run->count("--seed") || sweep->count("--seed");
    bool horizon_set = synth->count("--horizon") || run->count("--horizon") || sweep->count("--horizon");
    qfs_status s = open_experiment(config_path, seed, seed_set, horizon, horizon_set, output_dir, h);
    if (s != QFS_OK) return report(s, "config");

    if (synth->parsed()) return report(qfs_cmd_synthesize(h.e), "synthesize");

    qfs_sweep_stats stats{};
    if (run->parsed()) {
        s = qfs_cmd_run(h.e, synthesis_path.c_str(), ic_index, mu_index, &stats);
        print_stats(stats);
        return report(s, "run");
    }
    if (sweep->parsed()) {
        s = qfs_cmd_sweep(h.e, synthesis_path.c_str(), &stats);
        print_stats(stats);
        return report(s, "sweep");
    }
    return 2;
}
