#include "qfstab/qfstab.h"

#include <cstdio>
#include <cstring>
#include <string>

#include "qfstab/config.hpp"
#include "qfstab/experiment.hpp"
#include "qfstab/selftest.hpp"
#include "qfstab/synthesis.hpp"

using namespace qfs;

struct qfs_experiment {
    ExperimentConfig cfg;
    std::string serialized; // scratch for qfs_experiment_serialize
};

struct qfs_synthesis {
    SynthesisResult result;
};

namespace {

thread_local std::string g_last_error;

qfs_status status_of(errc code) {
    switch (code) {
    case errc::invalid_argument: return QFS_ERROR_INVALID_ARGUMENT;
    case errc::config: return QFS_ERROR_CONFIG;
    case errc::synthesis: return QFS_ERROR_SYNTHESIS;
    case errc::domain: return QFS_ERROR_DOMAIN;
    case errc::range: return QFS_ERROR_RANGE;
    case errc::monitor: return QFS_ERROR_MONITOR;
    case errc::io: return QFS_ERROR_IO;
    case errc::internal: return QFS_ERROR_INTERNAL;
    }
    return QFS_ERROR_INTERNAL;
}

template <class Fn>
qfs_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        return fn();
    } catch (const error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QFS_ERROR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return QFS_ERROR_INTERNAL;
    }
}

qfs_status bad_arg(const char* msg) {
    g_last_error = msg;
    return QFS_ERROR_INVALID_ARGUMENT;
}

void fill_stats(qfs_sweep_stats* out, const SweepStats& st) {
    out->runs = st.runs;
    out->monitor_failures = st.monitor_failures;
    out->min_dwell = st.min_dwell;
    out->max_rav = st.max_rav;
    out->max_entry_time = st.max_entry_time;
    out->never_entered = st.never_entered;
    out->switching_ceased = st.switching_ceased;
    out->hysteresis_jumps = st.hysteresis_jumps;
}

} // namespace

extern "C" {

const char* qfs_version(void) { return "0.1.0"; }

const char* qfs_status_name(qfs_status s) {
    switch (s) {
    case QFS_OK: return "ok";
    case QFS_ERROR_INVALID_ARGUMENT: return "invalid-argument";
    case QFS_ERROR_CONFIG: return "config-error";
    case QFS_ERROR_SYNTHESIS: return "synthesis-error";
    case QFS_ERROR_DOMAIN: return "domain-error";
    case QFS_ERROR_RANGE: return "range-error";
    case QFS_ERROR_MONITOR: return "monitor-failure";
    case QFS_ERROR_IO: return "io-error";
    case QFS_ERROR_INTERNAL: return "internal-error";
    }
    return "unknown";
}

const char* qfs_last_error(void) { return g_last_error.c_str(); }

qfs_status qfs_experiment_load(const char* path, qfs_experiment** out) {
    if (!path || !out) return bad_arg("qfs_experiment_load: null argument");
    return guarded([&] {
        auto* e = new qfs_experiment{load_config(path), {}};
        *out = e;
        return QFS_OK;
    });
}

qfs_status qfs_experiment_parse(const char* text, qfs_experiment** out) {
    if (!text || !out) return bad_arg("qfs_experiment_parse: null argument");
    return guarded([&] {
        auto* e = new qfs_experiment{parse_config(text), {}};
        *out = e;
        return QFS_OK;
    });
}

void qfs_experiment_free(qfs_experiment* e) { delete e; }

qfs_status qfs_experiment_set_seed(qfs_experiment* e, uint64_t seed) {
    if (!e) return bad_arg("qfs_experiment_set_seed: null handle");
    e->cfg.seed = seed;
    e->cfg.plan.seed = seed;
    return QFS_OK;
}

qfs_status qfs_experiment_set_horizon(qfs_experiment* e, double horizon) {
    if (!e) return bad_arg("qfs_experiment_set_horizon: null handle");
    if (!(horizon > 0.0)) return bad_arg("qfs_experiment_set_horizon: horizon must be positive");
    e->cfg.horizon = horizon;
    return QFS_OK;
}

qfs_status qfs_experiment_set_output_dir(qfs_experiment* e, const char* dir) {
    if (!e || !dir) return bad_arg("qfs_experiment_set_output_dir: null argument");
    e->cfg.output_dir = dir;
    return QFS_OK;
}

qfs_status qfs_experiment_serialize(const qfs_experiment* e, const char** out_text) {
    if (!e || !out_text) return bad_arg("qfs_experiment_serialize: null argument");
    return guarded([&] {
        auto* me = const_cast<qfs_experiment*>(e);
        me->serialized = serialize_config(e->cfg);
        *out_text = me->serialized.c_str();
        return QFS_OK;
    });
}

qfs_status qfs_synthesize(const qfs_experiment* e, qfs_synthesis** out) {
    if (!e || !out) return bad_arg("qfs_synthesize: null argument");
    return guarded([&] {
        PlantModel plant = make_plant(e->cfg);
        double delta = e->cfg.has_quantizer ? e->cfg.delta : 0.5;
        SynthesisResult s =
            synthesize(plant, delta, e->cfg.plan, e->cfg.gain_margin, e->cfg.level_margin);
        s.config_hash = config_synthesis_hash(e->cfg);
        *out = new qfs_synthesis{std::move(s)};
        return QFS_OK;
    });
}

qfs_status qfs_synthesis_save(const qfs_synthesis* s, const char* path) {
    if (!s || !path) return bad_arg("qfs_synthesis_save: null argument");
    return guarded([&] {
        save_synthesis(s->result, path);
        return QFS_OK;
    });
}

qfs_status qfs_synthesis_load(const char* path, qfs_synthesis** out) {
    if (!path || !out) return bad_arg("qfs_synthesis_load: null argument");
    return guarded([&] {
        *out = new qfs_synthesis{load_synthesis(path)};
        return QFS_OK;
    });
}

void qfs_synthesis_free(qfs_synthesis* s) { delete s; }

qfs_status qfs_synthesis_value(const qfs_synthesis* s, const char* key, double* out) {
    if (!s || !key || !out) return bad_arg("qfs_synthesis_value: null argument");
    const SynthesisResult& r = s->result;
    std::string k = key;
    double v;
    if (k == "delta") v = r.delta;
    else if (k == "eta") v = r.eta;
    else if (k == "w_bar") v = r.bounds.w_bar;
    else if (k == "b_bar") v = r.bounds.b_bar;
    else if (k == "zeta_bar") v = r.bounds.zeta_bar;
    else if (k == "q_bar") v = r.bounds.q_bar;
    else if (k == "zeta_tilde") v = r.zeta_tilde;
    else if (k == "k_star") v = r.k_star;
    else if (k == "k0") v = r.k0;
    else if (k == "j_star") v = static_cast<double>(r.j_star);
    else if (k == "kbar") v = r.kbar;
    else if (k == "j") v = static_cast<double>(r.j);
    else if (k == "u0") v = r.u0;
    else if (k == "dt_min") v = r.dt_min;
    else if (k == "rate_bound_quantized") v = r.rate_bound_quantized;
    else if (k == "rate_bound_ternary") v = r.rate_bound_ternary;
    else if (k == "kbar_ternary") v = r.kbar_ternary;
    else if (k == "sigma") v = r.sigma;
    else if (k == "c") v = r.c;
    else if (k == "d") v = r.d;
    else if (k == "b0") v = r.b0;
    else {
        g_last_error = "qfs_synthesis_value: unknown key '" + k + "'";
        return QFS_ERROR_INVALID_ARGUMENT;
    }
    *out = v;
    return QFS_OK;
}

qfs_status qfs_cmd_synthesize(const qfs_experiment* e) {
    if (!e) return bad_arg("qfs_cmd_synthesize: null handle");
    return guarded([&] {
        cmd_synthesize(e->cfg);
        return QFS_OK;
    });
}

qfs_status qfs_cmd_run(const qfs_experiment* e, const char* synthesis_path, int ic_index,
                       int mu_index, qfs_sweep_stats* stats_opt) {
    if (!e || !synthesis_path) return bad_arg("qfs_cmd_run: null argument");
    return guarded([&]() -> qfs_status {
        SweepStats st;
        bool ok = cmd_run(e->cfg, synthesis_path, ic_index, mu_index, &st);
        if (stats_opt) fill_stats(stats_opt, st);
        if (!ok) {
            g_last_error = "one or more runtime monitors failed; see monitors.txt";
            return QFS_ERROR_MONITOR;
        }
        return QFS_OK;
    });
}

qfs_status qfs_cmd_sweep(const qfs_experiment* e, const char* synthesis_path,
                         qfs_sweep_stats* stats_opt) {
    if (!e || !synthesis_path) return bad_arg("qfs_cmd_sweep: null argument");
    return guarded([&]() -> qfs_status {
        SweepStats st;
        bool ok = cmd_sweep(e->cfg, synthesis_path, &st);
        if (stats_opt) fill_stats(stats_opt, st);
        if (!ok) {
            g_last_error = "one or more runtime monitors failed; see summary.txt";
            return QFS_ERROR_MONITOR;
        }
        return QFS_OK;
    });
}

qfs_status qfs_selftest(const char* report_path) {
    return guarded([&]() -> qfs_status {
        SelfTestReport rep = run_selftest();
        std::string text = rep.to_text();
        if (report_path) {
            std::FILE* f = std::fopen(report_path, "w");
            if (!f) {
                g_last_error = std::string("cannot open '") + report_path + "' for writing";
                return QFS_ERROR_IO;
            }
            std::fwrite(text.data(), 1, text.size(), f);
            std::fclose(f);
        } else {
            std::fwrite(text.data(), 1, text.size(), stdout);
        }
        if (!rep.all_pass()) {
            g_last_error = "selftest failures present";
            return QFS_ERROR_MONITOR;
        }
        return QFS_OK;
    });
}

} // extern "C"
