#include "qfstab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace qfs {

const char* controller_kind_name(ControllerKind k) {
    switch (k) {
    case ControllerKind::StaticQuantized: return "static-quantized";
    case ControllerKind::HystereticQuantized: return "hysteretic-quantized";
    case ControllerKind::Ternary: return "ternary";
    }
    return "?";
}

ControllerKind controller_kind_from_name(const std::string& name) {
    if (name == "static-quantized") return ControllerKind::StaticQuantized;
    if (name == "hysteretic-quantized") return ControllerKind::HystereticQuantized;
    if (name == "ternary") return ControllerKind::Ternary;
    fail(errc::config, "unknown controller kind '" + name +
                           "' (expected static-quantized, hysteretic-quantized or ternary)");
}

namespace {

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_double(v[i]);
    }
    return out;
}

// raw parsed file: section -> ordered (key, value) pairs
using Section = std::vector<std::pair<std::string, std::string>>;

std::map<std::string, Section> parse_ini(const std::string& text) {
    std::map<std::string, Section> out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(errc::config, "config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            out[section]; // create
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(errc::config, "config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            fail(errc::config, "config line " + std::to_string(lineno) + ": key outside any section");
        out[section].push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
    return out;
}

struct SectionReader {
    const std::string name;
    const Section* raw;
    std::set<std::string> consumed;

    bool has(const std::string& key) const {
        if (!raw) return false;
        for (const auto& [k, v] : *raw)
            if (k == key) return true;
        return false;
    }

    std::optional<std::string> get(const std::string& key) {
        if (!raw) return std::nullopt;
        consumed.insert(key);
        for (const auto& [k, v] : *raw)
            if (k == key) return v;
        return std::nullopt;
    }

    std::string require(const std::string& key) {
        auto v = get(key);
        if (!v) fail(errc::config, "config: [" + name + "] is missing required key '" + key + "'");
        return *v;
    }

    double number(const std::string& key) { return to_number(key, require(key)); }

    std::optional<double> number_opt(const std::string& key) {
        auto v = get(key);
        if (!v) return std::nullopt;
        return to_number(key, *v);
    }

    long integer(const std::string& key, long fallback) {
        auto v = get(key);
        if (!v) return fallback;
        return std::strtol(v->c_str(), nullptr, 10);
    }

    std::vector<double> number_list(const std::string& key) {
        std::string v = require(key);
        std::vector<double> out;
        std::istringstream in(v);
        std::string item;
        while (std::getline(in, item, ',')) out.push_back(to_number(key, trim(item)));
        return out;
    }

    double to_number(const std::string& key, const std::string& v) const {
        char* end = nullptr;
        double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            fail(errc::config, "config: [" + name + "] " + key + " = '" + v + "' is not a number");
        return x;
    }

    void check_all_consumed() const {
        if (!raw) return;
        for (const auto& [k, v] : *raw)
            if (!consumed.count(k))
                fail(errc::config, "config: unknown key '" + k + "' in section [" + name + "]");
    }
};

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    auto ini = parse_ini(text);
    static const std::set<std::string> known = {"experiment", "lyapunov", "quantizer",
                                               "grid",       "plant",    "initial"};
    for (const auto& [sec, kv] : ini)
        if (!known.count(sec)) fail(errc::config, "config: unknown section [" + sec + "]");

    auto section = [&](const char* n) -> SectionReader {
        auto it = ini.find(n);
        return SectionReader{n, it == ini.end() ? nullptr : &it->second, {}};
    };

    ExperimentConfig cfg;

    SectionReader exp = section("experiment");
    if (!exp.raw) fail(errc::config, "config: missing [experiment] section");
    cfg.controller = controller_kind_from_name(exp.require("controller"));
    cfg.seed = static_cast<std::uint64_t>(exp.integer("seed", 1));
    cfg.horizon = exp.number_opt("horizon").value_or(10.0);
    cfg.output_dir = exp.get("output_dir").value_or("out");
    cfg.sample_stride = exp.integer("sample_stride", 0);
    exp.check_all_consumed();

    SectionReader lyap = section("lyapunov");
    if (!lyap.raw) fail(errc::config, "config: missing [lyapunov] section");
    cfg.c = lyap.number_opt("c").value_or(1.0);
    cfg.d = lyap.number_opt("d").value_or(1.0);
    auto sig = lyap.number_opt("sigma");
    if (!sig) fail(errc::config, "config: [lyapunov] must set sigma (the target sublevel)");
    cfg.sigma = *sig;
    lyap.check_all_consumed();

    SectionReader quant = section("quantizer");
    cfg.has_quantizer = quant.raw != nullptr;
    if (cfg.quantized() && !cfg.has_quantizer)
        fail(errc::config, "config: controller kind '" +
                               std::string(controller_kind_name(cfg.controller)) +
                               "' requires a [quantizer] section with delta");
    if (cfg.has_quantizer) {
        cfg.delta = quant.number("delta");
        if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
            fail(errc::config,
                 "config: delta must lie strictly in (0,1); outside that range the quantizer "
                 "sector contains the zero gain and no stabilizing design exists for open-loop "
                 "unstable plants");
        cfg.gain_margin = quant.number_opt("gain_margin").value_or(1.0);
        cfg.level_margin = quant.integer("level_margin", 0);
        quant.check_all_consumed();
    }

    SectionReader grid = section("grid");
    if (grid.raw) {
        cfg.plan.samples = grid.integer("samples", cfg.plan.samples);
        cfg.plan.safety_factor = grid.number_opt("safety_factor").value_or(cfg.plan.safety_factor);
        cfg.plan.eta_margin_fraction =
            grid.number_opt("eta_margin_fraction").value_or(cfg.plan.eta_margin_fraction);
        cfg.plan.eta_max_halvings =
            static_cast<int>(grid.integer("eta_max_halvings", cfg.plan.eta_max_halvings));
        cfg.plan.eta_min_region_samples =
            grid.integer("eta_min_region_samples", cfg.plan.eta_min_region_samples);
        grid.check_all_consumed();
    }
    cfg.plan.seed = cfg.seed;

    SectionReader plant = section("plant");
    if (!plant.raw) fail(errc::config, "config: missing [plant] section");
    if (plant.has("builtin")) {
        cfg.plant.builtin = plant.require("builtin");
        plant.check_all_consumed();
    } else {
        cfg.plant.dim_x = static_cast<int>(plant.integer("dim_x", -1));
        if (cfg.plant.dim_x < 0) fail(errc::config, "config: [plant] needs dim_x (or builtin)");
        cfg.plant.b0 = plant.number("b0");
        cfg.plant.x_lo = plant.number_list("x_lo");
        cfg.plant.x_hi = plant.number_list("x_hi");
        if (plant.has("mu_lo") || plant.has("mu_hi")) {
            cfg.plant.mu_lo = plant.number_list("mu_lo");
            cfg.plant.mu_hi = plant.number_list("mu_hi");
        }
        for (int i = 1; i <= cfg.plant.dim_x; ++i) {
            cfg.plant.F.push_back(parse_polynomial(plant.require("F" + std::to_string(i))));
            cfg.plant.G.push_back(parse_polynomial(plant.require("G" + std::to_string(i))));
        }
        cfg.plant.q = parse_polynomial(plant.require("q"));
        cfg.plant.b = parse_polynomial(plant.require("b"));
        cfg.plant.V = parse_polynomial(plant.require("V"));
        plant.check_all_consumed();
    }

    SectionReader init = section("initial");
    if (init.raw) {
        cfg.initial.shell = init.number_opt("shell").value_or(0.98);
        cfg.initial.count = static_cast<int>(init.integer("count", 9));
        auto mode = init.get("mu_mode").value_or("corners-center");
        if (mode == "list") {
            cfg.initial.mu_list = true;
            cfg.initial.mu_values = init.number_list("mu_values");
        } else if (mode == "corners-center") {
            cfg.initial.mu_list = false;
        } else {
            fail(errc::config, "config: [initial] mu_mode must be corners-center or list");
        }
        init.check_all_consumed();
    }

    if (!(cfg.initial.shell > 0.0 && cfg.initial.shell <= 1.0))
        fail(errc::config, "config: [initial] shell must lie in (0,1]");
    if (cfg.initial.count < 1) fail(errc::config, "config: [initial] count must be >= 1");
    if (!(cfg.horizon > 0.0)) fail(errc::config, "config: horizon must be positive");
    cfg.plan.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream o;
    o << "[experiment]\n";
    o << "controller = " << controller_kind_name(cfg.controller) << "\n";
    o << "seed = " << cfg.seed << "\n";
    o << "horizon = " << fmt_double(cfg.horizon) << "\n";
    o << "output_dir = " << cfg.output_dir << "\n";
    o << "sample_stride = " << cfg.sample_stride << "\n";
    o << "\n[lyapunov]\n";
    o << "c = " << fmt_double(cfg.c) << "\n";
    o << "d = " << fmt_double(cfg.d) << "\n";
    o << "sigma = " << fmt_double(cfg.sigma.value_or(0.0)) << "\n";
    if (cfg.has_quantizer) {
        o << "\n[quantizer]\n";
        o << "delta = " << fmt_double(cfg.delta) << "\n";
        o << "gain_margin = " << fmt_double(cfg.gain_margin) << "\n";
        o << "level_margin = " << cfg.level_margin << "\n";
    }
    o << "\n[grid]\n";
    o << "samples = " << cfg.plan.samples << "\n";
    o << "safety_factor = " << fmt_double(cfg.plan.safety_factor) << "\n";
    o << "eta_margin_fraction = " << fmt_double(cfg.plan.eta_margin_fraction) << "\n";
    o << "eta_max_halvings = " << cfg.plan.eta_max_halvings << "\n";
    o << "eta_min_region_samples = " << cfg.plan.eta_min_region_samples << "\n";
    o << "\n[plant]\n";
    if (!cfg.plant.builtin.empty()) {
        o << "builtin = " << cfg.plant.builtin << "\n";
    } else {
        o << "dim_x = " << cfg.plant.dim_x << "\n";
        o << "b0 = " << fmt_double(cfg.plant.b0) << "\n";
        o << "x_lo = " << fmt_list(cfg.plant.x_lo) << "\n";
        o << "x_hi = " << fmt_list(cfg.plant.x_hi) << "\n";
        if (!cfg.plant.mu_lo.empty()) {
            o << "mu_lo = " << fmt_list(cfg.plant.mu_lo) << "\n";
            o << "mu_hi = " << fmt_list(cfg.plant.mu_hi) << "\n";
        }
        for (int i = 0; i < cfg.plant.dim_x; ++i) {
            o << "F" << i + 1 << " = " << cfg.plant.F[i].to_string() << "\n";
            o << "G" << i + 1 << " = " << cfg.plant.G[i].to_string() << "\n";
        }
        o << "q = " << cfg.plant.q.to_string() << "\n";
        o << "b = " << cfg.plant.b.to_string() << "\n";
        o << "V = " << cfg.plant.V.to_string() << "\n";
    }
    o << "\n[initial]\n";
    o << "shell = " << fmt_double(cfg.initial.shell) << "\n";
    o << "count = " << cfg.initial.count << "\n";
    o << "mu_mode = " << (cfg.initial.mu_list ? "list" : "corners-center") << "\n";
    if (cfg.initial.mu_list) o << "mu_values = " << fmt_list(cfg.initial.mu_values) << "\n";
    return o.str();
}

PlantModel make_plant(const ExperimentConfig& cfg) {
    if (!cfg.sigma) fail(errc::config, "config: sigma not set");
    if (!cfg.plant.builtin.empty()) {
        PlantModel p = builtin_plant(cfg.plant.builtin, *cfg.sigma);
        if (p.lyapunov.c != cfg.c || p.lyapunov.d != cfg.d)
            fail(errc::config, "config: builtin plant '" + cfg.plant.builtin +
                                   "' is defined for c = " + fmt_double(p.lyapunov.c) +
                                   ", d = " + fmt_double(p.lyapunov.d));
        return p;
    }

    const PlantConfig& pc = cfg.plant;
    const int n = pc.dim_x;
    if (static_cast<int>(pc.x_lo.size()) != n || static_cast<int>(pc.x_hi.size()) != n)
        fail(errc::config, "config: x_lo/x_hi must have dim_x entries");
    if (pc.mu_lo.size() != pc.mu_hi.size())
        fail(errc::config, "config: mu_lo/mu_hi length mismatch");
    const int nmu = static_cast<int>(pc.mu_lo.size());

    auto check_vars = [&](const Polynomial& p, const char* what, bool allow_zeta) {
        if (!allow_zeta && p.references(VarKind::Zeta))
            fail(errc::config, std::string("config: ") + what + " must not reference zeta");
        if (p.max_index(VarKind::X) >= n)
            fail(errc::config, std::string("config: ") + what + " references x beyond dim_x");
        if (p.max_index(VarKind::Mu) >= nmu)
            fail(errc::config, std::string("config: ") + what + " references mu beyond the box");
    };
    for (int i = 0; i < n; ++i) {
        check_vars(pc.F[i], "F", false);
        check_vars(pc.G[i], "G", false);
    }
    check_vars(pc.q, "q", true);
    check_vars(pc.b, "b", true);
    check_vars(pc.V, "V", false);
    if (pc.V.references(VarKind::Mu))
        fail(errc::config, "config: V must not depend on mu");
    if (!(pc.b0 > 0.0)) fail(errc::config, "config: b0 must be positive");

    auto F = std::make_shared<std::vector<Polynomial>>(pc.F);
    auto G = std::make_shared<std::vector<Polynomial>>(pc.G);
    auto q = std::make_shared<Polynomial>(pc.q);
    auto b = std::make_shared<Polynomial>(pc.b);
    auto V = std::make_shared<Polynomial>(pc.V);
    auto gradV = std::make_shared<std::vector<Polynomial>>();
    for (int i = 0; i < n; ++i) gradV->push_back(pc.V.derivative_x(i));

    PlantModel p;
    p.name = "declared";
    p.dim_x = n;
    p.b0 = pc.b0;
    p.param_box = {pc.mu_lo, pc.mu_hi};
    p.x_box = {pc.x_lo, pc.x_hi};
    p.F = [F, n](std::span<const double> x, std::span<const double> mu, std::span<double> out) {
        for (int i = 0; i < n; ++i) out[i] = (*F)[i].eval(x, 0.0, mu);
    };
    p.G = [G, n](std::span<const double> x, std::span<const double> mu, std::span<double> out) {
        for (int i = 0; i < n; ++i) out[i] = (*G)[i].eval(x, 0.0, mu);
    };
    p.q = [q](std::span<const double> x, double zeta, std::span<const double> mu) {
        return q->eval(x, zeta, mu);
    };
    p.b = [b](std::span<const double> x, double zeta, std::span<const double> mu) {
        return b->eval(x, zeta, mu);
    };
    p.lyapunov.c = cfg.c;
    p.lyapunov.d = cfg.d;
    p.lyapunov.sigma = *cfg.sigma;
    p.lyapunov.V = [V](std::span<const double> x) { return V->eval(x, 0.0, {}); };
    p.lyapunov.gradV = [gradV, n](std::span<const double> x, std::span<double> out) {
        for (int i = 0; i < n; ++i) out[i] = (*gradV)[i].eval(x, 0.0, {});
    };
    p.validate();
    return p;
}

std::uint64_t config_synthesis_hash(const ExperimentConfig& cfg) {
    // FNV-1a over the synthesis-relevant canonical text
    std::ostringstream o;
    o << fmt_double(cfg.c) << "|" << fmt_double(cfg.d) << "|" << fmt_double(cfg.sigma.value_or(0.0))
      << "|" << cfg.has_quantizer;
    if (cfg.has_quantizer)
        o << "|" << fmt_double(cfg.delta) << "|" << fmt_double(cfg.gain_margin) << "|"
          << cfg.level_margin;
    o << "|" << cfg.plan.samples << "|" << fmt_double(cfg.plan.safety_factor) << "|"
      << fmt_double(cfg.plan.eta_margin_fraction) << "|" << cfg.plan.eta_max_halvings << "|"
      << cfg.plan.eta_min_region_samples << "|" << cfg.seed;
    o << "|" << cfg.plant.builtin << "|" << cfg.plant.dim_x << "|" << fmt_double(cfg.plant.b0);
    o << "|" << fmt_list(cfg.plant.mu_lo) << "|" << fmt_list(cfg.plant.mu_hi);
    o << "|" << fmt_list(cfg.plant.x_lo) << "|" << fmt_list(cfg.plant.x_hi);
    for (const auto& p : cfg.plant.F) o << "|" << p.to_string();
    for (const auto& p : cfg.plant.G) o << "|" << p.to_string();
    o << "|" << cfg.plant.q.to_string() << "|" << cfg.plant.b.to_string() << "|"
      << cfg.plant.V.to_string();
    std::string s = o.str();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::vector<double>> mu_sweep_values(const ExperimentConfig& cfg,
                                                 const PlantModel& plant) {
    if (!cfg.initial.mu_list) return plant.param_box.corners_and_center();
    if (plant.param_box.dim() != 1)
        fail(errc::config, "config: mu_mode = list requires a one-dimensional parameter box");
    std::vector<std::vector<double>> out;
    for (double v : cfg.initial.mu_values) out.push_back({v});
    return out;
}

} // namespace qfs
