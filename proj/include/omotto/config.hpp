// config.hpp — declarative run configuration: a TOML-style key/value file
// with sections, quantities written the way measurements usually quote them
// (either "kappa_c = 0.05" or "2kappa_c = 0.1" is accepted; the doubled
// spelling is halved on ingestion).

#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "omotto/errors.hpp"
#include "omotto/model.hpp"
#include "omotto/sweep.hpp"
#include "omotto/thermo.hpp"

namespace omotto {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace detail

/// Parsed key/value file: [section] headers, key = value lines, '#'
/// comments. Values are numbers, booleans, or double-quoted strings.
class ConfigFile {
public:
    static ConfigFile parse_string(const std::string& text) {
        ConfigFile cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            // strip comments (quotes-aware)
            bool quoted = false;
            for (std::size_t k = 0; k < line.size(); ++k) {
                if (line[k] == '"') quoted = !quoted;
                if (line[k] == '#' && !quoted) {
                    line.resize(k);
                    break;
                }
            }
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw InvalidParameter(err(lineno, "unterminated section header"));
                }
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty()) {
                    throw InvalidParameter(err(lineno, "empty section name"));
                }
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                throw InvalidParameter(err(lineno, "expected 'key = value'"));
            }
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty() || value.empty()) {
                throw InvalidParameter(err(lineno, "expected 'key = value'"));
            }
            if (section.empty()) {
                throw InvalidParameter(err(lineno, "key outside any [section]"));
            }
            cfg.values_[section + "." + key] = value;
        }
        return cfg;
    }

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw InvalidParameter("cannot open config file '" + path + "'");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str());
    }

    bool has(const std::string& dotted) const { return values_.count(dotted) != 0; }

    double number(const std::string& dotted) const {
        const std::string& raw = fetch(dotted);
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (end == raw.c_str() || *end != '\0') {
            throw InvalidParameter("field " + dotted + ": '" + raw + "' is not a number");
        }
        return v;
    }

    double number_or(const std::string& dotted, double fallback) const {
        return has(dotted) ? number(dotted) : fallback;
    }

    int integer(const std::string& dotted) const {
        const double v = number(dotted);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v) {
            throw InvalidParameter("field " + dotted + " must be an integer");
        }
        return i;
    }

    std::string text(const std::string& dotted) const {
        std::string raw = fetch(dotted);
        if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
            raw = raw.substr(1, raw.size() - 2);
        }
        return raw;
    }

    std::string text_or(const std::string& dotted, const std::string& fallback) const {
        return has(dotted) ? text(dotted) : fallback;
    }

    /// All dotted keys, for unknown-key detection.
    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) out.push_back(k);
        return out;
    }

private:
    static std::string err(int lineno, const std::string& what) {
        std::ostringstream os;
        os << "config line " << lineno << ": " << what;
        return os.str();
    }
    const std::string& fetch(const std::string& dotted) const {
        auto it = values_.find(dotted);
        if (it == values_.end()) {
            throw InvalidParameter("missing required field " + dotted);
        }
        return it->second;
    }

    std::map<std::string, std::string> values_;
};

struct OutputOptions {
    std::string directory = "out";
    int samples_per_stroke = 2000;
    int threads = 0;
    bool write_csv = true;
    bool write_json = true;
};

struct PolaritonScan {
    double delta_min = 0.0;
    double delta_max = 0.0;
    int points = 200;
};

/// Fully validated run configuration for the command-line tool.
struct RunConfig {
    SystemParams system;
    FeedbackConfig feedback;
    StrokeSchedule schedule;
    PolaritonScan polariton_scan;
    std::optional<SweepSpec> sweep;
    OutputOptions output;
    PropagationOptions propagation;
    std::vector<std::string> warnings;
};

namespace detail {

/// Reads a rate that may be spelled plain or doubled ("2kappa_c").
inline std::optional<double> dual_rate(const ConfigFile& f, const std::string& section,
                                       const std::string& name) {
    const std::string plain = section + "." + name;
    const std::string doubled = section + ".2" + name;
    if (f.has(plain) && f.has(doubled)) {
        throw InvalidParameter("give exactly one of " + plain + " and " + doubled);
    }
    if (f.has(plain)) return f.number(plain);
    if (f.has(doubled)) return 0.5 * f.number(doubled);
    return std::nullopt;
}

inline AxisSpec read_axis(const ConfigFile& f, const std::string& prefix) {
    AxisSpec ax;
    ax.name = f.text(prefix);
    ax.min = f.number(prefix + "_min");
    ax.max = f.number(prefix + "_max");
    ax.points = f.integer(prefix + "_points");
    const std::string scale = f.text_or(prefix + "_scale", "linear");
    if (scale == "log") {
        ax.log_spacing = true;
    } else if (scale != "linear") {
        throw InvalidParameter("field " + prefix + "_scale must be 'linear' or 'log'");
    }
    if (ax.name == "kappa_fb") {
        // allow the doubled spelling on axis bounds as well
    }
    return ax;
}

inline void check_known_keys(const ConfigFile& f) {
    static const std::set<std::string> known = {
        "system.omega_m", "system.kappa_c", "system.2kappa_c", "system.kappa_1",
        "system.2kappa_1", "system.kappa_2", "system.2kappa_2", "system.gamma",
        "system.2gamma", "system.g", "system.n_th",
        "feedback.eta_d", "feedback.gain", "feedback.kappa_fb", "feedback.2kappa_fb",
        "schedule.delta_i", "schedule.delta_f", "schedule.tau1", "schedule.tau2",
        "schedule.tau3", "schedule.tau4", "schedule.variant",
        "polariton.delta_min", "polariton.delta_max", "polariton.points",
        "sweep.method", "sweep.axis1", "sweep.axis1_min", "sweep.axis1_max",
        "sweep.axis1_points", "sweep.axis1_scale", "sweep.axis2", "sweep.axis2_min",
        "sweep.axis2_max", "sweep.axis2_points", "sweep.axis2_scale",
        "output.directory", "output.samples_per_stroke", "output.threads",
        "output.formats", "propagation.rel_tol", "propagation.abs_tol",
        "propagation.max_step"};
    for (const std::string& k : f.keys()) {
        if (known.count(k) == 0) {
            throw InvalidParameter("unknown config field " + k);
        }
    }
}

} // namespace detail

inline RunConfig load_run_config(const ConfigFile& f) {
    detail::check_known_keys(f);
    RunConfig rc;

    rc.system.omega_m = f.number_or("system.omega_m", 1.0);
    const auto kappa_c = detail::dual_rate(f, "system", "kappa_c");
    if (!kappa_c) throw InvalidParameter("missing required field system.kappa_c (or 2kappa_c)");
    rc.system.kappa_c = *kappa_c;
    const auto kappa_1 = detail::dual_rate(f, "system", "kappa_1");
    const auto kappa_2 = detail::dual_rate(f, "system", "kappa_2");
    if (kappa_1.has_value() != kappa_2.has_value()) {
        throw InvalidParameter("give both system.kappa_1 and system.kappa_2, or neither");
    }
    rc.system.kappa_1 = kappa_1.value_or(0.5 * rc.system.kappa_c);
    rc.system.kappa_2 = kappa_2.value_or(0.5 * rc.system.kappa_c);
    const auto gamma = detail::dual_rate(f, "system", "gamma");
    if (!gamma) throw InvalidParameter("missing required field system.gamma (or 2gamma)");
    rc.system.gamma = *gamma;
    rc.system.g_coupling = f.number("system.g");
    rc.system.n_th = f.number("system.n_th");
    rc.system.validate();
    rc.warnings = rc.system.warnings();

    const double eta_d = f.number_or("feedback.eta_d", 0.6);
    const bool has_gain = f.has("feedback.gain");
    const auto kappa_fb = detail::dual_rate(f, "feedback", "kappa_fb");
    if (has_gain == kappa_fb.has_value()) {
        throw InvalidParameter(
            "give exactly one of feedback.gain and feedback.kappa_fb (or 2kappa_fb)");
    }
    rc.feedback = has_gain ? feedback_from_gain(rc.system, f.number("feedback.gain"), eta_d)
                           : feedback_from_kappa(rc.system, *kappa_fb, eta_d);
    if (rc.feedback.broadens_cavity(rc.system)) {
        rc.warnings.push_back("negative feedback gain: kappa_fb exceeds kappa_c");
    }

    rc.schedule.delta_i = f.number("schedule.delta_i");
    rc.schedule.delta_f = f.number("schedule.delta_f");
    rc.schedule.tau[0] = f.number("schedule.tau1");
    rc.schedule.tau[1] = f.number("schedule.tau2");
    rc.schedule.tau[2] = f.number_or("schedule.tau3", rc.schedule.tau[0]);
    rc.schedule.tau[3] = f.number("schedule.tau4");
    const std::string variant = f.text_or("schedule.variant", "lower");
    if (variant == "lower") {
        rc.schedule.variant = EngineVariant::lower_polariton;
    } else if (variant == "upper") {
        rc.schedule.variant = EngineVariant::upper_polariton;
    } else {
        throw InvalidParameter("schedule.variant must be 'lower' or 'upper'");
    }
    rc.schedule.validate();

    rc.polariton_scan.delta_min =
        f.number_or("polariton.delta_min", std::min(rc.schedule.delta_i, rc.schedule.delta_f));
    rc.polariton_scan.delta_max =
        f.number_or("polariton.delta_max", std::max(rc.schedule.delta_i, rc.schedule.delta_f));
    rc.polariton_scan.points = f.has("polariton.points") ? f.integer("polariton.points") : 200;
    if (rc.polariton_scan.points < 2) {
        throw InvalidParameter("polariton.points must be >= 2");
    }

    rc.propagation.rel_tol = f.number_or("propagation.rel_tol", 1e-10);
    rc.propagation.abs_tol = f.number_or("propagation.abs_tol", 1e-12);
    rc.propagation.max_step = f.number_or("propagation.max_step", 0.0);

    rc.output.directory = f.text_or("output.directory", "out");
    rc.output.samples_per_stroke =
        f.has("output.samples_per_stroke") ? f.integer("output.samples_per_stroke") : 2000;
    if (rc.output.samples_per_stroke < 0) {
        throw InvalidParameter("output.samples_per_stroke must be >= 0");
    }
    rc.output.threads = f.has("output.threads") ? f.integer("output.threads") : 0;
    const std::string formats = f.text_or("output.formats", "csv,json");
    rc.output.write_csv = formats.find("csv") != std::string::npos;
    rc.output.write_json = formats.find("json") != std::string::npos;
    if (!rc.output.write_csv && !rc.output.write_json) {
        throw InvalidParameter("output.formats must mention csv and/or json");
    }

    if (f.has("sweep.axis1") || f.has("sweep.axis2") || f.has("sweep.method")) {
        SweepSpec spec;
        const std::string method = f.text("sweep.method");
        if (method == "node-estimate") {
            spec.method = SweepMethod::node_estimate;
        } else if (method == "full-dynamics") {
            spec.method = SweepMethod::full_dynamics;
        } else {
            throw InvalidParameter("sweep.method must be 'node-estimate' or 'full-dynamics'");
        }
        spec.axis1 = detail::read_axis(f, "sweep.axis1");
        spec.axis2 = detail::read_axis(f, "sweep.axis2");
        spec.params = rc.system;
        spec.feedback = rc.feedback;
        spec.schedule = rc.schedule;
        spec.propagation = rc.propagation;
        spec.threads = rc.output.threads;
        spec.validate();
        rc.sweep = spec;
    }
    return rc;
}

inline RunConfig load_run_config_file(const std::string& path) {
    return load_run_config(ConfigFile::parse_file(path));
}

} // namespace omotto
