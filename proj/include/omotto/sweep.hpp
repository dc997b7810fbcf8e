// sweep.hpp — parameter-grid drivers for the contour maps: (delta_f, G)
// node-estimate sweeps and (kappa_fb, tau1) full-dynamics sweeps, with
// stability masking and optimum extraction. Cells are independent pure
// computations; the driver may run them on any number of threads and the
// assembled result is identical either way.

#pragma once

#include <atomic>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "omotto/errors.hpp"
#include "omotto/lyapunov.hpp"
#include "omotto/model.hpp"
#include "omotto/thermo.hpp"

namespace omotto {

enum class SweepMethod { node_estimate, full_dynamics };

inline const char* to_string(SweepMethod m) {
    return m == SweepMethod::node_estimate ? "node-estimate" : "full-dynamics";
}

/// One named sweep axis. Supported names: delta_f, delta_i, g, kappa_fb,
/// tau1 (tau3 follows tau1), n_th.
struct AxisSpec {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    int points = 0;
    bool log_spacing = false;

    void validate() const {
        static const char* known[] = {"delta_f", "delta_i", "g", "kappa_fb", "tau1", "n_th"};
        bool ok = false;
        for (const char* k : known) ok = ok || name == k;
        if (!ok) throw InvalidParameter("unknown sweep axis '" + name + "'");
        if (points < 1) throw InvalidParameter("sweep axis '" + name + "' needs >= 1 point");
        if (points > 1 && !(min < max)) {
            throw InvalidParameter("sweep axis '" + name + "' needs min < max");
        }
        if (log_spacing && !(min > 0.0)) {
            throw InvalidParameter("log-spaced axis '" + name + "' needs min > 0");
        }
    }

    std::vector<double> values() const {
        std::vector<double> v(points);
        if (points == 1) {
            v[0] = min;
            return v;
        }
        for (int k = 0; k < points; ++k) {
            const double f = static_cast<double>(k) / (points - 1);
            v[k] = log_spacing ? min * std::pow(max / min, f) : min + f * (max - min);
        }
        return v;
    }
};

struct SweepSpec {
    AxisSpec axis1;
    AxisSpec axis2;
    SweepMethod method = SweepMethod::node_estimate;
    SystemParams params;
    FeedbackConfig feedback;
    StrokeSchedule schedule;
    PropagationOptions propagation;
    int threads = 0;  ///< 0: hardware concurrency

    void validate() const {
        axis1.validate();
        axis2.validate();
        if (axis1.name == axis2.name) {
            throw InvalidParameter("sweep axes must differ");
        }
        params.validate();
        schedule.validate();
    }
};

enum class CellStatus { ok, unstable, failed };

inline const char* to_string(CellStatus s) {
    switch (s) {
        case CellStatus::ok: return "ok";
        case CellStatus::unstable: return "unstable";
        default: return "failed";
    }
}

struct SweepCell {
    double axis1 = 0.0;
    double axis2 = 0.0;
    CellStatus status = CellStatus::failed;
    double eta = 0.0;
    double w_total = 0.0;
    double q_absorbed = 0.0;
    bool functional = false;
    bool hamiltonian_stable = false;  ///< at both node detunings
    bool dynamically_stable = false;  ///< at both node detunings
    std::string error;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<double> axis1_values;
    std::vector<double> axis2_values;
    std::vector<SweepCell> cells;  ///< row-major: [i1 * n2 + i2]
    int argmax_eta = -1;           ///< flat index; -1 if no functional cell
    int argmax_work = -1;          ///< flat index of max -w_total

    const SweepCell& at(int i1, int i2) const {
        return cells[static_cast<std::size_t>(i1) * axis2_values.size() + i2];
    }
};

namespace detail {

struct CellConfig {
    SystemParams params;
    FeedbackConfig feedback;
    StrokeSchedule schedule;
};

inline void apply_axis(CellConfig& cfg, const std::string& name, double value) {
    if (name == "delta_f") {
        cfg.schedule.delta_f = value;
    } else if (name == "delta_i") {
        cfg.schedule.delta_i = value;
    } else if (name == "g") {
        cfg.params.g_coupling = value;
    } else if (name == "n_th") {
        cfg.params.n_th = value;
    } else if (name == "tau1") {
        cfg.schedule.tau[0] = value;
        cfg.schedule.tau[2] = value;
    } else if (name == "kappa_fb") {
        cfg.feedback = feedback_from_kappa(cfg.params, value, cfg.feedback.eta_d);
    } else {
        throw InvalidParameter("unknown sweep axis '" + name + "'");
    }
}

inline SweepCell evaluate_cell(const SweepSpec& spec, double v1, double v2) {
    SweepCell cell;
    cell.axis1 = v1;
    cell.axis2 = v2;
    try {
        CellConfig cfg{spec.params, spec.feedback, spec.schedule};
        apply_axis(cfg, spec.axis1.name, v1);
        apply_axis(cfg, spec.axis2.name, v2);

        const StabilityReport rep_i =
            classify_stability(cfg.params, cfg.feedback, cfg.schedule.delta_i);
        const StabilityReport rep_f =
            classify_stability(cfg.params, cfg.feedback, cfg.schedule.delta_f);
        cell.hamiltonian_stable = rep_i.hamiltonian_stable && rep_f.hamiltonian_stable;
        cell.dynamically_stable = rep_i.dynamically_stable && rep_f.dynamically_stable;
        if (!cell.hamiltonian_stable || !cell.dynamically_stable) {
            cell.status = CellStatus::unstable;
            return cell;
        }

        const CycleLedger ledger =
            spec.method == SweepMethod::node_estimate
                ? estimate_cycle(cfg.params, cfg.feedback, cfg.schedule.delta_i,
                                 cfg.schedule.delta_f, cfg.schedule.variant)
                : run_cycle(cfg.params, cfg.feedback, cfg.schedule, spec.propagation,
                            /*samples_per_stroke=*/0);
        cell.eta = ledger.efficiency;
        cell.w_total = ledger.w_total;
        cell.q_absorbed = ledger.q_absorbed;
        cell.functional = ledger.functional;
        cell.status = CellStatus::ok;
    } catch (const Error& e) {
        cell.status = CellStatus::failed;
        cell.error = e.what();
    }
    return cell;
}

} // namespace detail

/// Runs the full grid. Individual cell errors are recorded per cell and
/// never abort the sweep; output ordering is independent of the degree of
/// parallelism.
inline SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult result;
    result.spec = spec;
    result.axis1_values = spec.axis1.values();
    result.axis2_values = spec.axis2.values();
    const std::size_t n1 = result.axis1_values.size();
    const std::size_t n2 = result.axis2_values.size();
    result.cells.resize(n1 * n2);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= n1 * n2) return;
            const std::size_t i1 = idx / n2;
            const std::size_t i2 = idx % n2;
            result.cells[idx] =
                detail::evaluate_cell(spec, result.axis1_values[i1], result.axis2_values[i2]);
        }
    };

    unsigned n_threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                          : std::thread::hardware_concurrency();
    if (n_threads <= 1 || result.cells.size() == 1) {
        worker();
    } else {
        n_threads = std::min<unsigned>(n_threads, result.cells.size());
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    double best_eta = 0.0, best_work = 0.0;
    for (std::size_t idx = 0; idx < result.cells.size(); ++idx) {
        const SweepCell& c = result.cells[idx];
        if (c.status != CellStatus::ok) continue;
        if (c.functional && c.eta > best_eta) {
            best_eta = c.eta;
            result.argmax_eta = static_cast<int>(idx);
        }
        if (-c.w_total > best_work) {
            best_work = -c.w_total;
            result.argmax_work = static_cast<int>(idx);
        }
    }
    return result;
}

/// One row of a 1-D profile through the grid, with the node-estimate
/// overlay re-evaluated at the same cell configuration (the stationary-state
/// "red line" of the contour figures).
struct SliceRow {
    double coordinate = 0.0;
    SweepCell cell;
    bool estimate_ok = false;
    double eta_estimate = 0.0;
    double w_total_estimate = 0.0;
    double q_absorbed_estimate = 0.0;
};

struct SliceProfile {
    std::string swept_axis;   ///< name of the axis the profile runs along
    std::string fixed_axis;
    double fixed_value = 0.0;
    std::vector<SliceRow> rows;
};

/// Extracts the row/column through `value` on the named axis. The value
/// must lie on the grid (relative tolerance 1e-12).
inline SliceProfile extract_slice(const SweepResult& result, const std::string& axis_name,
                                  double value) {
    const bool on_axis1 = axis_name == result.spec.axis1.name;
    if (!on_axis1 && axis_name != result.spec.axis2.name) {
        throw OffGrid("axis '" + axis_name + "' is not part of this sweep");
    }
    const std::vector<double>& fixed_vals =
        on_axis1 ? result.axis1_values : result.axis2_values;
    int fixed_idx = -1;
    for (std::size_t k = 0; k < fixed_vals.size(); ++k) {
        if (std::abs(fixed_vals[k] - value) <= 1e-12 * std::max(1.0, std::abs(value))) {
            fixed_idx = static_cast<int>(k);
            break;
        }
    }
    if (fixed_idx < 0) {
        std::ostringstream os;
        os << "value " << value << " is not a grid coordinate of axis '" << axis_name << "'";
        throw OffGrid(os.str());
    }

    SliceProfile profile;
    profile.fixed_axis = axis_name;
    profile.fixed_value = fixed_vals[fixed_idx];
    profile.swept_axis = on_axis1 ? result.spec.axis2.name : result.spec.axis1.name;
    const std::vector<double>& run_vals =
        on_axis1 ? result.axis2_values : result.axis1_values;

    for (std::size_t k = 0; k < run_vals.size(); ++k) {
        SliceRow row;
        row.coordinate = run_vals[k];
        row.cell = on_axis1 ? result.at(fixed_idx, static_cast<int>(k))
                            : result.at(static_cast<int>(k), fixed_idx);
        try {
            detail::CellConfig cfg{result.spec.params, result.spec.feedback,
                                   result.spec.schedule};
            detail::apply_axis(cfg, result.spec.axis1.name, row.cell.axis1);
            detail::apply_axis(cfg, result.spec.axis2.name, row.cell.axis2);
            const CycleLedger est = estimate_cycle(cfg.params, cfg.feedback,
                                                   cfg.schedule.delta_i, cfg.schedule.delta_f,
                                                   cfg.schedule.variant);
            row.estimate_ok = true;
            row.eta_estimate = est.efficiency;
            row.w_total_estimate = est.w_total;
            row.q_absorbed_estimate = est.q_absorbed;
        } catch (const Error&) {
            row.estimate_ok = false;
        }
        profile.rows.push_back(row);
    }
    return profile;
}

} // namespace omotto
