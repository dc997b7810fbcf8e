// cli.hpp — subcommand implementations shared by the command-line tool and
// the integration tests. Each command consumes a validated RunConfig and
// writes its outputs below `out_dir`.

#pragma once

#include <filesystem>
#include <iostream>
#include <string>

#include "omotto/config.hpp"
#include "omotto/io.hpp"

namespace omotto {

namespace detail {

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string());
}

} // namespace detail

/// Steady state at delta_i: correlation matrix, bare and polariton
/// populations, polariton frequencies, stability report.
inline int cmd_steady(const RunConfig& rc, const std::filesystem::path& out_dir,
                      std::ostream& log = std::cout) {
    detail::ensure_dir(out_dir);
    const double dp = rc.schedule.delta_i;
    const StabilityReport rep = classify_stability(rc.system, rc.feedback, dp);
    if (!rep.stable()) {
        throw Unstable("configuration is unstable at delta_i; no steady state");
    }
    const CorrelationMatrix c = steady_state(rc.system, rc.feedback, dp);
    const PolaritonBasis basis = polariton_basis(rc.system, rc.feedback, dp);
    const PolaritonState ps = to_polariton(c, basis);

    if (rc.output.write_csv) {
        write_matrix_csv(out_dir / "steady_matrix.csv", c.entries);
    }
    if (rc.output.write_json) {
        json j;
        j["system"] = system_json(rc.system);
        j["feedback"] = feedback_json(rc.feedback);
        j["delta_p"] = dp;
        j["populations"] = json{{"n_photon", c.photon_number()},
                                {"n_phonon", c.phonon_number()},
                                {"n_upper", ps.n_upper},
                                {"n_lower", ps.n_lower}};
        j["polariton_frequencies"] = json{{"omega_a", basis.omega_a},
                                          {"omega_b", basis.omega_b}};
        j["stability"] = stability_json(rep);
        j["lyapunov_residual"] = lyapunov_residual(
            build_drift(rc.system, rc.feedback, dp).entries, c.entries,
            build_noise(rc.system, rc.feedback).entries);
        write_json_file(out_dir / "steady_summary.json", j);
    }
    log << "steady: n_photon=" << c.photon_number() << " n_phonon=" << c.phonon_number()
        << " n_upper=" << ps.n_upper << " n_lower=" << ps.n_lower << "\n";
    return 0;
}

/// Polariton spectrum scan over the configured detuning window.
inline int cmd_polariton(const RunConfig& rc, const std::filesystem::path& out_dir,
                         std::ostream& log = std::cout) {
    detail::ensure_dir(out_dir);
    write_spectrum_csv(out_dir / "polariton_spectrum.csv", rc.system, rc.feedback,
                       rc.polariton_scan);
    if (rc.output.write_json) {
        json j;
        j["system"] = system_json(rc.system);
        j["feedback"] = feedback_json(rc.feedback);
        j["scan"] = json{{"delta_min", rc.polariton_scan.delta_min},
                         {"delta_max", rc.polariton_scan.delta_max},
                         {"points", rc.polariton_scan.points}};
        j["boundary_detuning"] = stability_boundary(
            rc.system.g_coupling, rc.system.omega_m, rc.system.kappa_c - rc.feedback.kappa_fb);
        write_json_file(out_dir / "polariton_summary.json", j);
    }
    log << "polariton: wrote spectrum scan (" << rc.polariton_scan.points << " points)\n";
    return 0;
}

/// Full-dynamics Otto cycle: trajectory CSV plus ledger JSON.
inline int cmd_cycle(const RunConfig& rc, const std::filesystem::path& out_dir,
                     std::ostream& log = std::cout) {
    detail::ensure_dir(out_dir);
    const CycleLedger ledger = run_cycle(rc.system, rc.feedback, rc.schedule, rc.propagation,
                                         rc.output.samples_per_stroke);
    if (rc.output.write_csv) {
        write_trajectory_csv(out_dir / "trajectory.csv", ledger.trajectory);
    }
    if (rc.output.write_json) {
        json j;
        j["system"] = system_json(rc.system);
        j["feedback"] = feedback_json(rc.feedback);
        j["schedule"] = schedule_json(rc.schedule);
        j["ledger"] = ledger_json(ledger);
        j["hierarchy"] = hierarchy_json(check_hierarchy(rc.system, rc.feedback, rc.schedule));
        const CycleLedger est = estimate_cycle(rc.system, rc.feedback, rc.schedule.delta_i,
                                               rc.schedule.delta_f, rc.schedule.variant);
        j["node_estimate"] = json{{"w_total", est.w_total},
                                  {"q_absorbed", est.q_absorbed},
                                  {"efficiency", est.efficiency}};
        write_json_file(out_dir / "cycle_ledger.json", j);
    }
    log << "cycle: W_tot=" << ledger.w_total << " Q_abs=" << ledger.q_absorbed
        << " eta=" << ledger.efficiency << (ledger.functional ? "" : " (not functional)")
        << "\n";
    return 0;
}

/// Parameter sweep: long-format CSV, argmax JSON, matrix files, and the
/// line-plot slices through both optima.
inline int cmd_sweep(const RunConfig& rc, const std::filesystem::path& out_dir,
                     std::ostream& log = std::cout) {
    if (!rc.sweep.has_value()) {
        throw InvalidParameter("config has no [sweep] section");
    }
    detail::ensure_dir(out_dir);
    const SweepResult result = run_sweep(*rc.sweep);

    if (rc.output.write_csv) {
        write_sweep_csv(out_dir / "sweep.csv", result);
        write_sweep_matrix(out_dir / "sweep_eta.mat", result, &SweepCell::eta);
        write_sweep_matrix(out_dir / "sweep_w_total.mat", result, &SweepCell::w_total);
    }

    auto cell_json = [&](int flat) -> json {
        if (flat < 0) return nullptr;
        const SweepCell& c = result.cells[static_cast<std::size_t>(flat)];
        return json{{result.spec.axis1.name, c.axis1}, {result.spec.axis2.name, c.axis2},
                    {"eta", c.eta},                    {"w_total", c.w_total},
                    {"work_extracted", -c.w_total},    {"q_absorbed", c.q_absorbed}};
    };
    if (rc.output.write_json) {
        json j;
        j["method"] = to_string(result.spec.method);
        j["variant"] = to_string(result.spec.schedule.variant);
        j["axis1"] = json{{"name", result.spec.axis1.name}, {"points", result.spec.axis1.points}};
        j["axis2"] = json{{"name", result.spec.axis2.name}, {"points", result.spec.axis2.points}};
        int n_ok = 0, n_unstable = 0, n_failed = 0;
        for (const SweepCell& c : result.cells) {
            n_ok += c.status == CellStatus::ok;
            n_unstable += c.status == CellStatus::unstable;
            n_failed += c.status == CellStatus::failed;
        }
        j["cells"] = json{{"ok", n_ok}, {"unstable", n_unstable}, {"failed", n_failed}};
        j["max_efficiency"] = cell_json(result.argmax_eta);
        j["max_work"] = cell_json(result.argmax_work);
        write_json_file(out_dir / "sweep_argmax.json", j);
    }

    // slice through each optimum: the line-plot profiles along axis1
    if (rc.output.write_csv) {
        auto write_opt_slice = [&](int flat, const char* stem) {
            if (flat < 0) return;
            const SweepCell& c = result.cells[static_cast<std::size_t>(flat)];
            const SliceProfile slice = extract_slice(result, result.spec.axis2.name, c.axis2);
            write_slice_csv(out_dir / stem, slice);
        };
        write_opt_slice(result.argmax_eta, "slice_max_eta.csv");
        write_opt_slice(result.argmax_work, "slice_max_work.csv");
    }

    log << "sweep: " << result.cells.size() << " cells";
    if (result.argmax_eta >= 0) {
        const SweepCell& c = result.cells[static_cast<std::size_t>(result.argmax_eta)];
        log << ", max eta=" << c.eta << " at (" << result.spec.axis1.name << "=" << c.axis1
            << ", " << result.spec.axis2.name << "=" << c.axis2 << ")";
    }
    log << "\n";
    return 0;
}

/// Validation-only command: derived feedback quantities, stability at both
/// node detunings, hierarchy margins.
inline int cmd_check(const RunConfig& rc, const std::filesystem::path& out_dir,
                     std::ostream& log = std::cout) {
    detail::ensure_dir(out_dir);
    const StabilityReport rep_i = classify_stability(rc.system, rc.feedback, rc.schedule.delta_i);
    const StabilityReport rep_f = classify_stability(rc.system, rc.feedback, rc.schedule.delta_f);
    const HierarchyCheck hier = check_hierarchy(rc.system, rc.feedback, rc.schedule);

    if (rc.output.write_json) {
        json j;
        j["system"] = system_json(rc.system);
        j["feedback"] = feedback_json(rc.feedback);
        j["schedule"] = schedule_json(rc.schedule);
        j["stability_at_delta_i"] = stability_json(rep_i);
        j["stability_at_delta_f"] = stability_json(rep_f);
        j["hierarchy"] = hierarchy_json(hier);
        json warn = json::array();
        for (const std::string& w : rc.warnings) warn.push_back(w);
        j["warnings"] = warn;
        write_json_file(out_dir / "check.json", j);
    }
    log << "check: kappa_fb=" << rc.feedback.kappa_fb << " n_opt_fb=" << rc.feedback.n_opt_fb
        << " stable(delta_i)=" << (rep_i.stable() ? "yes" : "no")
        << " stable(delta_f)=" << (rep_f.stable() ? "yes" : "no")
        << " hierarchy=" << (hier.satisfied ? "satisfied" : "strained") << "\n";
    for (const std::string& w : rc.warnings) log << "warning: " << w << "\n";
    return 0;
}

} // namespace omotto
