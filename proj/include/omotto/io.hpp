// io.hpp — machine-readable outputs: CSV tables (comma separated, header
// row, LF endings, full-precision floats) and JSON summaries with a
// schema-version field. File contents are deterministic for a given
// configuration.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "omotto/config.hpp"
#include "omotto/lyapunov.hpp"
#include "omotto/polariton.hpp"
#include "omotto/sweep.hpp"
#include "omotto/thermo.hpp"

namespace omotto {

inline constexpr const char* kSchemaVersion = "1";

/// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        // try to shorten while preserving the round trip
        for (int prec = 1; prec < 17; ++prec) {
            char s[40];
            std::snprintf(s, sizeof(s), "%.*g", prec, v);
            double b = 0.0;
            std::sscanf(s, "%lf", &b);
            if (b == v) return s;
        }
    }
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
        out_.open(path, std::ios::binary);  // binary: LF endings everywhere
        if (!out_) {
            throw Error("cannot open output file " + path.string());
        }
        for (std::size_t k = 0; k < header.size(); ++k) {
            out_ << (k ? "," : "") << header[k];
        }
        out_ << "\n";
    }

    CsvWriter& field(double v) {
        sep();
        out_ << format_double(v);
        return *this;
    }
    CsvWriter& field(const std::string& v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& blank() {
        sep();
        return *this;
    }
    void end_row() {
        out_ << "\n";
        first_ = true;
    }

private:
    void sep() {
        if (!first_) out_ << ",";
        first_ = false;
    }
    std::ofstream out_;
    bool first_ = true;
};

using json = nlohmann::ordered_json;

inline json system_json(const SystemParams& p) {
    return json{{"omega_m", p.omega_m}, {"kappa_c", p.kappa_c}, {"kappa_1", p.kappa_1},
                {"kappa_2", p.kappa_2}, {"gamma", p.gamma},     {"g", p.g_coupling},
                {"n_th", p.n_th}};
}

inline json feedback_json(const FeedbackConfig& fb) {
    return json{{"gain", fb.gain},
                {"eta_d", fb.eta_d},
                {"kappa_fb", fb.kappa_fb},
                {"n_opt_fb", fb.n_opt_fb}};
}

inline json schedule_json(const StrokeSchedule& s) {
    return json{{"delta_i", s.delta_i}, {"delta_f", s.delta_f}, {"tau1", s.tau[0]},
                {"tau2", s.tau[1]},     {"tau3", s.tau[2]},     {"tau4", s.tau[3]},
                {"variant", to_string(s.variant)}};
}

inline json stability_json(const StabilityReport& rep) {
    return json{{"hamiltonian_stable", rep.hamiltonian_stable},
                {"dynamically_stable", rep.dynamically_stable},
                {"max_real_eigenvalue", rep.max_real_eigenvalue},
                {"boundary_detuning", rep.boundary_detuning}};
}

inline json hierarchy_json(const HierarchyCheck& h) {
    json margins = json::array();
    for (const auto& m : h.margins) {
        margins.push_back(json{{"relation", m.relation}, {"ratio", m.ratio}});
    }
    return json{{"satisfied", h.satisfied},
                {"occupancy_ok", h.occupancy_ok},
                {"threshold", h.threshold},
                {"margins", margins}};
}

inline json ledger_json(const CycleLedger& ledger) {
    json strokes = json::array();
    for (int k = 0; k < 4; ++k) {
        const StrokeLedger& s = ledger.strokes[k];
        strokes.push_back(json{{"stroke", k + 1},
                               {"isochore", s.isochore},
                               {"delta_u", s.delta_u},
                               {"heat", s.heat},
                               {"work", s.work},
                               {"first_law_defect", s.first_law_defect()}});
    }
    return json{{"strokes", strokes},
                {"w_total", ledger.w_total},
                {"work_extracted", -ledger.w_total},  // positive when the engine delivers
                {"q_absorbed", ledger.q_absorbed},
                {"efficiency", ledger.efficiency},
                {"functional", ledger.functional},
                {"absorbed_stroke", ledger.absorbed_stroke + 1},
                {"delta_u_total", ledger.delta_u_total()},
                {"variant", to_string(ledger.variant)}};
}

inline void write_json_file(const std::filesystem::path& path, json j) {
    json wrapped;
    wrapped["schema_version"] = kSchemaVersion;
    for (auto& [k, v] : j.items()) wrapped[k] = v;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file " + path.string());
    out << wrapped.dump(2) << "\n";
}

/// 4x4 complex matrix in long CSV form (row, col, re, im), 1-based indices.
inline void write_matrix_csv(const std::filesystem::path& path, const Mat4& m) {
    CsvWriter csv(path, {"row", "col", "re", "im"});
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            csv.field(static_cast<double>(i + 1))
                .field(static_cast<double>(j + 1))
                .field(m(i, j).real())
                .field(m(i, j).imag());
            csv.end_row();
        }
    }
}

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const std::vector<TrajectoryPoint>& traj) {
    CsvWriter csv(path, {"t", "delta_p", "n_photon", "n_phonon", "n_upper", "n_lower",
                         "energy", "heat_cum", "work_cum"});
    for (const TrajectoryPoint& pt : traj) {
        csv.field(pt.t)
            .field(pt.delta_p)
            .field(pt.n_photon)
            .field(pt.n_phonon)
            .field(pt.n_upper)
            .field(pt.n_lower)
            .field(pt.energy)
            .field(pt.heat_cum)
            .field(pt.work_cum);
        csv.end_row();
    }
}

inline void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    const std::string a1 = result.spec.axis1.name;
    const std::string a2 = result.spec.axis2.name;
    CsvWriter csv(path, {a1, a2, "eta", "w_total", "q_absorbed", "status", "functional",
                         "hamiltonian_stable", "dynamically_stable"});
    for (const SweepCell& c : result.cells) {
        csv.field(c.axis1).field(c.axis2);
        if (c.status == CellStatus::ok) {
            csv.field(c.eta).field(c.w_total).field(c.q_absorbed);
        } else {
            csv.blank().blank().blank();
        }
        csv.field(std::string(to_string(c.status)))
            .field(std::string(c.functional ? "true" : "false"))
            .field(std::string(c.hamiltonian_stable ? "true" : "false"))
            .field(std::string(c.dynamically_stable ? "true" : "false"));
        csv.end_row();
    }
}

/// Gnuplot-friendly matrix layout of one quantity over the grid.
inline void write_sweep_matrix(const std::filesystem::path& path, const SweepResult& result,
                               double SweepCell::* member) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file " + path.string());
    for (std::size_t i1 = 0; i1 < result.axis1_values.size(); ++i1) {
        for (std::size_t i2 = 0; i2 < result.axis2_values.size(); ++i2) {
            const SweepCell& c = result.at(static_cast<int>(i1), static_cast<int>(i2));
            if (i2) out << " ";
            out << (c.status == CellStatus::ok ? format_double(c.*member) : "nan");
        }
        out << "\n";
    }
}

inline void write_slice_csv(const std::filesystem::path& path, const SliceProfile& slice) {
    CsvWriter csv(path, {slice.swept_axis, "eta", "w_total", "q_absorbed", "status",
                         "eta_estimate", "w_total_estimate", "q_absorbed_estimate"});
    for (const SliceRow& row : slice.rows) {
        csv.field(row.coordinate);
        if (row.cell.status == CellStatus::ok) {
            csv.field(row.cell.eta).field(row.cell.w_total).field(row.cell.q_absorbed);
        } else {
            csv.blank().blank().blank();
        }
        csv.field(std::string(to_string(row.cell.status)));
        if (row.estimate_ok) {
            csv.field(row.eta_estimate).field(row.w_total_estimate).field(row.q_absorbed_estimate);
        } else {
            csv.blank().blank().blank();
        }
        csv.end_row();
    }
}

inline void write_spectrum_csv(const std::filesystem::path& path, const SystemParams& p,
                               const FeedbackConfig& fb, const PolaritonScan& scan) {
    CsvWriter csv(path, {"delta_p", "omega_a", "omega_b", "hamiltonian_stable"});
    for (int k = 0; k < scan.points; ++k) {
        const double f = static_cast<double>(k) / (scan.points - 1);
        const double dp = scan.delta_min + f * (scan.delta_max - scan.delta_min);
        csv.field(dp);
        const double boundary =
            stability_boundary(p.g_coupling, p.omega_m, p.kappa_c - fb.kappa_fb);
        if (dp < boundary) {
            const auto [wa, wb] = polariton_frequencies(p, fb, dp);
            csv.field(wa).field(wb).field(std::string("true"));
        } else {
            csv.blank().blank().field(std::string("false"));
        }
        csv.end_row();
    }
}

} // namespace omotto
