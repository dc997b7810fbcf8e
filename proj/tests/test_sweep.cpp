#include <catch2/catch_amalgamated.hpp>

#include <cstring>

#include "omotto/sweep.hpp"

using namespace omotto;
using Catch::Approx;

namespace {

SweepSpec node_spec() {
    SweepSpec spec;
    spec.params.g_coupling = 0.05;
    spec.feedback = feedback_from_kappa(spec.params, 0.0075, 0.6);
    spec.schedule.delta_i = -3.0;
    spec.schedule.delta_f = -0.35;
    spec.schedule.tau = {35.0, 135.0, 35.0, 20.0 / spec.params.gamma};
    spec.method = SweepMethod::node_estimate;
    spec.axis1 = AxisSpec{"delta_f", -0.8, -0.2, 4, false};
    spec.axis2 = AxisSpec{"g", 0.02, 0.08, 3, false};
    spec.threads = 1;
    return spec;
}

bool cells_identical(const SweepResult& a, const SweepResult& b) {
    if (a.cells.size() != b.cells.size()) return false;
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        const SweepCell& x = a.cells[k];
        const SweepCell& y = b.cells[k];
        if (std::memcmp(&x.eta, &y.eta, sizeof(double)) != 0) return false;
        if (std::memcmp(&x.w_total, &y.w_total, sizeof(double)) != 0) return false;
        if (std::memcmp(&x.q_absorbed, &y.q_absorbed, sizeof(double)) != 0) return false;
        if (x.status != y.status || x.functional != y.functional) return false;
    }
    return true;
}

} // namespace

TEST_CASE("axis construction") {
    AxisSpec lin{"g", 0.0, 1.0, 5, false};
    const auto lv = lin.values();
    REQUIRE(lv.size() == 5);
    CHECK(lv.front() == 0.0);
    CHECK(lv.back() == 1.0);
    CHECK(lv[2] == Approx(0.5));

    AxisSpec lg{"kappa_fb", 1e-4, 1e-2, 3, true};
    const auto gv = lg.values();
    CHECK(gv[1] == Approx(1e-3).epsilon(1e-12));

    AxisSpec bad{"nonsense", 0.0, 1.0, 3, false};
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    AxisSpec badlog{"g", -1.0, 1.0, 3, true};
    CHECK_THROWS_AS(badlog.validate(), InvalidParameter);
}

TEST_CASE("2x2 node sweep decomposes into direct estimate calls") {
    SweepSpec spec = node_spec();
    spec.axis1.points = 2;
    spec.axis2.points = 2;
    const SweepResult result = run_sweep(spec);
    REQUIRE(result.cells.size() == 4);

    for (const SweepCell& cell : result.cells) {
        REQUIRE(cell.status == CellStatus::ok);
        SystemParams p = spec.params;
        p.g_coupling = cell.axis2;
        const FeedbackConfig fb = spec.feedback;
        const CycleLedger direct = estimate_cycle(p, fb, spec.schedule.delta_i, cell.axis1,
                                                  spec.schedule.variant);
        REQUIRE(std::memcmp(&cell.eta, &direct.efficiency, sizeof(double)) == 0);
        REQUIRE(std::memcmp(&cell.w_total, &direct.w_total, sizeof(double)) == 0);
        REQUIRE(std::memcmp(&cell.q_absorbed, &direct.q_absorbed, sizeof(double)) == 0);
    }
}

TEST_CASE("parallel and serial execution produce identical grids") {
    SweepSpec serial = node_spec();
    serial.axis1.points = 5;
    serial.axis2.points = 5;
    serial.threads = 1;
    SweepSpec parallel = serial;
    parallel.threads = 4;
    const SweepResult a = run_sweep(serial);
    const SweepResult b = run_sweep(parallel);
    REQUIRE(cells_identical(a, b));
}

TEST_CASE("rerunning a single cell reproduces the grid value exactly") {
    SweepSpec spec = node_spec();
    const SweepResult grid = run_sweep(spec);
    const SweepCell& probe = grid.at(2, 1);

    SweepSpec single = spec;
    single.axis1 = AxisSpec{"delta_f", probe.axis1, probe.axis1, 1, false};
    single.axis2 = AxisSpec{"g", probe.axis2, probe.axis2, 1, false};
    const SweepResult one = run_sweep(single);
    REQUIRE(one.cells.size() == 1);
    REQUIRE(std::memcmp(&one.cells[0].eta, &probe.eta, sizeof(double)) == 0);
    REQUIRE(std::memcmp(&one.cells[0].w_total, &probe.w_total, sizeof(double)) == 0);
}

TEST_CASE("stability mask matches pointwise classification") {
    // delta_f range deliberately crossing the closed-form boundary
    SweepSpec spec = node_spec();
    spec.axis1 = AxisSpec{"delta_f", -0.30, -0.02, 15, false};
    spec.axis2 = AxisSpec{"g", 0.01, 0.10, 7, false};
    const SweepResult result = run_sweep(spec);

    int unstable_seen = 0;
    for (const SweepCell& cell : result.cells) {
        SystemParams p = spec.params;
        p.g_coupling = cell.axis2;
        const StabilityReport rep_f = classify_stability(p, spec.feedback, cell.axis1);
        const StabilityReport rep_i =
            classify_stability(p, spec.feedback, spec.schedule.delta_i);
        const bool stable = rep_f.hamiltonian_stable && rep_f.dynamically_stable &&
                            rep_i.hamiltonian_stable && rep_i.dynamically_stable;
        REQUIRE((cell.status == CellStatus::unstable) == !stable);
        if (!stable) {
            ++unstable_seen;
            REQUIRE(cell.eta == 0.0);  // unstable cells carry no thermodynamic values
        }
    }
    REQUIRE(unstable_seen > 0);
}

TEST_CASE("efficiency grows toward small |delta_f| along stable rows") {
    SweepSpec spec = node_spec();
    spec.axis1 = AxisSpec{"delta_f", -0.9, -0.3, 7, false};
    spec.axis2 = AxisSpec{"g", 0.05, 0.05, 1, false};
    const SweepResult result = run_sweep(spec);
    double previous = -1.0;
    for (std::size_t k = 0; k < result.cells.size(); ++k) {
        const SweepCell& cell = result.cells[k];
        REQUIRE(cell.status == CellStatus::ok);
        REQUIRE(cell.functional);
        REQUIRE(cell.eta > previous);  // |delta_f| shrinking, eta rising
        previous = cell.eta;
    }
}

TEST_CASE("slices") {
    SweepSpec spec = node_spec();
    const SweepResult result = run_sweep(spec);

    SECTION("endpoint slice equals the boundary row") {
        const SliceProfile slice = extract_slice(result, "delta_f", result.axis1_values[0]);
        REQUIRE(slice.rows.size() == result.axis2_values.size());
        for (std::size_t k = 0; k < slice.rows.size(); ++k) {
            REQUIRE(slice.rows[k].cell.axis2 == result.at(0, static_cast<int>(k)).axis2);
            REQUIRE(slice.rows[k].cell.eta == result.at(0, static_cast<int>(k)).eta);
        }
    }
    SECTION("overlay equals direct estimate calls") {
        const SliceProfile slice = extract_slice(result, "g", result.axis2_values[1]);
        for (const SliceRow& row : slice.rows) {
            REQUIRE(row.estimate_ok);
            // node-estimate sweep: overlay must equal the cell itself
            REQUIRE(row.eta_estimate == row.cell.eta);
        }
    }
    SECTION("off-grid requests are rejected") {
        CHECK_THROWS_AS(extract_slice(result, "delta_f", -0.123456), OffGrid);
        CHECK_THROWS_AS(extract_slice(result, "tau1", -0.8), OffGrid);
    }
}

TEST_CASE("full-dynamics sweep on a small grid") {
    SweepSpec spec = node_spec();
    spec.params.g_coupling = 0.1;
    spec.method = SweepMethod::full_dynamics;
    spec.axis1 = AxisSpec{"kappa_fb", 0.004, 0.016, 3, true};
    spec.axis2 = AxisSpec{"tau1", 20.0, 80.0, 3, true};
    spec.threads = 2;
    const SweepResult result = run_sweep(spec);

    int ok = 0;
    for (const SweepCell& cell : result.cells) {
        if (cell.status == CellStatus::ok) ++ok;
    }
    REQUIRE(ok == 9);
    REQUIRE(result.argmax_work >= 0);
    // argmax bookkeeping: no ok cell beats the recorded optimum
    const SweepCell& best = result.cells[static_cast<std::size_t>(result.argmax_work)];
    for (const SweepCell& cell : result.cells) {
        REQUIRE(-cell.w_total <= -best.w_total);
    }
    // the swept kappa_fb rebuilds the derived feedback pair per cell
    const SliceProfile slice = extract_slice(result, "tau1", result.axis2_values[0]);
    for (const SliceRow& row : slice.rows) {
        REQUIRE(row.estimate_ok);
        REQUIRE(row.eta_estimate >= 0.0);
    }
}
