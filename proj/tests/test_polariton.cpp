#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include "omotto/polariton.hpp"
#include "oracle_utils.hpp"

using namespace omotto;
using Catch::Approx;

namespace {

SystemParams spectrum_params() {
    SystemParams p;  // spectrum scan point: G = 0.05, no feedback
    p.g_coupling = 0.05;
    return p;
}

} // namespace

TEST_CASE("uncoupled modes: frequencies are |delta_p| and omega_m") {
    SystemParams p = spectrum_params();
    p.g_coupling = 0.0;
    const FeedbackConfig fb = feedback_from_gain(p, 0.0, 0.6);
    {
        const auto [wa, wb] = polariton_frequencies(p, fb, -3.0);
        CHECK(wa == Approx(3.0).epsilon(1e-14));
        CHECK(wb == Approx(1.0).epsilon(1e-14));
    }
    {
        const auto [wa, wb] = polariton_frequencies(p, fb, -0.25);
        CHECK(wa == Approx(1.0).epsilon(1e-14));
        CHECK(wb == Approx(0.25).epsilon(1e-14));
    }
}

TEST_CASE("avoided crossing at delta_p = -omega_m splits by 2G") {
    SystemParams p = spectrum_params();
    const FeedbackConfig fb = feedback_from_gain(p, 0.0, 0.6);

    SECTION("weak coupling expansion") {
        p.g_coupling = 1e-3;
        const auto [wa, wb] = polariton_frequencies(p, fb, -1.0);
        // sqrt(1 + 2G) - sqrt(1 - 2G) = 2G + O(G^3)
        CHECK(std::abs((wa - wb) - 2e-3) < 3e-9);
    }
    SECTION("resolved-sideband coupling within 1%") {
        const auto [wa, wb] = polariton_frequencies(p, fb, -1.0);
        CHECK(std::abs((wa - wb) - 0.1) / 0.1 < 0.01);
    }
}

TEST_CASE("numeric spectrum of I H matches the closed form across the scan") {
    const SystemParams p = spectrum_params();
    const FeedbackConfig fb = feedback_from_gain(p, 0.0, 0.6);
    for (int k = 0; k < 100; ++k) {
        const double dp = -3.0 + (k / 99.0) * (-0.05 - (-3.0));
        const auto [wa, wb] = polariton_frequencies(p, fb, dp);
        // oracle: raw Eigen spectrum of I H, sorted
        Eigen::ComplexEigenSolver<Mat4> es(symplectic_form() * hamiltonian_matrix(p, fb, dp),
                                           false);
        Eigen::Vector4d re = es.eigenvalues().real();
        std::sort(re.data(), re.data() + 4);
        Eigen::Vector4d target;
        target << -wa / 2, -wb / 2, wb / 2, wa / 2;
        REQUIRE((re - target).cwiseAbs().maxCoeff() < 1e-10);
        REQUIRE(es.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("frequencies are continuous, ordered, and vanish at the boundary") {
    SystemParams p = spectrum_params();
    const FeedbackConfig fb = feedback_from_kappa(p, 0.0075, 0.6);
    const double boundary =
        stability_boundary(p.g_coupling, p.omega_m, p.kappa_c - fb.kappa_fb);

    double prev_wa = 0.0, prev_wb = 0.0;
    const double start = -3.0, stop = boundary * (1.0 + 1e-6);
    const int n = 400;
    for (int k = 0; k < n; ++k) {
        const double dp = start + (stop - start) * k / (n - 1);
        const auto [wa, wb] = polariton_frequencies(p, fb, dp);
        REQUIRE(wa > wb);
        REQUIRE(wb > 0.0);
        if (k > 0) {
            CHECK(std::abs(wa - prev_wa) < 0.05);
            CHECK(std::abs(wb - prev_wb) < 0.05);
        }
        prev_wa = wa;
        prev_wb = wb;
    }
    // omega_B -> 0+ approaching the boundary from below
    CHECK(prev_wb < 2e-3);
    CHECK_THROWS_AS(polariton_frequencies(p, fb, boundary * 0.9), UnstableRegion);
}

TEST_CASE("degenerate spectrum is refused") {
    SystemParams p = spectrum_params();
    p.g_coupling = 0.0;
    const FeedbackConfig fb = feedback_from_gain(p, 0.0, 0.6);
    CHECK_THROWS_AS(polariton_basis(p, fb, -1.0), DegenerateSpectrum);
}

TEST_CASE("basis at G = 0 is a mode permutation") {
    SystemParams p = spectrum_params();
    p.g_coupling = 0.0;
    const FeedbackConfig fb = feedback_from_gain(p, 0.0, 0.6);

    SECTION("|delta| > omega_m: A is the cavity mode") {
        const PolaritonBasis b = polariton_basis(p, fb, -3.0);
        REQUIRE((b.transform - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("|delta| < omega_m: labels swap across the crossing") {
        const PolaritonBasis b = polariton_basis(p, fb, -0.5);
        Mat4 perm = Mat4::Zero();
        perm(0, 1) = 1.0;  // a contributes to B
        perm(1, 0) = 1.0;  // b contributes to A
        perm(2, 3) = 1.0;
        perm(3, 2) = 1.0;
        REQUIRE((b.transform - perm).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("symplectic and reality identities, round trip, eigenvalue match") {
    oracle::StableConfigSampler sampler(23);
    for (int trial = 0; trial < 25; ++trial) {
        const auto draw = sampler.next();
        PolaritonBasis basis;
        try {
            basis = polariton_basis(draw.params, draw.feedback, draw.delta_p);
        } catch (const UnstableRegion&) {
            continue;  // dynamically stable but Hamiltonian-unstable corner
        }
        const Mat4& t = basis.transform;
        REQUIRE((t * symplectic_form() * t.transpose() - symplectic_form())
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
        REQUIRE((mode_swap() * t * mode_swap() - t.conjugate()).cwiseAbs().maxCoeff() ==
                0.0);

        const CorrelationMatrix c =
            steady_state(draw.params, draw.feedback, draw.delta_p);
        const PolaritonState ps = to_polariton(c, basis);
        // commutator entries preserved by the basis change
        const complexd ca = ps.correlations(0, 2) - ps.correlations(2, 0);
        const complexd cb = ps.correlations(1, 3) - ps.correlations(3, 1);
        const double scale = std::max(1.0, c.entries.cwiseAbs().maxCoeff());
        REQUIRE(std::abs(ca - 1.0) < 1e-10 * scale);
        REQUIRE(std::abs(cb - 1.0) < 1e-10 * scale);

        // round trip back to the bare basis
        const Mat4 back = t * ps.correlations * t.transpose();
        REQUIRE((back - c.entries).cwiseAbs().maxCoeff() < 1e-10 * scale);

        // populations agree with a direct row contraction of T^-1
        const Mat4 inv = basis.inverse();
        const complexd na = (inv.row(2) * c.entries * inv.row(0).transpose())(0, 0);
        const complexd nb = (inv.row(3) * c.entries * inv.row(1).transpose())(0, 0);
        REQUIRE(ps.n_upper == Approx(na.real()).margin(1e-12 * scale));
        REQUIRE(ps.n_lower == Approx(nb.real()).margin(1e-12 * scale));
    }
}

TEST_CASE("polariton populations at G = 0 track the bath occupancies") {
    SystemParams p = spectrum_params();
    p.g_coupling = 0.0;
    const FeedbackConfig fb = feedback_from_kappa(p, 0.0075, 0.6);

    SECTION("large detuning: B is phonon-like") {
        const CorrelationMatrix c = steady_state(p, fb, -3.0);
        const PolaritonState ps = to_polariton(c, polariton_basis(p, fb, -3.0));
        CHECK(ps.n_lower == Approx(p.n_th).epsilon(1e-10));
        CHECK(ps.n_upper == Approx(fb.n_opt_fb).epsilon(5e-3));
    }
    SECTION("small detuning: labels swap") {
        const CorrelationMatrix c = steady_state(p, fb, -0.5);
        const PolaritonState ps = to_polariton(c, polariton_basis(p, fb, -0.5));
        CHECK(ps.n_upper == Approx(p.n_th).epsilon(1e-10));
        CHECK(ps.n_lower == Approx(fb.n_opt_fb).epsilon(5e-2));
    }
}

TEST_CASE("initial node of the cycle: polariton and bare populations nearly match") {
    // at delta_i = -3 on the baseline set, N_B ~ N_b and N_A ~ N_a
    const SystemParams p = spectrum_params();
    const FeedbackConfig fb = feedback_from_kappa(p, 0.0075, 0.6);
    const CorrelationMatrix c = steady_state(p, fb, -3.0);
    const PolaritonState ps = to_polariton(c, polariton_basis(p, fb, -3.0));
    CHECK(std::abs(ps.n_lower - c.phonon_number()) / c.phonon_number() < 0.05);
    CHECK(std::abs(ps.n_upper - c.photon_number()) / c.photon_number() < 0.05);
}
