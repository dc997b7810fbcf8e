// polariton.hpp — normal-mode (polariton) description: frequencies,
// symplectic transformation, basis change of correlation matrices,
// population extraction.

#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "omotto/errors.hpp"
#include "omotto/lyapunov.hpp"
#include "omotto/model.hpp"

namespace omotto {

/// Splittings below this threshold cannot be ordered reliably.
inline constexpr double kDegeneracyThreshold = 1e-12;

/// Closed-form polariton frequencies (omega_A >= omega_B > 0):
///   omega_{A,B}^2 = [ D^2 - chi^2 + omega_m^2
///                     +- sqrt((D^2 - chi^2 - omega_m^2)^2 - 16 G^2 D omega_m) ] / 2
/// with D = delta_p and chi = kappa_c - kappa_fb. Throws UnstableRegion when
/// omega_B fails to be real positive.
inline std::pair<double, double> polariton_frequencies(const SystemParams& p,
                                                       const FeedbackConfig& fb,
                                                       double delta_p) {
    const double chi = p.kappa_c - fb.kappa_fb;
    const double g = p.g_coupling;
    const double om = p.omega_m;
    const double base = delta_p * delta_p - chi * chi + om * om;
    const double inner =
        std::pow(delta_p * delta_p - chi * chi - om * om, 2) - 16.0 * g * g * delta_p * om;
    auto fail = [&](const char* what) {
        std::ostringstream os;
        os << "no real positive polariton spectrum at delta_p = " << delta_p << " (" << what
           << "); stability boundary is "
           << stability_boundary(g, om, chi);
        throw UnstableRegion(os.str());
    };
    if (inner < 0.0) fail("complex inner radicand");
    const double s = std::sqrt(inner);
    const double lo = base - s;
    if (!(lo > 0.0)) fail("omega_B^2 <= 0");
    return {std::sqrt((base + s) / 2.0), std::sqrt(lo / 2.0)};
}

/// Symplectic polariton basis at a fixed detuning.
///
/// transform holds T with columns ordered (A, B, A^dag, B^dag), matching the
/// eigenvalues (omega_A/2, omega_B/2, -omega_A/2, -omega_B/2) of I H. It
/// satisfies T I T^T = I and G T G = T* (the latter exactly, by
/// construction of the conjugate columns).
struct PolaritonBasis {
    Mat4 transform;
    double omega_a = 0.0;
    double omega_b = 0.0;
    double detuning = 0.0;

    /// Symplectic inverse -I T^T I (no factorization needed).
    Mat4 inverse() const {
        return -symplectic_form() * transform.transpose() * symplectic_form();
    }
};

namespace detail {

/// Bogoliubov norm |u1|^2 + |u2|^2 - |u3|^2 - |u4|^2 = u^T (I G) u*.
inline double bogoliubov_norm(const Vec4& u) {
    return std::norm(u(0)) + std::norm(u(1)) - std::norm(u(2)) - std::norm(u(3));
}

/// Unit symplectic norm, then global phase fixed by making the
/// largest-magnitude component real positive.
inline Vec4 normalize_mode(Vec4 u, double delta_p) {
    const double bn = bogoliubov_norm(u);
    if (!(bn > 0.0)) {
        std::ostringstream os;
        os << "eigenvector at delta_p = " << delta_p
           << " has nonpositive symplectic norm " << bn;
        throw UnstableRegion(os.str());
    }
    u /= std::sqrt(bn);
    int imax = 0;
    u.cwiseAbs().maxCoeff(&imax);
    u *= std::exp(complexd(0.0, -std::arg(u(imax))));
    return u;
}

} // namespace detail

/// Solves the symplectic eigenproblem (I H) T = T D and returns the
/// gauge-fixed basis. Eigenvalues are matched against the closed-form
/// frequencies; disagreement beyond 1e-10 is treated as a defect.
inline PolaritonBasis polariton_basis(const SystemParams& p, const FeedbackConfig& fb,
                                      double delta_p) {
    const auto [omega_a, omega_b] = polariton_frequencies(p, fb, delta_p);
    if (std::abs(omega_a - omega_b) < kDegeneracyThreshold) {
        std::ostringstream os;
        os << "polariton splitting " << omega_a - omega_b
           << " below ordering threshold at delta_p = " << delta_p;
        throw DegenerateSpectrum(os.str());
    }
    const Mat4 m0 = symplectic_form() * hamiltonian_matrix(p, fb, delta_p);
    Eigen::ComplexEigenSolver<Mat4> es(m0, true);
    if (es.info() != Eigen::Success) {
        throw UnstableRegion("eigensolver failed on I H");
    }

    const double scale = std::max(omega_a, 1.0);
    auto pick = [&](double target) {
        int best = -1;
        double dist = std::numeric_limits<double>::max();
        for (int k = 0; k < 4; ++k) {
            const double d = std::abs(es.eigenvalues()(k) - complexd(target, 0.0));
            if (d < dist) {
                dist = d;
                best = k;
            }
        }
        if (dist > 1e-10 * scale) {
            std::ostringstream os;
            os << "numeric eigenvalue misses closed-form target " << target << " by " << dist
               << " at delta_p = " << delta_p;
            throw UnstableRegion(os.str());
        }
        return Vec4(es.eigenvectors().col(best));
    };

    const Vec4 t_a = detail::normalize_mode(pick(0.5 * omega_a), delta_p);
    const Vec4 t_b = detail::normalize_mode(pick(0.5 * omega_b), delta_p);

    PolaritonBasis basis;
    basis.omega_a = omega_a;
    basis.omega_b = omega_b;
    basis.detuning = delta_p;
    basis.transform.col(0) = t_a;
    basis.transform.col(1) = t_b;
    basis.transform.col(2) = mode_swap() * t_a.conjugate();
    basis.transform.col(3) = mode_swap() * t_b.conjugate();
    return basis;
}

/// Correlation matrix and populations in the polariton basis:
/// C_p = T^-1 C T^-T, with n_upper = C_p(3,1) and n_lower = C_p(4,2).
struct PolaritonState {
    double n_upper = 0.0;
    double n_lower = 0.0;
    Mat4 correlations;
};

inline PolaritonState to_polariton(const CorrelationMatrix& state,
                                   const PolaritonBasis& basis) {
    const Mat4 inv = basis.inverse();
    PolaritonState out;
    out.correlations = inv * state.entries * inv.transpose();
    out.n_upper = out.correlations(2, 0).real();
    out.n_lower = out.correlations(3, 1).real();
    return out;
}

} // namespace omotto
