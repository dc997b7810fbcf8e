// lyapunov.hpp — steady-state correlation matrices and stability
// classification for fixed-detuning configurations.

#pragma once

#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "omotto/errors.hpp"
#include "omotto/model.hpp"

namespace omotto {

/// Real parts of drift eigenvalues are compared against this margin when
/// deciding dynamical stability, to avoid marginal false positives.
inline constexpr double kStabilityMargin = -1e-12;

/// Second-moment matrix C = <a_vec a_vec^T> in the (a, b, a^dag, b^dag)
/// ordering. C(3,1) = <a^dag a>, C(4,2) = <b^dag b> (1-based).
struct CorrelationMatrix {
    Mat4 entries;

    double photon_number() const { return entries(2, 0).real(); }
    double phonon_number() const { return entries(3, 1).real(); }

    /// Deviation of the commutator entries (1,3)-(3,1) and (2,4)-(4,2)
    /// from 1 (max over both, absolute).
    double commutator_defect() const {
        const complexd ca = entries(0, 2) - entries(2, 0) - 1.0;
        const complexd cb = entries(1, 3) - entries(3, 1) - 1.0;
        return std::max(std::abs(ca), std::abs(cb));
    }

    /// Deviation from the conjugation structure C = G C^dag G (max norm).
    double conjugation_defect() const {
        return (entries - hermitian_image(entries)).cwiseAbs().maxCoeff();
    }
};

inline double spectral_abscissa(const Mat4& drift) {
    Eigen::ComplexEigenSolver<Mat4> es(drift, false);
    return es.eigenvalues().real().maxCoeff();
}

/// Max-norm residual of M C + C M^T + N relative to the max norm of N.
inline double lyapunov_residual(const Mat4& drift, const Mat4& c, const Mat4& noise) {
    const Mat4 r = drift * c + c * drift.transpose() + noise;
    return r.cwiseAbs().maxCoeff() / noise.cwiseAbs().maxCoeff();
}

/// Linear operator X -> M X + X M^T as a dense 16x16 system, factored once.
/// solve() applies iterative refinement so that residuals stay near machine
/// precision even for stiff rate hierarchies (gamma ~ 1e-7 vs |Delta_p| ~ 10).
class LyapunovOperator {
public:
    using Mat16 = Eigen::Matrix<complexd, 16, 16>;
    using Vec16 = Eigen::Matrix<complexd, 16, 1>;

    explicit LyapunovOperator(const Mat4& drift) : drift_(drift) {
        op_.setZero();
        // vec(M X) = (I (x) M) vec(X), vec(X M^T) = (M (x) I) vec(X),
        // column-major vec.
        for (int j = 0; j < 4; ++j) {
            for (int i = 0; i < 4; ++i) {
                for (int k = 0; k < 4; ++k) {
                    op_(4 * j + i, 4 * j + k) += drift_(i, k);
                    op_(4 * j + i, 4 * k + i) += drift_(j, k);
                }
            }
        }
        lu_.compute(op_);
    }

    /// Solves M X + X M^T = rhs.
    Mat4 solve(const Mat4& rhs) const {
        const Vec16 b = vec(rhs);
        Vec16 x = lu_.solve(b);
        // refinement: a couple of passes are enough in double precision
        for (int pass = 0; pass < 3; ++pass) {
            const Vec16 r = b - op_ * x;
            const double rn = r.cwiseAbs().maxCoeff();
            if (rn <= 1e-14 * b.cwiseAbs().maxCoeff() + 1e-300) break;
            x += lu_.solve(r);
        }
        if (!x.allFinite()) {
            throw SingularSystem("Lyapunov operator is numerically singular");
        }
        return unvec(x);
    }

private:
    static Vec16 vec(const Mat4& m) {
        Vec16 v;
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) v(4 * j + i) = m(i, j);
        return v;
    }
    static Mat4 unvec(const Vec16& v) {
        Mat4 m;
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) m(i, j) = v(4 * j + i);
        return m;
    }

    Mat4 drift_;
    Mat16 op_;
    Eigen::PartialPivLU<Mat16> lu_;
};

/// Stationary solution of M C + C M^T + N = 0.
///
/// The solve is followed by one symmetrization with the conjugation image
/// (never by forcing the commutator entries); structural defects beyond
/// tolerance are reported as SingularSystem.
inline CorrelationMatrix steady_state(const DriftMatrix& drift, const NoiseMatrix& noise) {
    const double abscissa = spectral_abscissa(drift.entries);
    if (abscissa >= kStabilityMargin) {
        std::ostringstream os;
        os << "drift at detuning " << drift.detuning
           << " is not dynamically stable (max Re eigenvalue = " << abscissa << ")";
        throw Unstable(os.str());
    }
    LyapunovOperator op(drift.entries);
    Mat4 c = op.solve(-noise.entries);
    c = 0.5 * (c + hermitian_image(c));

    CorrelationMatrix out{c};
    const double res = lyapunov_residual(drift.entries, c, noise.entries);
    if (!(res <= 1e-10)) {
        std::ostringstream os;
        os << "Lyapunov residual " << res << " exceeds 1e-10";
        throw SingularSystem(os.str());
    }
    if (!(out.commutator_defect() <= 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff()))) {
        throw SingularSystem("steady state violates the commutator constraint");
    }
    return out;
}

inline CorrelationMatrix steady_state(const SystemParams& p, const FeedbackConfig& fb,
                                      double delta_p) {
    return steady_state(build_drift(p, fb, delta_p), build_noise(p, fb));
}

/// Closed-form Hamiltonian stability boundary: the effective model is
/// stable for delta_p strictly below
///   -2 G^2/omega_m - sqrt(4 G^4/omega_m^2 + (kappa_c - kappa_fb)^2).
inline double stability_boundary(double g_coupling, double omega_m, double chi) {
    const double q = 2.0 * g_coupling * g_coupling / omega_m;
    return -q - std::sqrt(q * q + chi * chi);
}

struct StabilityReport {
    bool hamiltonian_stable = false;  ///< omega_B real positive (closed form)
    bool dynamically_stable = false;  ///< all drift eigenvalues in the left half-plane
    double max_real_eigenvalue = 0.0;
    double boundary_detuning = 0.0;   ///< critical Delta_p of the closed form

    bool stable() const { return hamiltonian_stable && dynamically_stable; }
};

/// Both stability flags for a configuration: the Hamiltonian flag from the
/// closed-form boundary, the dynamical flag from the numerically computed
/// drift spectrum. The two criteria do not coincide in general and are
/// reported separately.
inline StabilityReport classify_stability(const DriftMatrix& drift, const SystemParams& p,
                                          const FeedbackConfig& fb, double delta_p) {
    StabilityReport rep;
    rep.boundary_detuning =
        stability_boundary(p.g_coupling, p.omega_m, p.kappa_c - fb.kappa_fb);
    rep.hamiltonian_stable = delta_p < rep.boundary_detuning;
    rep.max_real_eigenvalue = spectral_abscissa(drift.entries);
    rep.dynamically_stable = rep.max_real_eigenvalue < kStabilityMargin;
    return rep;
}

inline StabilityReport classify_stability(const SystemParams& p, const FeedbackConfig& fb,
                                          double delta_p) {
    return classify_stability(build_drift(p, fb, delta_p), p, fb, delta_p);
}

} // namespace omotto
