// model.hpp — system parameters, the feedback-to-effective-model mapping,
// and builders for the drift, noise and Hamiltonian matrices.
//
// Conventions used throughout the library:
//   * hbar = 1, omega_m = 1 (all rates and frequencies in units of omega_m,
//     energies in hbar*omega_m, times in 1/omega_m);
//   * operator ordering (a, b, a^dag, b^dag) for every 4x4 matrix;
//   * "amplitude" decay rates: the cavity energy decays at 2*kappa.

#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "omotto/errors.hpp"

namespace omotto {

using complexd = std::complex<double>;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

/// Physical constants of the optomechanical system, in units of omega_m.
struct SystemParams {
    double omega_m = 1.0;    ///< mechanical frequency (unit; keep at 1)
    double kappa_c = 0.05;   ///< total cavity amplitude decay rate
    double kappa_1 = 0.025;  ///< input-mirror decay rate
    double kappa_2 = 0.025;  ///< output-mirror decay rate
    double gamma = 0.5e-4;   ///< mechanical amplitude decay rate
    double g_coupling = 0.05;///< linearized optomechanical coupling G
    double n_th = 300.0;     ///< mechanical bath thermal occupancy

    /// Throws InvalidParameter on violated invariants. Mirror rates must
    /// satisfy kappa_1 + kappa_2 = kappa_c exactly (to rounding).
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) {
                throw InvalidParameter(std::string("system.") + name + " must be > 0");
            }
        };
        positive(omega_m, "omega_m");
        positive(kappa_c, "kappa_c");
        positive(kappa_1, "kappa_1");
        positive(kappa_2, "kappa_2");
        positive(gamma, "gamma");
        if (g_coupling < 0.0) {
            throw InvalidParameter("system.g must be >= 0");
        }
        if (n_th < 0.0) {
            throw InvalidParameter("system.n_th must be >= 0");
        }
        const double sum = kappa_1 + kappa_2;
        if (std::abs(sum - kappa_c) > 1e-12 * kappa_c) {
            std::ostringstream os;
            os << "system.kappa_1 + system.kappa_2 = " << sum
               << " does not equal system.kappa_c = " << kappa_c;
            throw InvalidParameter(os.str());
        }
    }

    /// Non-fatal advisories (e.g. gamma not << omega_m).
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (gamma > 0.1 * omega_m) {
            w.push_back("gamma is not small compared to omega_m; the weak-damping "
                        "assumptions behind the model are strained");
        }
        return w;
    }
};

/// Feedback gain/efficiency together with the derived effective pair
/// (kappa_fb, n_opt_fb) of the in-loop model. The loop's homodyne phase and
/// delay are assumed tuned so that the fed-back quadrature acts purely on
/// the drive amplitude; they enter only through this effective description.
struct FeedbackConfig {
    double gain = 0.0;      ///< feedback gain g_fb (dimensionless, signed)
    double eta_d = 0.6;     ///< detection efficiency in (0, 1]
    double kappa_fb = 0.0;  ///< effective cavity amplitude decay rate
    double n_opt_fb = 0.0;  ///< effective optical thermal occupancy

    /// True when negative gain pushes the effective decay above the bare one.
    bool broadens_cavity(const SystemParams& p) const { return kappa_fb > p.kappa_c; }
};

/// Effective decay and occupancy for a given gain:
///   kappa_fb = kappa_c - 2 g sqrt(eta_d kappa_1 kappa_2)
///   n_opt_fb = (kappa_c - kappa_fb)^2 / (eta_d kappa_c kappa_fb)
inline std::pair<double, double> effective_feedback(double kappa_c, double kappa_1,
                                                    double kappa_2, double gain,
                                                    double eta_d) {
    if (!(eta_d > 0.0) || eta_d > 1.0) {
        throw InvalidEfficiency("feedback.eta_d must lie in (0, 1]");
    }
    if (!(kappa_c > 0.0) || !(kappa_1 > 0.0) || !(kappa_2 > 0.0)) {
        throw InvalidParameter("decay rates must be > 0");
    }
    const double kappa_fb = kappa_c - 2.0 * gain * std::sqrt(eta_d * kappa_1 * kappa_2);
    if (!(kappa_fb > 0.0)) {
        std::ostringstream os;
        os << "feedback gain " << gain << " drives kappa_fb = " << kappa_fb
           << " <= 0 (instability threshold crossed)";
        throw FeedbackUnstable(os.str());
    }
    const double d = kappa_c - kappa_fb;
    const double n_opt_fb = d * d / (eta_d * kappa_c * kappa_fb);
    return {kappa_fb, n_opt_fb};
}

/// Gain that reproduces a requested kappa_fb (figures quote kappa_fb, not gain).
inline double invert_feedback(double kappa_c, double kappa_fb, double kappa_1,
                              double kappa_2, double eta_d) {
    if (!(eta_d > 0.0) || eta_d > 1.0) {
        throw InvalidEfficiency("feedback.eta_d must lie in (0, 1]");
    }
    if (!(kappa_fb > 0.0)) {
        throw FeedbackUnstable("kappa_fb must be > 0");
    }
    return (kappa_c - kappa_fb) / (2.0 * std::sqrt(eta_d * kappa_1 * kappa_2));
}

inline FeedbackConfig feedback_from_gain(const SystemParams& p, double gain, double eta_d) {
    FeedbackConfig fb;
    fb.gain = gain;
    fb.eta_d = eta_d;
    std::tie(fb.kappa_fb, fb.n_opt_fb) =
        effective_feedback(p.kappa_c, p.kappa_1, p.kappa_2, gain, eta_d);
    return fb;
}

inline FeedbackConfig feedback_from_kappa(const SystemParams& p, double kappa_fb,
                                          double eta_d) {
    FeedbackConfig fb;
    fb.eta_d = eta_d;
    fb.gain = invert_feedback(p.kappa_c, kappa_fb, p.kappa_1, p.kappa_2, eta_d);
    std::tie(fb.kappa_fb, fb.n_opt_fb) =
        effective_feedback(p.kappa_c, p.kappa_1, p.kappa_2, fb.gain, eta_d);
    return fb;
}

/// Symplectic form I = [[0, 1], [-1, 0]] (2x2 identity blocks).
inline const Mat4& symplectic_form() {
    static const Mat4 form = [] {
        Mat4 m = Mat4::Zero();
        m(0, 2) = 1.0;
        m(1, 3) = 1.0;
        m(2, 0) = -1.0;
        m(3, 1) = -1.0;
        return m;
    }();
    return form;
}

/// Block swap G exchanging the (a, b) and (a^dag, b^dag) sectors.
inline const Mat4& mode_swap() {
    static const Mat4 swap = [] {
        Mat4 m = Mat4::Zero();
        m(0, 2) = 1.0;
        m(1, 3) = 1.0;
        m(2, 0) = 1.0;
        m(3, 1) = 1.0;
        return m;
    }();
    return swap;
}

/// Conjugation image G M* G of a generator-type matrix. The drift matrix is
/// invariant under this map.
inline Mat4 conjugation_image(const Mat4& m) {
    return mode_swap() * m.conjugate() * mode_swap();
}

/// Conjugation image G C^dag G of a moment-type matrix. Valid correlation
/// matrices are invariant under this map.
inline Mat4 hermitian_image(const Mat4& c) {
    return mode_swap() * c.adjoint() * mode_swap();
}

/// Drift matrix of the Langevin dynamics at detuning delta_p.
struct DriftMatrix {
    Mat4 entries;
    double detuning = 0.0;
};

/// Noise-input matrix N = Q C_in Q (four nonzero entries).
struct NoiseMatrix {
    Mat4 entries;
};

/// Builds the 4x4 drift at the given detuning. The diagonal damping slots
/// carry kappa_fb; the parametric entries kappa_c - kappa_fb sit at (1,3)
/// and (3,1) with the sign that makes the generator consistent with the
/// effective Hamiltonian (see hamiltonian_matrix), so that rows 3-4 are the
/// conjugation image of rows 1-2.
inline DriftMatrix build_drift(const SystemParams& p, const FeedbackConfig& fb,
                               double delta_p) {
    const complexd i(0.0, 1.0);
    const double chi = p.kappa_c - fb.kappa_fb;
    const double g = p.g_coupling;
    Mat4 m;
    m << -(fb.kappa_fb - i * delta_p), -i * g, chi, -i * g,
         -i * g, -(p.gamma + i * p.omega_m), -i * g, 0.0,
         chi, i * g, -(fb.kappa_fb + i * delta_p), i * g,
         i * g, 0.0, i * g, -(p.gamma - i * p.omega_m);
    return DriftMatrix{m, delta_p};
}

/// Noise matrix with entries (1,3) = 2 kappa_fb (n_opt_fb + 1),
/// (3,1) = 2 kappa_fb n_opt_fb, (2,4) = 2 gamma (n_th + 1),
/// (4,2) = 2 gamma n_th.
inline NoiseMatrix build_noise(const SystemParams& p, const FeedbackConfig& fb) {
    Mat4 m = Mat4::Zero();
    m(0, 2) = 2.0 * fb.kappa_fb * (fb.n_opt_fb + 1.0);
    m(2, 0) = 2.0 * fb.kappa_fb * fb.n_opt_fb;
    m(1, 3) = 2.0 * p.gamma * (p.n_th + 1.0);
    m(3, 1) = 2.0 * p.gamma * p.n_th;
    return NoiseMatrix{m};
}

/// Matrix representation H of the effective Hamiltonian,
/// H_fb = a_vec^T H a_vec (hbar = 1). Includes the parametric
/// -i (kappa_c - kappa_fb)/2 (a^2 - a^dag^2) contribution on the
/// cavity diagonal corners.
inline Mat4 hamiltonian_matrix(const SystemParams& p, const FeedbackConfig& fb,
                               double delta_p) {
    const complexd i(0.0, 1.0);
    const double chi = p.kappa_c - fb.kappa_fb;
    const double g = p.g_coupling;
    Mat4 m;
    m << -i * chi, g, -delta_p, g,
         g, 0.0, g, p.omega_m,
         -delta_p, g, i * chi, g,
         g, p.omega_m, g, 0.0;
    return 0.5 * m;
}

} // namespace omotto
