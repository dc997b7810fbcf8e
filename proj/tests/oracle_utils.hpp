// oracle_utils.hpp — test-only reference computations, kept independent of
// the implementation paths they check.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <utility>

#include "omotto/lyapunov.hpp"
#include "omotto/model.hpp"
#include "omotto/thermo.hpp"

namespace oracle {

using omotto::CorrelationMatrix;
using omotto::FeedbackConfig;
using omotto::Mat4;
using omotto::SystemParams;
using omotto::complexd;

/// Fixed-step classical RK4 on dC/dt = M(t) C + C M(t)^T + N with a linear
/// detuning ramp. Deliberately simple: this is the reference the adaptive
/// integrator is compared against.
inline Mat4 rk4_ramp(Mat4 c, const SystemParams& p, const FeedbackConfig& fb,
                     double delta_from, double delta_to, double duration, int steps) {
    const Mat4 noise = omotto::build_noise(p, fb).entries;
    const double h = duration / steps;
    auto rhs = [&](double t, const Mat4& x) -> Mat4 {
        const double dp = delta_from + (delta_to - delta_from) * (t / duration);
        const Mat4 m = omotto::build_drift(p, fb, dp).entries;
        return m * x + x * m.transpose() + noise;
    };
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        const Mat4 k1 = rhs(t, c);
        const Mat4 k2 = rhs(t + 0.5 * h, c + 0.5 * h * k1);
        const Mat4 k3 = rhs(t + 0.5 * h, c + 0.5 * h * k2);
        const Mat4 k4 = rhs(t + h, c + h * k3);
        c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return c;
}

/// Closed-form steady cavity moments at G = 0 with the parametric term
/// included (chi = kappa_c - kappa_fb):
///   <a^dag a> = (n + s) / (1 - 2 s),    s = chi^2 / (2 (kappa_fb^2 + dp^2))
///   <a a>     = chi (2 <a^dag a> + 1) / (2 (kappa_fb - i dp)).
struct CavityMoments {
    double population;
    complexd squeezing;
};

inline CavityMoments g0_cavity_analytic(double kappa_c, double kappa_fb, double n_opt,
                                        double dp) {
    const double chi = kappa_c - kappa_fb;
    const double s = chi * chi / (2.0 * (kappa_fb * kappa_fb + dp * dp));
    const double m = (n_opt + s) / (1.0 - 2.0 * s);
    const complexd c = chi * (2.0 * m + 1.0) / (2.0 * complexd(kappa_fb, -dp));
    return {m, c};
}

/// <H> through the matrix pairing sum_ij H_ij C_ij, with the zero-point
/// constant (omega_m - delta_p)/2 removed.
inline double energy_pairing(const SystemParams& p, const FeedbackConfig& fb, double dp,
                             const Mat4& c) {
    const Mat4 h = omotto::hamiltonian_matrix(p, fb, dp);
    complexd sum = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) sum += h(i, j) * c(i, j);
    return sum.real() - 0.5 * (p.omega_m - dp);
}

/// Deterministic random configurations in physically sensible ranges,
/// rejection-sampled to be dynamically stable below the closed-form
/// boundary.
class StableConfigSampler {
public:
    explicit StableConfigSampler(unsigned seed) : rng_(seed) {}

    struct Draw {
        SystemParams params;
        FeedbackConfig feedback;
        double delta_p;
    };

    Draw next() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (;;) {
            SystemParams p;
            p.kappa_c = std::exp(std::log(1e-3) + u(rng_) * std::log(0.1 / 1e-3));
            const double split = 0.2 + 0.6 * u(rng_);
            p.kappa_1 = split * p.kappa_c;
            p.kappa_2 = p.kappa_c - p.kappa_1;
            p.gamma = std::exp(std::log(1e-6) + u(rng_) * std::log(1e-2 / 1e-6));
            p.g_coupling = 0.1 * u(rng_);
            p.n_th = 1000.0 * u(rng_);
            const double eta_d = 0.3 + 0.7 * u(rng_);
            const double kappa_fb = p.kappa_c * (0.05 + 0.95 * u(rng_));
            FeedbackConfig fb = omotto::feedback_from_kappa(p, kappa_fb, eta_d);
            const double boundary = omotto::stability_boundary(p.g_coupling, p.omega_m,
                                                               p.kappa_c - fb.kappa_fb);
            const double delta_p = boundary * (1.05 + 3.0 * u(rng_)) - 0.05;
            const auto drift = omotto::build_drift(p, fb, delta_p);
            if (omotto::spectral_abscissa(drift.entries) < -1e-9) {
                return {p, fb, delta_p};
            }
        }
    }

private:
    std::mt19937_64 rng_;
};

} // namespace oracle
