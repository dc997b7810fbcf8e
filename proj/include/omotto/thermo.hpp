// thermo.hpp — time-dependent Otto-cycle machinery: detuning schedules,
// correlation-matrix propagation, internal energy, heat, work, per-stroke
// ledger and efficiency; full-dynamics and steady-state node-estimate
// methods; lower- and upper-polariton engine variants.
//
// Propagation strategy: the detuning protocol is piecewise linear, so
// ramp strokes are integrated with an embedded Dormand-Prince 5(4) pair
// (heat and work accumulated on the same nodes, keeping first-law closure
// at integrator tolerance), while constant-detuning strokes use the exact
// relation C(t) = C_ss + e^{M t} (C0 - C_ss) e^{M^T t}. The exponential
// path is what makes tau_4 = 20/gamma (~1e8 time units at the coldest
// parameter sets) affordable. Heat on constant strokes comes from the
// integrated identity M S + S M^T = D(t) - D(0) with S = int_0^t D, i.e.
// one extra Lyapunov solve instead of quadrature.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "omotto/errors.hpp"
#include "omotto/lyapunov.hpp"
#include "omotto/model.hpp"
#include "omotto/polariton.hpp"

namespace omotto {

enum class EngineVariant { lower_polariton, upper_polariton };

inline const char* to_string(EngineVariant v) {
    return v == EngineVariant::lower_polariton ? "lower" : "upper";
}

/// Piecewise-linear detuning protocol with four stroke durations:
/// linear delta_i -> delta_f over tau1, constant delta_f over tau2,
/// linear back over tau3, constant delta_i over tau4.
struct StrokeSchedule {
    double delta_i = -3.0;
    double delta_f = -0.35;
    std::array<double, 4> tau{35.0, 135.0, 35.0, 4.0e5};
    EngineVariant variant = EngineVariant::lower_polariton;

    double total_time() const { return tau[0] + tau[1] + tau[2] + tau[3]; }

    /// End time of stroke k (k in 0..3) measured from cycle start.
    double boundary(int k) const {
        double t = 0.0;
        for (int j = 0; j <= k; ++j) t += tau[j];
        return t;
    }

    void validate() const {
        for (int k = 0; k < 4; ++k) {
            if (!(tau[k] > 0.0)) {
                std::ostringstream os;
                os << "schedule.tau" << (k + 1) << " must be > 0";
                throw InvalidParameter(os.str());
            }
        }
        if (!(delta_i < 0.0) || !(delta_f < 0.0)) {
            throw InvalidParameter("schedule detunings must be red (delta < 0)");
        }
        if (delta_i == delta_f) {
            throw InvalidParameter("schedule.delta_i must differ from schedule.delta_f");
        }
    }
};

/// Exact detuning at cycle time t in [0, total]. Continuous at stroke
/// boundaries.
inline double detuning_at(const StrokeSchedule& s, double t) {
    if (t < 0.0 || t > s.total_time()) {
        std::ostringstream os;
        os << "t = " << t << " outside cycle [0, " << s.total_time() << "]";
        throw OutOfRange(os.str());
    }
    const double t1 = s.boundary(0), t2 = s.boundary(1), t3 = s.boundary(2);
    if (t < t1) return s.delta_i + (s.delta_f - s.delta_i) * (t / s.tau[0]);
    if (t < t2) return s.delta_f;
    if (t < t3) return s.delta_f + (s.delta_i - s.delta_f) * ((t - t2) / s.tau[2]);
    return s.delta_i;
}

/// d(delta_p)/dt at cycle time t; zero on the isochores. At a stroke
/// boundary, the rate of the stroke being entered.
inline double detuning_rate_at(const StrokeSchedule& s, double t) {
    if (t < 0.0 || t > s.total_time()) {
        throw OutOfRange("t outside cycle");
    }
    if (t < s.boundary(0)) return (s.delta_f - s.delta_i) / s.tau[0];
    if (t < s.boundary(1)) return 0.0;
    if (t < s.boundary(2)) return (s.delta_i - s.delta_f) / s.tau[2];
    return 0.0;
}

/// Internal energy U = <H_fb> from second moments:
///   U = -delta_p <a^dag a> + omega_m <b^dag b>
///       + G (<ba> + <ba^dag> + <b^dag a> + <b^dag a^dag>)
///       - i (kappa_c - kappa_fb)/2 (<a^2> - <a^dag^2>).
/// The imaginary residue is a consistency check on the state.
inline double internal_energy(const CorrelationMatrix& state, const SystemParams& p,
                              const FeedbackConfig& fb, double delta_p) {
    const Mat4& c = state.entries;
    const double chi = p.kappa_c - fb.kappa_fb;
    const complexd cross = c(1, 0) + c(1, 2) + c(3, 0) + c(3, 2);
    const complexd u = -delta_p * c(2, 0) + p.omega_m * c(3, 1) + p.g_coupling * cross -
                       complexd(0.0, 0.5) * chi * (c(0, 0) - c(2, 2));
    const double tol = 1e-10 * std::max(1.0, std::abs(u.real()));
    if (std::abs(u.imag()) > tol) {
        std::ostringstream os;
        os << "internal energy has imaginary part " << u.imag() << " (state corrupted)";
        throw NonRealEnergy(os.str());
    }
    return u.real();
}

/// dW/dt = -(d delta_p/dt) <a^dag a>; only the detuning is time dependent.
inline double work_rate(const CorrelationMatrix& state, double d_delta_dt) {
    return -d_delta_dt * state.entries(2, 0).real();
}

/// Dissipative heat flow dQ/dt = Tr[D(rho) H_fb], derived from the master
/// equation with dissipator rates (kappa_fb, n_opt_fb) and (gamma, n_th):
///   dQ/dt = 2 kappa_fb delta_p (<a^dag a> - n_opt_fb)
///           + 2 gamma omega_m (n_th - <b^dag b>)
///           - G (kappa_fb + gamma) (<ba> + <ba^dag> + <b^dag a> + <b^dag a^dag>)
///           + i kappa_fb (kappa_c - kappa_fb) (<a^2> - <a^dag^2>).
/// It vanishes identically on the stationary state and closes the first law
/// against internal_energy/work_rate.
inline double heat_rate(const CorrelationMatrix& state, const SystemParams& p,
                        const FeedbackConfig& fb, double delta_p) {
    const Mat4& c = state.entries;
    const double chi = p.kappa_c - fb.kappa_fb;
    const complexd cross = c(1, 0) + c(1, 2) + c(3, 0) + c(3, 2);
    const complexd q = 2.0 * fb.kappa_fb * delta_p * (c(2, 0) - fb.n_opt_fb) +
                       2.0 * p.gamma * p.omega_m * (p.n_th - c(3, 1)) -
                       p.g_coupling * (fb.kappa_fb + p.gamma) * cross +
                       complexd(0.0, 1.0) * fb.kappa_fb * chi * (c(0, 0) - c(2, 2));
    return q.real();
}

/// Variant of the heat integrand with the bare cavity rate kappa_c in the
/// dissipators (and a gamma*kappa_c product in the phonon term), instead of
/// the effective kappa_fb the in-loop Langevin dynamics actually carries.
/// Dimensionally inconsistent and not first-law closed; kept behind this
/// entry point for diagnosis only. heat_rate() is the production definition.
inline double heat_rate_bare_rates(const CorrelationMatrix& state, const SystemParams& p,
                                    const FeedbackConfig& fb, double delta_p) {
    const Mat4& c = state.entries;
    const double chi = p.kappa_c - fb.kappa_fb;
    const complexd cross = c(1, 0) + c(1, 2) + c(3, 0) + c(3, 2);
    const complexd q = 2.0 * p.omega_m * p.gamma * p.n_th -
                       2.0 * delta_p * p.kappa_c * fb.n_opt_fb +
                       2.0 * delta_p * p.kappa_c * c(2, 0) -
                       2.0 * p.omega_m * p.gamma * p.kappa_c * c(3, 1) -
                       p.g_coupling * (p.kappa_c + p.gamma) * cross +
                       complexd(0.0, 1.0) * p.kappa_c * chi * (c(0, 0) - c(2, 2));
    return q.real();
}

struct PropagationOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    /// Hard cap on the step; 0 selects 0.5 / max(|delta_i|, |delta_f|,
    /// omega_m, 2G, 1), which keeps the fastest oscillation resolved while
    /// leaving the error control in charge.
    double max_step = 0.0;
};

namespace detail {

/// Augmented integration state: correlation matrix plus cumulative heat
/// and work.
struct AugState {
    Mat4 c;
    double q = 0.0;
    double w = 0.0;
};

/// Dormand-Prince 5(4) on the augmented ramp dynamics. Stops exactly at
/// requested times via step clipping; FSAL reuse between accepted steps.
class RampIntegrator {
public:
    RampIntegrator(const SystemParams& p, const FeedbackConfig& fb,
                   double delta_from, double delta_to, double duration,
                   const PropagationOptions& opts)
        : p_(p), fb_(fb), delta0_(delta_from),
          rate_((delta_to - delta_from) / duration), opts_(opts) {
        base_ = build_drift(p, fb, delta_from).entries;
        noise_ = build_noise(p, fb).entries;
        const double scale = std::max({std::abs(delta_from), std::abs(delta_to),
                                       p.omega_m, 2.0 * p.g_coupling, 1.0});
        max_step_ = opts.max_step > 0.0 ? opts.max_step : 0.5 / scale;
    }

    /// Advances y from local time t0 to t1 (both within the ramp).
    void integrate(AugState& y, double t0, double t1) {
        double t = t0;
        double h = std::min(max_step_, (t1 - t0) / 16.0);
        bool have_k1 = false;
        int consecutive_rejects = 0;
        // a remainder at rounding scale cannot be stepped across
        const double done_eps = 8.0 * std::numeric_limits<double>::epsilon() *
                                std::max({std::abs(t0), std::abs(t1), 1.0});
        while (t1 - t > done_eps) {
            h = std::min(h, t1 - t);
            if (!(h > std::numeric_limits<double>::epsilon() *
                          std::max(std::abs(t), 1.0))) {
                throw StepFailure("step size underflow during ramp integration");
            }
            if (!have_k1) {
                k_[0] = rhs(t, y);
                have_k1 = true;
            }
            AugState stage;
            for (int s = 1; s < 6; ++s) {
                accumulate(stage, y, s, h);
                k_[s] = rhs(t + kC[s] * h, stage);
            }
            // 5th-order solution (also the last stage position for FSAL)
            accumulate(stage, y, 6, h);
            k_[6] = rhs(t + h, stage);

            const double err = error_norm(y, stage, h);
            if (err <= 1.0) {
                t += h;
                y = stage;
                k_[0] = k_[6];
                consecutive_rejects = 0;
            } else {
                have_k1 = true;  // k1 unchanged, step rejected
                if (++consecutive_rejects > 60) {
                    throw StepFailure("adaptive control cannot meet tolerance on ramp");
                }
            }
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
            h = std::min(h, max_step_);
        }
    }

    double delta_at(double t_local) const { return delta0_ + rate_ * t_local; }
    double rate() const { return rate_; }

private:
    AugState rhs(double t, const AugState& y) const {
        Mat4 m = base_;
        const complexd i(0.0, 1.0);
        const double dp = delta_at(t);
        m(0, 0) = -(fb_.kappa_fb - i * dp);
        m(2, 2) = -(fb_.kappa_fb + i * dp);
        AugState d;
        d.c = m * y.c + y.c * m.transpose() + noise_;
        const CorrelationMatrix wrap{y.c};
        d.q = heat_rate(wrap, p_, fb_, dp);
        d.w = -rate_ * y.c(2, 0).real();
        return d;
    }

    void accumulate(AugState& out, const AugState& y, int stage, double h) const {
        out.c = y.c;
        out.q = y.q;
        out.w = y.w;
        for (int j = 0; j < stage; ++j) {
            const double a = kA[stage][j];
            if (a == 0.0) continue;
            out.c += (h * a) * k_[j].c;
            out.q += h * a * k_[j].q;
            out.w += h * a * k_[j].w;
        }
    }

    double error_norm(const AugState& y0, const AugState& y1, double h) const {
        double sum = 0.0;
        int n = 0;
        auto add = [&](complexd e, complexd a, complexd b) {
            const double sc =
                opts_.abs_tol + opts_.rel_tol * std::max(std::abs(a), std::abs(b));
            const double v = std::abs(e) / sc;
            sum += v * v;
            n += 1;
        };
        Mat4 ec = Mat4::Zero();
        double eq = 0.0, ew = 0.0;
        for (int j = 0; j < 7; ++j) {
            if (kE[j] == 0.0) continue;
            ec += (h * kE[j]) * k_[j].c;
            eq += h * kE[j] * k_[j].q;
            ew += h * kE[j] * k_[j].w;
        }
        for (int r = 0; r < 4; ++r)
            for (int col = 0; col < 4; ++col) add(ec(r, col), y0.c(r, col), y1.c(r, col));
        add(eq, y0.q, y1.q);
        add(ew, y0.w, y1.w);
        return std::sqrt(sum / n);
    }

    static constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0,
                                     8.0 / 9.0, 1.0, 1.0};
    static constexpr double kA[7][6] = {
        {},
        {1.0 / 5.0},
        {3.0 / 40.0, 9.0 / 40.0},
        {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
        {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
        {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
         -5103.0 / 18656.0},
        {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
         11.0 / 84.0}};
    // b5 - b4
    static constexpr double kE[7] = {71.0 / 57600.0,       0.0,
                                     -71.0 / 16695.0,      71.0 / 1920.0,
                                     -17253.0 / 339200.0,  22.0 / 525.0,
                                     -1.0 / 40.0};

    SystemParams p_;
    FeedbackConfig fb_;
    double delta0_;
    double rate_;
    PropagationOptions opts_;
    Mat4 base_;
    Mat4 noise_;
    double max_step_ = 0.0;
    std::array<AugState, 7> k_;
};

/// Exact propagation on a constant-detuning segment. Uses the drift
/// eigendecomposition when well conditioned (sampling at arbitrary times is
/// then O(1)), falling back to scaling-and-squaring otherwise.
class ConstantSegment {
public:
    ConstantSegment(const SystemParams& p, const FeedbackConfig& fb, double delta_p,
                    const CorrelationMatrix& c0)
        : p_(p), fb_(fb), delta_(delta_p),
          drift_(build_drift(p, fb, delta_p)), lyap_(drift_.entries) {
        const Mat4 noise = build_noise(p, fb).entries;
        abscissa_ = spectral_abscissa(drift_.entries);
        if (abscissa_ >= kStabilityMargin) {
            std::ostringstream os;
            os << "constant-detuning segment at delta_p = " << delta_p
               << " is dynamically unstable";
            throw Unstable(os.str());
        }
        Mat4 css = lyap_.solve(-noise);
        css = 0.5 * (css + hermitian_image(css));
        css_ = CorrelationMatrix{css};
        d0_ = c0.entries - css;

        Eigen::ComplexEigenSolver<Mat4> es(drift_.entries, true);
        eigen_ok_ = es.info() == Eigen::Success;
        if (eigen_ok_) {
            evals_ = es.eigenvalues();
            v_ = es.eigenvectors();
            Eigen::FullPivLU<Mat4> lu(v_);
            eigen_ok_ = lu.isInvertible();
            if (eigen_ok_) {
                vi_ = lu.inverse();
                const double recon =
                    (v_ * evals_.asDiagonal() * vi_ - drift_.entries).cwiseAbs().maxCoeff();
                eigen_ok_ = recon <= 1e-11 * std::max(1.0, drift_.entries.cwiseAbs().maxCoeff());
                if (eigen_ok_) w0_ = vi_ * d0_ * vi_.transpose();
            }
        }
    }

    const CorrelationMatrix& stationary() const { return css_; }

    /// C(dt) = C_ss + e^{M dt} (C0 - C_ss) e^{M^T dt}.
    CorrelationMatrix state_at(double dt) const {
        Mat4 c = css_.entries + deviation_at(dt);
        c = 0.5 * (c + hermitian_image(c));
        return CorrelationMatrix{c};
    }

    /// Heat exchanged over [0, dt]: with S = int_0^dt (C - C_ss),
    /// M S + S M^T = D(dt) - D(0), and dQ/dt is linear in C - C_ss.
    double heat_over(double dt) const {
        const Mat4 s = lyap_.solve(deviation_at(dt) - d0_);
        CorrelationMatrix shifted{css_.entries + s};
        return heat_rate(shifted, p_, fb_, delta_);
    }

private:
    Mat4 deviation_at(double dt) const {
        if (dt == 0.0) return d0_;
        if (abscissa_ * dt < -700.0) return Mat4::Zero();
        if (eigen_ok_) {
            Mat4 phase;
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c)
                    phase(r, c) = std::exp((evals_(r) + evals_(c)) * dt);
            return v_ * w0_.cwiseProduct(phase) * v_.transpose();
        }
        const Mat4 e = (drift_.entries * dt).exp();
        return e * d0_ * e.transpose();
    }

    SystemParams p_;
    FeedbackConfig fb_;
    double delta_;
    DriftMatrix drift_;
    LyapunovOperator lyap_;
    CorrelationMatrix css_;
    Mat4 d0_;
    Vec4 evals_;
    Mat4 v_, vi_, w0_;
    bool eigen_ok_ = false;
    double abscissa_ = 0.0;
};

} // namespace detail

/// Propagates a correlation matrix from cycle time t0 to t1 under the
/// schedule's time-dependent drift. Constant-detuning spans use exact
/// exponential propagation; ramps use the adaptive integrator.
inline CorrelationMatrix propagate(const CorrelationMatrix& state, const SystemParams& p,
                                   const FeedbackConfig& fb, const StrokeSchedule& schedule,
                                   double t0, double t1,
                                   const PropagationOptions& opts = {}) {
    if (!(t0 < t1) || t0 < 0.0 || t1 > schedule.total_time()) {
        throw OutOfRange("propagation window must satisfy 0 <= t0 < t1 <= cycle length");
    }
    CorrelationMatrix c = state;
    double t = t0;
    for (int stroke = 0; stroke < 4 && t < t1; ++stroke) {
        const double begin = stroke == 0 ? 0.0 : schedule.boundary(stroke - 1);
        const double end = schedule.boundary(stroke);
        if (t >= end) continue;
        const double stop = std::min(end, t1);
        if (stroke == 0 || stroke == 2) {
            const double from = stroke == 0 ? schedule.delta_i : schedule.delta_f;
            const double to = stroke == 0 ? schedule.delta_f : schedule.delta_i;
            detail::RampIntegrator integ(p, fb, from, to, schedule.tau[stroke], opts);
            detail::AugState y{c.entries, 0.0, 0.0};
            integ.integrate(y, t - begin, stop - begin);
            c = CorrelationMatrix{y.c};
        } else {
            const double dp = stroke == 1 ? schedule.delta_f : schedule.delta_i;
            detail::ConstantSegment seg(p, fb, dp, c);
            c = seg.state_at(stop - t);
        }
        t = stop;
    }
    const double defect = std::max(c.commutator_defect(), c.conjugation_defect());
    if (defect > 1e-6 * std::max(1.0, c.entries.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << "propagated state violates structure (defect " << defect << ")";
        throw StepFailure(os.str());
    }
    return c;
}

struct StrokeLedger {
    double delta_u = 0.0;
    double heat = 0.0;
    double work = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
    bool isochore = false;

    double first_law_defect() const { return delta_u - heat - work; }
    double scale() const {
        return std::max({std::abs(delta_u), std::abs(heat), std::abs(work), 1.0});
    }
};

struct TrajectoryPoint {
    double t = 0.0;
    double delta_p = 0.0;
    double n_photon = 0.0;
    double n_phonon = 0.0;
    double n_upper = 0.0;
    double n_lower = 0.0;
    double energy = 0.0;
    double heat_cum = 0.0;
    double work_cum = 0.0;
};

struct CycleLedger {
    std::array<StrokeLedger, 4> strokes;
    double w_total = 0.0;
    double q_absorbed = 0.0;
    double efficiency = 0.0;
    bool functional = false;      ///< W_tot < 0: net work done by the system
    int absorbed_stroke = -1;     ///< 0-based stroke index carrying Q_abs
    EngineVariant variant = EngineVariant::lower_polariton;
    std::vector<TrajectoryPoint> trajectory;

    double delta_u_total() const {
        double s = 0.0;
        for (const auto& st : strokes) s += st.delta_u;
        return s;
    }
};

namespace detail {

inline void finalize_totals(CycleLedger& ledger) {
    ledger.w_total = ledger.strokes[0].work + ledger.strokes[2].work;
    ledger.q_absorbed = 0.0;
    ledger.absorbed_stroke = -1;
    double best = 0.0;
    for (int k : {1, 3}) {
        const double q = ledger.strokes[k].heat;
        if (q > 0.0) {
            ledger.q_absorbed += q;
            if (q > best) {
                best = q;
                ledger.absorbed_stroke = k;
            }
        }
    }
    ledger.functional = ledger.w_total < 0.0;
    ledger.efficiency = (ledger.functional && ledger.q_absorbed > 0.0)
                            ? -ledger.w_total / ledger.q_absorbed
                            : 0.0;
}

inline TrajectoryPoint make_point(const SystemParams& p, const FeedbackConfig& fb,
                                  double t, double dp, const CorrelationMatrix& c,
                                  double q_cum, double w_cum,
                                  const PolaritonBasis* basis) {
    TrajectoryPoint pt;
    pt.t = t;
    pt.delta_p = dp;
    pt.n_photon = c.photon_number();
    pt.n_phonon = c.phonon_number();
    pt.energy = internal_energy(c, p, fb, dp);
    pt.heat_cum = q_cum;
    pt.work_cum = w_cum;
    try {
        PolaritonState ps;
        if (basis != nullptr) {
            ps = to_polariton(c, *basis);
        } else {
            ps = to_polariton(c, polariton_basis(p, fb, dp));
        }
        pt.n_upper = ps.n_upper;
        pt.n_lower = ps.n_lower;
    } catch (const Error&) {
        // outside the Hamiltonian-stable region the polariton labels are
        // undefined; bare-mode columns stay valid
        pt.n_upper = std::numeric_limits<double>::quiet_NaN();
        pt.n_lower = std::numeric_limits<double>::quiet_NaN();
    }
    return pt;
}

} // namespace detail

/// Full-dynamics Otto cycle starting from `initial` (by default the steady
/// state at delta_i). Per-stroke heat/work/energy bookkeeping; trajectory
/// sampled uniformly with samples_per_stroke points per stroke (0 disables
/// sampling).
inline CycleLedger run_cycle(const SystemParams& p, const FeedbackConfig& fb,
                             const StrokeSchedule& schedule,
                             const PropagationOptions& opts = {},
                             int samples_per_stroke = 2000,
                             std::optional<CorrelationMatrix> initial = std::nullopt) {
    schedule.validate();
    CycleLedger ledger;
    ledger.variant = schedule.variant;

    CorrelationMatrix c = initial.has_value()
                              ? *initial
                              : steady_state(p, fb, schedule.delta_i);
    double q_cum = 0.0, w_cum = 0.0;
    if (samples_per_stroke > 0) {
        ledger.trajectory.push_back(detail::make_point(p, fb, 0.0, schedule.delta_i, c,
                                                       0.0, 0.0, nullptr));
    }

    double t_begin = 0.0;
    for (int stroke = 0; stroke < 4; ++stroke) {
        const double span = schedule.tau[stroke];
        const double t_end = t_begin + span;
        StrokeLedger& led = ledger.strokes[stroke];
        led.t_begin = t_begin;
        led.t_end = t_end;
        led.isochore = stroke == 1 || stroke == 3;

        const double dp_begin = detuning_at(schedule, t_begin);
        const double u_begin = internal_energy(c, p, fb, dp_begin);

        if (!led.isochore) {
            const double from = stroke == 0 ? schedule.delta_i : schedule.delta_f;
            const double to = stroke == 0 ? schedule.delta_f : schedule.delta_i;
            detail::RampIntegrator integ(p, fb, from, to, span, opts);
            detail::AugState y{c.entries, 0.0, 0.0};
            if (samples_per_stroke > 0) {
                for (int k = 1; k <= samples_per_stroke; ++k) {
                    const double tloc = span * k / samples_per_stroke;
                    integ.integrate(y, span * (k - 1) / samples_per_stroke, tloc);
                    ledger.trajectory.push_back(detail::make_point(
                        p, fb, t_begin + tloc, integ.delta_at(tloc),
                        CorrelationMatrix{y.c}, q_cum + y.q, w_cum + y.w, nullptr));
                }
            } else {
                integ.integrate(y, 0.0, span);
            }
            c = CorrelationMatrix{y.c};
            led.heat = y.q;
            led.work = y.w;
        } else {
            const double dp = stroke == 1 ? schedule.delta_f : schedule.delta_i;
            detail::ConstantSegment seg(p, fb, dp, c);
            if (samples_per_stroke > 0) {
                std::optional<PolaritonBasis> basis;
                try {
                    basis = polariton_basis(p, fb, dp);
                } catch (const Error&) {
                }
                for (int k = 1; k <= samples_per_stroke; ++k) {
                    const double tloc = span * k / samples_per_stroke;
                    ledger.trajectory.push_back(detail::make_point(
                        p, fb, t_begin + tloc, dp, seg.state_at(tloc),
                        q_cum + seg.heat_over(tloc), w_cum,
                        basis ? &*basis : nullptr));
                }
            }
            c = seg.state_at(span);
            led.heat = seg.heat_over(span);
            led.work = 0.0;  // d(delta)/dt = 0 on isochores, by construction
        }

        const double dp_end = detuning_at(schedule, t_end);
        led.delta_u = internal_energy(c, p, fb, dp_end) - u_begin;
        q_cum += led.heat;
        w_cum += led.work;
        t_begin = t_end;
    }

    detail::finalize_totals(ledger);
    return ledger;
}

/// Steady-state node estimate: perfect adiabats preserving the working
/// polariton population, isochores thermalizing it to the local steady
/// state. Node energies E_j = omega_j N_j for the working mode (B for the
/// lower variant, A for the upper one); the spectator mode contributes no
/// net work.
inline CycleLedger estimate_cycle(const SystemParams& p, const FeedbackConfig& fb,
                                  double delta_i, double delta_f, EngineVariant variant) {
    struct Node {
        double omega;
        double population;
    };
    auto node_state = [&](double dp) -> Node {
        const CorrelationMatrix c = steady_state(p, fb, dp);
        const PolaritonBasis basis = polariton_basis(p, fb, dp);
        const PolaritonState ps = to_polariton(c, basis);
        if (variant == EngineVariant::lower_polariton) {
            return {basis.omega_b, ps.n_lower};
        }
        return {basis.omega_a, ps.n_upper};
    };
    const Node ni = node_state(delta_i);
    const Node nf = node_state(delta_f);

    const double e1 = ni.omega * ni.population;
    const double e2 = nf.omega * ni.population;  // adiabat preserves N
    const double e3 = nf.omega * nf.population;
    const double e4 = ni.omega * nf.population;

    CycleLedger ledger;
    ledger.variant = variant;
    ledger.strokes[0] = StrokeLedger{e2 - e1, 0.0, e2 - e1, 0.0, 0.0, false};
    ledger.strokes[1] = StrokeLedger{e3 - e2, e3 - e2, 0.0, 0.0, 0.0, true};
    ledger.strokes[2] = StrokeLedger{e4 - e3, 0.0, e4 - e3, 0.0, 0.0, false};
    ledger.strokes[3] = StrokeLedger{e1 - e4, e1 - e4, 0.0, 0.0, 0.0, true};
    detail::finalize_totals(ledger);
    return ledger;
}

/// One link of the stroke-duration hierarchy chain.
struct HierarchyMargin {
    std::string relation;  ///< e.g. "1/G << tau1"
    double ratio = 0.0;    ///< actual ratio longer/shorter; >> 1 when satisfied
};

struct HierarchyCheck {
    bool satisfied = false;     ///< all margins >= threshold and occupancy ordered
    bool occupancy_ok = false;  ///< n_opt_fb < n_th (lower) / > n_th (upper)
    double threshold = 3.0;
    std::vector<HierarchyMargin> margins;

    double worst_margin() const {
        double w = std::numeric_limits<double>::infinity();
        for (const auto& m : margins) w = std::min(w, m.ratio);
        return w;
    }
};

/// Evaluates the stroke-duration chain for the schedule's variant:
///   lower: 1/G << tau1,tau3 << 1/kappa_fb << tau2 << 1/gamma << tau4
///   upper: 1/G << tau1,tau3 << 1/gamma << tau2 << 1/kappa_fb << tau4
/// plus the bath-occupancy ordering.
inline HierarchyCheck check_hierarchy(const SystemParams& p, const FeedbackConfig& fb,
                                      const StrokeSchedule& schedule,
                                      double margin_threshold = 3.0) {
    HierarchyCheck out;
    out.threshold = margin_threshold;
    const double g_time = 1.0 / p.g_coupling;
    const double fb_time = 1.0 / fb.kappa_fb;
    const double mech_time = 1.0 / p.gamma;
    const bool lower = schedule.variant == EngineVariant::lower_polariton;
    const double mid_time = lower ? fb_time : mech_time;
    const double slow_time = lower ? mech_time : fb_time;
    const char* mid_name = lower ? "1/kappa_fb" : "1/gamma";
    const char* slow_name = lower ? "1/gamma" : "1/kappa_fb";

    auto link = [&](std::string rel, double shorter, double longer) {
        out.margins.push_back({std::move(rel), longer / shorter});
    };
    link(std::string("1/G << tau1"), g_time, schedule.tau[0]);
    link(std::string("1/G << tau3"), g_time, schedule.tau[2]);
    link(std::string("tau1 << ") + mid_name, schedule.tau[0], mid_time);
    link(std::string("tau3 << ") + mid_name, schedule.tau[2], mid_time);
    link(std::string(mid_name) + " << tau2", mid_time, schedule.tau[1]);
    link(std::string("tau2 << ") + slow_name, schedule.tau[1], slow_time);
    link(std::string(slow_name) + " << tau4", slow_time, schedule.tau[3]);

    out.occupancy_ok = lower ? fb.n_opt_fb < p.n_th : fb.n_opt_fb > p.n_th;
    // strict: a ratio exactly at the threshold does not qualify as "<<"
    out.satisfied = out.occupancy_ok && out.worst_margin() > margin_threshold;
    return out;
}

} // namespace omotto
