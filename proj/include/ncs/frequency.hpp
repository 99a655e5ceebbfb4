#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "ncs/errors.hpp"
#include "ncs/state_space.hpp"

namespace ncs {

//! Strictly increasing angular-frequency grid (rad/s).
struct FreqGrid {
    std::vector<double> omegas;

    static FreqGrid logspace(double lo, double hi, std::size_t n) {
        if (!(lo > 0) || !(hi > lo) || n < 2) throw Error("bad frequency grid bounds");
        FreqGrid g;
        g.omegas.resize(n);
        const double llo = std::log10(lo), lhi = std::log10(hi);
        for (std::size_t i = 0; i < n; ++i)
            g.omegas[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                             static_cast<double>(n - 1));
        return g;
    }

    //! Default analysis grid: resolves the sharp low-damping resonance and
    //! the actuator corner near 1/tau.
    static FreqGrid analysis_default() { return logspace(0.1, 1e4, 2000); }

    std::size_t size() const { return omegas.size(); }
};

//! Complex frequency-response samples over a grid.
struct FreqResponse {
    FreqGrid grid;
    std::vector<std::complex<double>> values;

    double mag_db(std::size_t i) const { return 20.0 * std::log10(std::abs(values[i])); }
    double phase_deg(std::size_t i) const {
        return std::arg(values[i]) * 180.0 / M_PI;
    }
};

struct MarginReport {
    double gain_margin_db = std::numeric_limits<double>::infinity();
    double phase_margin_deg = std::numeric_limits<double>::infinity();
    double gain_crossover = std::numeric_limits<double>::quiet_NaN();   // rad/s, |L| = 1
    double phase_crossover = std::numeric_limits<double>::quiet_NaN();  // rad/s, angle -180
    double s_max_db = std::numeric_limits<double>::quiet_NaN();
    double s_max_freq = std::numeric_limits<double>::quiet_NaN();
    bool has_gain_crossover = false;
    bool has_phase_crossover = false;

    bool closed_loop_unstable_hint() const {
        return (has_phase_crossover && gain_margin_db < 0.0) ||
               (has_gain_crossover && phase_margin_deg < 0.0);
    }
};

using TransferFn = std::function<std::complex<double>(double)>;

//! G(i omega) = C (i omega I - A)^{-1} B by one complex linear solve.
template <typename Scalar>
std::complex<Scalar> eval_tf(const StateSpaceT<Scalar>& sys, Scalar omega) {
    using Cplx = std::complex<Scalar>;
    using CMat = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic>;
    using CVec = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>;

    const auto n = sys.order();
    CMat M = -sys.A.template cast<Cplx>();
    for (Eigen::Index i = 0; i < n; ++i) M(i, i) += Cplx(0, omega);

    Eigen::FullPivLU<CMat> lu(M);
    if (!lu.isInvertible()) throw SingularAtFrequency(static_cast<double>(omega));
    const CVec x = lu.solve(sys.B.template cast<Cplx>());
    return (sys.C.template cast<Cplx>() * x)(0);
}

inline std::complex<double> eval_actuator(const ActuatorLag& act, double omega) {
    return act.kappa / std::complex<double>(1.0, omega * act.tau);
}

//! L_m(i omega) = K (i omega I - A)^{-1} B: full-state feedback loop.
inline TransferFn open_loop_measured(StateSpace sys, Eigen::RowVectorXd K) {
    if (K.cols() != sys.order()) throw Error("gain row length must equal the system order");
    sys.C = K;  // reuse the solver with K as the output map
    return [sys = std::move(sys)](double omega) { return eval_tf(sys, omega); };
}

//! L_o(i omega) = K (i omega I - A + BK + QC)^{-1} (B + Q G(i omega)):
//! observer-based loop from the reference to the compensator output.
inline TransferFn open_loop_observer(StateSpace sys, Eigen::RowVectorXd K, Eigen::VectorXd Q) {
    const auto n = sys.order();
    if (K.cols() != n || Q.rows() != n) throw Error("gain dimensions must equal the system order");
    StateSpace inner;
    inner.A = sys.A - sys.B * K - Q * sys.C;
    inner.B = sys.B;  // placeholder, replaced per call
    inner.C = K;
    inner.Doff = Eigen::VectorXd::Zero(n);
    return [sys = std::move(sys), inner = std::move(inner), Q = std::move(Q)](double omega) {
        const std::complex<double> g = eval_tf(sys, omega);
        using Cplx = std::complex<double>;
        using CMat = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic>;
        using CVec = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>;
        const auto n = inner.order();
        CMat M = -inner.A.cast<Cplx>();
        for (Eigen::Index i = 0; i < n; ++i) M(i, i) += Cplx(0, omega);
        Eigen::FullPivLU<CMat> lu(M);
        if (!lu.isInvertible()) throw SingularAtFrequency(omega);
        const CVec rhs = inner.B.cast<Cplx>() + Q.cast<Cplx>() * g;
        return (inner.C.cast<Cplx>() * lu.solve(rhs))(0);
    };
}

//! F(i omega) * L(i omega).
inline TransferFn with_actuator(const ActuatorLag& act, TransferFn L) {
    return [act, L = std::move(L)](double omega) { return eval_actuator(act, omega) * L(omega); };
}

//! PI(i omega) = Kp + Ki/(i omega).
inline std::complex<double> eval_pi(double kp, double ki, double omega) {
    return kp + ki / std::complex<double>(0.0, omega);
}

//! U_d(i omega) = alpha (1 - exp(-i omega theta)).
inline std::complex<double> delay_control_response(double alpha, double theta, double omega) {
    return alpha * (1.0 - std::exp(std::complex<double>(0.0, -omega * theta)));
}

//! R(i omega) = G/G_cl = 1 - G(i omega) U_d(i omega).
inline std::complex<double> reshape_ratio(const StateSpace& sys, double alpha, double theta,
                                          double omega) {
    return 1.0 - eval_tf(sys, omega) * delay_control_response(alpha, theta, omega);
}

//! theta = -arg G(i omega) / omega, wrapped so the delay is physical
//! (0 < theta <= 2 pi / omega).
template <typename Scalar>
Scalar compute_theta(const StateSpaceT<Scalar>& sys, Scalar omega) {
    if (!(omega > 0)) throw Error("compute_theta requires omega > 0");
    const Scalar phase = std::arg(eval_tf(sys, omega));
    Scalar theta = -phase / omega;
    if (!(theta > 0)) theta += Scalar(2) * static_cast<Scalar>(M_PI) / omega;
    return theta;
}

inline FreqResponse sample(const TransferFn& L, FreqGrid grid) {
    FreqResponse r;
    r.values.reserve(grid.size());
    for (const double w : grid.omegas) r.values.push_back(L(w));
    r.grid = std::move(grid);
    return r;
}

//! max |1/(1 + L)| over the grid, refined by golden-section search.
MarginReport sensitivity_peak(const TransferFn& L, const FreqGrid& grid);

//! Gain/phase margins with unwrapped-phase crossing detection plus the
//! sensitivity peak of the same loop.
MarginReport margins(const TransferFn& L, const FreqGrid& grid);

}  // namespace ncs
