#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>

#include "ncs/errors.hpp"

namespace ncs {

//! Continuous-time SISO state-space model with a constant offset term:
//!   xdot = A x + B f + Doff,   y = C x.
//! Doff carries constant disturbances (gravity); the feedthrough is zero.
template <typename Scalar>
struct StateSpaceT {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

    Mat A;
    Vec B;
    RowVec C;
    Vec Doff;

    Eigen::Index order() const { return A.rows(); }

    bool dimensions_consistent() const {
        const auto n = A.rows();
        return A.cols() == n && B.rows() == n && C.cols() == n && Doff.rows() == n;
    }

    template <typename T>
    StateSpaceT<T> cast() const {
        return {A.template cast<T>(), B.template cast<T>(),
                C.template cast<T>(), Doff.template cast<T>()};
    }
};

using StateSpace = StateSpaceT<double>;

//! Two-mass plant parameters: active body m driven by the actuator force,
//! passive body M attached through a spring/damper link.
struct PhysicalParams {
    double active_mass = 0.6;        // m   [kg]
    double passive_mass = 0.75;      // M   [kg]
    double stiffness = 200.0;        // k   [N/m]
    double link_damping = 0.009;     // zeta [N s/m]
    double actuator_damping = 200.001;  // sigma [N s/m]
    double active_load = 0.6 * 9.806;   // phi [N], constant load on m
    double passive_load = 0.75 * 9.806; // Phi [N], constant load on M
};

//! Sign convention for the passive-velocity coupling term in the active-mass
//! row. `symmetric` gives the symmetric damper matrix [[s+z, -z], [-z, z]]
//! (a physical damper between the bodies, +zeta/m at A(0,2)); `asymmetric`
//! flips that single entry.
enum class DampingCoupling { symmetric, asymmetric };

//! Voice-coil actuator: f(s) = kappa/(tau s + 1) u(s). tau = 0 collapses to
//! a pure gain.
struct ActuatorLag {
    double kappa = 3.2811;  // [N/V]
    double tau = 0.0012;    // [s]

    //! Same lag with the static gain compensated away (the command path
    //! inverts kappa), for loop-shaping analysis.
    ActuatorLag unit_gain() const { return {1.0, tau}; }
};

//! Dominant oscillatory mode of a plant.
struct ModeInfo {
    double natural_frequency;  // omega0 [rad/s]
    double damping_ratio;      // delta
    double damped_frequency;   // omega = omega0 sqrt(1 - delta^2) [rad/s]
};

//! Build the order-4 model, state x = (zdot, z, ydot, y).
inline StateSpace make_state_space(const PhysicalParams& p,
                                   DampingCoupling coupling = DampingCoupling::symmetric) {
    if (!(p.active_mass > 0) || !(p.passive_mass > 0) || !(p.stiffness > 0))
        throw Error("masses and stiffness must be positive");
    if (p.link_damping < 0 || p.actuator_damping < 0)
        throw Error("damping coefficients must be non-negative");

    const double m = p.active_mass, M = p.passive_mass, k = p.stiffness;
    const double z = p.link_damping, s = p.actuator_damping;
    const double zc = (coupling == DampingCoupling::symmetric) ? z : -z;

    StateSpace ss;
    ss.A.resize(4, 4);
    ss.A << -(s + z) / m, -k / m, zc / m, k / m,
            1, 0, 0, 0,
            z / M, k / M, -z / M, -k / M,
            0, 0, 1, 0;
    ss.B.resize(4);
    ss.B << 1 / m, 0, 0, 0;
    ss.C.resize(4);
    ss.C << 0, 0, 0, 1;
    ss.Doff.resize(4);
    ss.Doff << -p.active_load / m, 0, -p.passive_load / M, 0;
    return ss;
}

//! The identified plant, as a fixed numeric quadruple.
inline StateSpace reference_plant() {
    StateSpace ss;
    ss.A.resize(4, 4);
    ss.A << -333.35, -333.33, 0.015, 333.33,
            1, 0, 0, 0,
            0.012, 266.66, -0.012, -266.66,
            0, 0, 1, 0;
    ss.B.resize(4);
    ss.B << 1.667, 0, 0, 0;
    ss.C.resize(4);
    ss.C << 0, 0, 0, 1;
    ss.Doff.resize(4);
    ss.Doff << -9.806, 0, -9.806, 0;
    return ss;
}

//! Physical parameters back-solved from the reference plant's entries.
inline PhysicalParams reference_params() { return PhysicalParams{}; }

//! Extract the complex pair with the smallest damping ratio (ties broken by
//! lower omega0). Throws NoOscillatoryMode when the spectrum is all-real.
inline ModeInfo dominant_oscillatory_mode(const StateSpace& sys) {
    const Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw Error("eigen decomposition failed");

    const auto& ev = es.eigenvalues();
    bool found = false;
    double best_delta = std::numeric_limits<double>::infinity();
    double best_w0 = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double re = ev[i].real(), im = ev[i].imag();
        const double mag = std::abs(ev[i]);
        if (std::abs(im) <= 1e-12 * std::max(mag, 1.0)) continue;  // real eigenvalue
        const double delta = -re / mag;
        if (!found || delta < best_delta - 1e-12 * best_delta ||
            (std::abs(delta - best_delta) <= 1e-12 * std::abs(best_delta) && mag < best_w0)) {
            found = true;
            best_delta = delta;
            best_w0 = mag;
        }
    }
    if (!found) throw NoOscillatoryMode();
    const double clipped = std::min(std::max(best_delta, -1.0), 1.0);
    return {best_w0, best_delta, best_w0 * std::sqrt(1.0 - clipped * clipped)};
}

}  // namespace ncs
