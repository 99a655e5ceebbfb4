#pragma once

#include <cmath>

#include "ncs/delay_line.hpp"
#include "ncs/frequency.hpp"
#include "ncs/state_space.hpp"

namespace ncs {

//! w(t) = y(t) - y(t - pi/beta): removes a constant (or slowly varying)
//! offset while keeping the fundamental oscillation.
struct BiasCanceller {
    double beta;  // [rad/s], phase-shifting factor, nominal bound: omega < beta < 3 omega
    DelayLine buffer;

    BiasCanceller(double beta_, double dt) : beta(beta_), buffer(dt, M_PI / beta_ + 2 * dt) {
        if (!(beta_ > 0)) throw Error("beta must be positive");
    }

    double step(double y) {
        buffer.push(y);
        return y - buffer.at_delay(M_PI / beta);
    }
};

//! Adaptive second-order filter tracking the input's oscillation frequency:
//!   eta1' = eta2
//!   eta2' = -w~^2 eta1 - 2 w~ eta2 + 2 w~ w,   nu = eta2
//!   w~'   = -gamma w~ sign(eta1) (w - nu)
//! The multiplicative w~ keeps the estimate from crossing into the negative
//! range; a hard floor guards the discretized update. sign() may carry a
//! deadzone for noisy inputs (exact zero maps to 0 either way).
struct FrequencyEstimator {
    double eta1 = 0.0;
    double eta2 = 0.0;
    double omega_t;        // current estimate w~ [rad/s]
    double gamma;          // adaptation gain
    double floor = 0.1;    // [rad/s]
    double deadzone = 0.0; // |eta1| below this freezes adaptation

    struct Output {
        double nu;
        double omega_t;
    };

    FrequencyEstimator(double omega0, double gamma_) : omega_t(omega0), gamma(gamma_) {
        if (!(omega0 > 0)) throw Error("initial frequency estimate must be positive");
    }

    //! One RK4 step of the coupled (eta1, eta2, w~) dynamics, w held constant.
    Output step(double w, double dt) {
        auto sgn = [this](double e1) -> double {
            if (std::abs(e1) <= deadzone) return 0.0;
            return e1 > 0 ? 1.0 : -1.0;
        };
        auto deriv = [&](double e1, double e2, double om, double out[3]) {
            out[0] = e2;
            out[1] = -om * om * e1 - 2.0 * om * e2 + 2.0 * om * w;
            out[2] = -gamma * om * sgn(e1) * (w - e2);
        };
        double k1[3], k2[3], k3[3], k4[3];
        deriv(eta1, eta2, omega_t, k1);
        deriv(eta1 + 0.5 * dt * k1[0], eta2 + 0.5 * dt * k1[1], omega_t + 0.5 * dt * k1[2], k2);
        deriv(eta1 + 0.5 * dt * k2[0], eta2 + 0.5 * dt * k2[1], omega_t + 0.5 * dt * k2[2], k3);
        deriv(eta1 + dt * k3[0], eta2 + dt * k3[1], omega_t + dt * k3[2], k4);
        eta1 += (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        eta2 += (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        omega_t += (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
        if (omega_t < floor) omega_t = floor;
        return {eta2, omega_t};
    }
};

enum class ThetaMode {
    model,     // re-evaluate -arg G(i w~)/w~ on the nominal plant
    heuristic  // theta = pi / w~, no plant model required
};

//! Delay constant re-evaluated at the current frequency estimate.
inline double adaptive_theta(const StateSpace& nominal, double omega_t,
                             ThetaMode mode = ThetaMode::model) {
    if (!(omega_t > 0)) throw Error("adaptive_theta requires a positive estimate");
    if (mode == ThetaMode::heuristic) return M_PI / omega_t;
    return compute_theta(nominal, omega_t);
}

}  // namespace ncs
