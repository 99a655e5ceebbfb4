#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ncs/delay_line.hpp"
#include "ncs/state_space.hpp"

namespace ncs {

struct Saturated {
    double value;
    bool clipped;
};

inline Saturated saturate(double u, double lo, double hi) {
    if (!(lo < hi)) throw Error("saturation bounds must satisfy lo < hi");
    if (u < lo) return {lo, true};
    if (u > hi) return {hi, true};
    return {u, false};
}

//! Plain PI with optional back-calculation anti-windup. With anti-windup
//! disabled the integral is the exact rectangle-rule sum of e dt.
struct PiController {
    double kp = 100.0;  // [V/m]
    double ki = 170.0;  // [V/(m s)]
    double integ = 0.0;
    bool anti_windup = false;
    double back_calc = 0.0;  // [1/s]

    //! u_excess = u_applied - u_raw (zero unless saturating).
    double step(double e, double dt, double u_excess = 0.0) {
        integ += e * dt;
        if (anti_windup) integ += back_calc * u_excess * dt;
        return kp * e + ki * integ;
    }
};

//! u_d(t) = alpha (y(t) - y(t - theta)). retune() moves theta through a
//! first-order lag so a step-wise adapted estimate cannot jitter the
//! buffer lookups.
struct DelayCompensator {
    double alpha = 100.0;  // [V/m]
    double theta = 0.0;    // [s]
    double smoothing_tau = 0.05;  // [s]
    DelayLine buffer;

    DelayCompensator() = default;
    DelayCompensator(double alpha_, double theta_, double dt, double max_delay)
        : alpha(alpha_), theta(theta_), buffer(dt, max_delay) {}

    double step(double y) {
        buffer.push(y);
        return alpha * (y - buffer.at_delay(theta));
    }

    void retune(double theta_cmd, double dt) {
        if (theta_cmd > buffer.max_delay()) theta_cmd = buffer.max_delay();
        if (theta_cmd < 0) theta_cmd = 0;
        if (smoothing_tau > 0)
            theta += (dt / smoothing_tau) * (theta_cmd - theta);
        else
            theta = theta_cmd;
    }
};

//! Luenberger observer propagated as a model copy with output injection:
//!   xhat_dot = A xhat + B f_in + Doff + Q (y - C xhat).
//! Substituting f_in = r - K xhat recovers the closed-loop estimation
//! dynamics (A - BK - QC) xhat + B r + Q y.
struct StateObserver {
    StateSpace model;
    Eigen::RowVectorXd K;
    Eigen::VectorXd Q;
    Eigen::VectorXd xhat;
    double feedforward = 0.0;  // [N], cancels the known constant disturbance

    //! One RK4 step with f_in and y held over the step.
    void step(double f_in, double y_meas, double dt) {
        auto deriv = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return model.A * x + model.B * f_in + model.Doff +
                   Q * (y_meas - (model.C * x)(0));
        };
        const Eigen::VectorXd k1 = deriv(xhat);
        const Eigen::VectorXd k2 = deriv(xhat + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = deriv(xhat + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = deriv(xhat + dt * k3);
        xhat += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    //! Force command r - K xhat plus the disturbance feedforward.
    double control(double r) const { return r - (K * xhat)(0) + feedforward; }
};

//! u(t) = u_pi(t) + u_d(t) + gravity_volts.
struct CombinedLaw {
    PiController pi;
    DelayCompensator comp;
    double gravity_volts = 4.035;

    double step(double r, double y, double dt, double u_excess = 0.0) {
        return pi.step(r - y, dt, u_excess) + comp.step(y) + gravity_volts;
    }
};

}  // namespace ncs
