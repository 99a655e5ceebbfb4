#include "ncs/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "ncs/frequency.hpp"

namespace ncs {

std::size_t Trace::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw Error("no trace column named '" + name + "'");
}

std::vector<double> Trace::series(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

namespace {

//! Wall force for the penalty contact model (zero inside the travel range).
double wall_force(double z, double zdot, const Limits& lim, const WallModel& wall) {
    if (!wall.penalty) return 0.0;
    if (z < lim.z_min) return -wall.k_wall * (z - lim.z_min) - wall.c_wall * zdot;
    if (z > lim.z_max) return -wall.k_wall * (z - lim.z_max) - wall.c_wall * zdot;
    return 0.0;
}

}  // namespace

PlantState plant_step(const PlantState& st, const StateSpace& sys, const ActuatorLag& act,
                      double u, double dt, const Limits& limits, const WallModel& wall) {
    const bool lag = act.tau > 0;
    const auto n = sys.order();

    auto deriv = [&](const Eigen::VectorXd& x, double f, Eigen::VectorXd& dx, double& df) {
        const double force = lag ? f : act.kappa * u;
        dx = sys.A * x + sys.B * force + sys.Doff;
        if (wall.penalty) dx[0] += wall_force(x[1], x[0], limits, wall) * sys.B[0];
        df = lag ? (act.kappa * u - f) / act.tau : 0.0;
    };

    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
    double f1, f2, f3, f4;
    deriv(st.x, st.f_act, k1, f1);
    deriv(st.x + 0.5 * dt * k1, st.f_act + 0.5 * dt * f1, k2, f2);
    deriv(st.x + 0.5 * dt * k2, st.f_act + 0.5 * dt * f2, k3, f3);
    deriv(st.x + dt * k3, st.f_act + dt * f3, k4, f4);

    PlantState out;
    out.x = st.x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.f_act = lag ? st.f_act + (dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4) : act.kappa * u;
    out.t = st.t + dt;

    if (!wall.penalty) {
        // inelastic stop: clamp z, zero the inward velocity, passive states untouched
        if (out.x[1] < limits.z_min) {
            out.x[1] = limits.z_min;
            if (out.x[0] < 0) out.x[0] = 0.0;
        } else if (out.x[1] > limits.z_max) {
            out.x[1] = limits.z_max;
            if (out.x[0] > 0) out.x[0] = 0.0;
        }
    }

    if (!out.x.allFinite() || !std::isfinite(out.f_act)) throw NonFinite(-1);
    return out;
}

namespace {

struct EquilibriumInit {
    Eigen::VectorXd x;
    double f;  // gravity-balancing force [N]
};

//! Open-loop rest point at z = z0: velocities zero, spring stretched by
//! Phi/k, input force carrying both loads.
EquilibriumInit open_loop_equilibrium(const PhysicalParams& p, double z0) {
    EquilibriumInit e;
    e.x.resize(4);
    e.x << 0.0, z0, 0.0, z0 - p.passive_load / p.stiffness;
    e.f = p.active_load + p.passive_load;
    return e;
}

struct ControllerStack {
    // pi family
    PiController pi;
    DelayCompensator comp;
    double gravity_volts = 0.0;
    // state feedback family
    Eigen::RowVectorXd K;
    StateObserver observer;
    double gravity_force = 0.0;
    double dc_gain = 1.0;  // closed-loop y-per-force, converts reference steps
    // adaptive estimator
    bool adaptive = false;
    BiasCanceller bias{1.0, 1.0};
    FrequencyEstimator est{1.0, 0.0};
    double theta_cmd = 0.0;
    double w = 0.0, nu = 0.0;
};

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
    if (!(cfg.dt > 0) || !(cfg.t_end > cfg.dt)) throw Error("bad dt/t_end");
    if (!(cfg.limits.u_min < cfg.limits.u_max) || !(cfg.limits.z_min < cfg.limits.z_max))
        throw Error("bad limit ranges");

    const StateSpace sys = cfg.plant();
    const PhysicalParams& p = cfg.params;
    NoiseStream noise(cfg.noise);

    std::vector<Event> events = cfg.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });

    const ModeInfo mode = dominant_oscillatory_mode(sys);
    const double theta_max = 2.0 * M_PI / cfg.ctrl.omega_min;

    ControllerStack cs;
    const ControllerKind kind = cfg.controller;
    const bool pi_family = kind == ControllerKind::pi_only ||
                           kind == ControllerKind::pi_plus_delay_fixed ||
                           kind == ControllerKind::pi_plus_delay_adaptive;
    const bool sf_family = kind == ControllerKind::observer_state_feedback ||
                           kind == ControllerKind::measured_state_feedback;

    if (pi_family) {
        cs.pi = PiController{cfg.ctrl.kp, cfg.ctrl.ki};
        const double theta0 = cfg.ctrl.theta > 0
                                  ? cfg.ctrl.theta
                                  : compute_theta(sys, mode.damped_frequency);
        const double alpha = kind == ControllerKind::pi_only ? 0.0 : cfg.ctrl.alpha;
        cs.comp = DelayCompensator(alpha, theta0, cfg.dt, theta_max);
        cs.comp.smoothing_tau = cfg.ctrl.theta_smoothing;
        cs.gravity_volts = cfg.ctrl.gravity_volts;
        if (kind == ControllerKind::pi_plus_delay_adaptive) {
            cs.adaptive = true;
            const double beta =
                cfg.ctrl.beta > 0 ? cfg.ctrl.beta : 1.5 * mode.damped_frequency;
            cs.bias = BiasCanceller(beta, cfg.dt);
            cs.est = FrequencyEstimator(cfg.ctrl.omega_hat0, cfg.ctrl.gamma);
            cs.est.floor = cfg.ctrl.estimator_floor;
            cs.est.deadzone = cfg.ctrl.deadzone;
            cs.theta_cmd = theta0;
        }
    } else if (sf_family) {
        cs.K = place_state_feedback(sys, cfg.ctrl.feedback_poles);
        cs.gravity_force = p.active_load + p.passive_load;
        const Eigen::MatrixXd Acl = sys.A - sys.B * cs.K;
        cs.dc_gain = -(sys.C * Acl.fullPivLu().solve(sys.B))(0);
        if (kind == ControllerKind::observer_state_feedback) {
            cs.observer.model = sys;
            cs.observer.K = cs.K;
            cs.observer.Q = place_observer(sys, cfg.ctrl.observer_poles);
            cs.observer.feedforward = cs.gravity_force;
        }
    }

    // initial state
    PlantState st;
    if (cfg.init.kind == InitKind::closed_loop_equilibrium && sf_family) {
        const Eigen::MatrixXd Acl = sys.A - sys.B * cs.K;
        st.x = -Acl.fullPivLu().solve(sys.B * cs.gravity_force + sys.Doff);
        st.f_act = cs.gravity_force - (cs.K * st.x)(0);
    } else {
        const EquilibriumInit eq = open_loop_equilibrium(p, cfg.init.z0);
        st.x = eq.x;
        st.f_act = eq.f;
    }
    st.x[0] += cfg.init.zdot0;
    st.x[2] += cfg.init.ydot0;
    st.t = 0.0;
    if (kind == ControllerKind::observer_state_feedback) cs.observer.xhat = st.x;

    const double y_init = st.x[3];
    double r = y_init;        // output-level reference [m]
    double r_force = 0.0;     // input-level reference for the SF loops [N]
    bool input_cut = false;

    RunResult out;
    out.trace.columns = {"t",    "r",    "y",    "y_meas", "u_raw", "u_sat",
                         "sat_flag", "z", "zdot", "ydot",   "f_act"};
    if (cs.adaptive) {
        out.trace.columns.push_back("omega_t");
        out.trace.columns.push_back("theta");
        out.estimator.columns = {"t", "w", "eta1", "eta2", "nu", "omega_t", "theta"};
    }
    if (kind == ControllerKind::observer_state_feedback)
        for (int i = 1; i <= 4; ++i)
            out.trace.columns.push_back("xhat" + std::to_string(i));

    const long nsteps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
    std::size_t next_event = 0;
    const int dec = std::max(cfg.decimation, 1);

    for (long i = 0; i < nsteps; ++i) {
        const double t = static_cast<double>(i) * cfg.dt;
        st.t = t;

        while (next_event < events.size() && t >= events[next_event].time) {
            const Event& ev = events[next_event];
            switch (ev.kind) {
                case EventKind::reference_step:
                    r = y_init + ev.value;
                    r_force = ev.value / cs.dc_gain;
                    break;
                case EventKind::load_impulse:
                    st.x[2] += ev.value;
                    break;
                case EventKind::input_cutoff:
                    input_cut = true;
                    break;
                case EventKind::input_restore:
                    input_cut = false;
                    break;
            }
            ++next_event;
        }

        const double y_meas = measure(st, noise);

        if (cs.adaptive) {
            cs.w = cs.bias.step(y_meas);
            const auto eo = cs.est.step(cs.w, cfg.dt);
            cs.nu = eo.nu;
            cs.theta_cmd = adaptive_theta(sys, eo.omega_t, cfg.ctrl.theta_mode);
            cs.comp.retune(cs.theta_cmd, cfg.dt);
        }

        double u_raw = 0.0;
        switch (kind) {
            case ControllerKind::none:
                u_raw = cfg.u_hold;
                break;
            case ControllerKind::pi_only:
            case ControllerKind::pi_plus_delay_fixed:
            case ControllerKind::pi_plus_delay_adaptive:
                u_raw = cs.pi.step(r - y_meas, cfg.dt) + cs.comp.step(y_meas) +
                        cs.gravity_volts;
                break;
            case ControllerKind::observer_state_feedback:
                u_raw = cs.observer.control(r_force) / cfg.actuator.kappa;
                break;
            case ControllerKind::measured_state_feedback:
                u_raw = (r_force - (cs.K * st.x)(0) + cs.gravity_force) / cfg.actuator.kappa;
                break;
        }
        if (input_cut) u_raw = 0.0;

        const Saturated us = saturate(u_raw, cfg.limits.u_min, cfg.limits.u_max);

        if (kind == ControllerKind::observer_state_feedback) {
            const double f_in = cfg.ctrl.observer_input == ObserverInput::commanded_force
                                    ? cfg.actuator.kappa * us.value
                                    : st.f_act;
            cs.observer.step(f_in, y_meas, cfg.dt);
        }

        if (i % dec == 0) {
            std::vector<double> row = {t,        r,        st.x[3],  y_meas,
                                       u_raw,    us.value, us.clipped ? 1.0 : 0.0,
                                       st.x[1],  st.x[0],  st.x[2],  st.f_act};
            if (cs.adaptive) {
                row.push_back(cs.est.omega_t);
                row.push_back(cs.comp.theta);
                out.estimator.rows.push_back({t, cs.w, cs.est.eta1, cs.est.eta2, cs.nu,
                                              cs.est.omega_t, cs.comp.theta});
            }
            if (kind == ControllerKind::observer_state_feedback)
                for (int j = 0; j < 4; ++j) row.push_back(cs.observer.xhat[j]);
            out.trace.rows.push_back(std::move(row));
        }

        try {
            st = plant_step(st, sys, cfg.actuator, us.value, cfg.dt, cfg.limits, cfg.wall);
        } catch (const NonFinite&) {
            throw NonFinite(i);
        }
    }

    return out;
}

const std::map<std::string, Scenario>& scenario_registry() {
    static const std::map<std::string, Scenario> reg = [] {
        std::map<std::string, Scenario> m;

        {
            // constant gravity-compensating input, switched off at t = 20 s
            ScenarioConfig c;
            c.controller = ControllerKind::none;
            c.u_hold = 4.035;
            c.init.z0 = 0.018;
            c.noise.std = 0.0;
            c.dt = 2e-4;
            c.t_end = 40.0;
            c.events = {{20.0, EventKind::input_cutoff, 0.0}};
            m["free_fall"] = {"gravity-compensated hold, input cut at t=20 s; the load "
                              "oscillates after the active mass lands on the travel stop",
                              {{"free_fall", c}}};
        }
        {
            // state feedback with and without the observer under sensor noise
            ScenarioConfig with_obs;
            with_obs.controller = ControllerKind::observer_state_feedback;
            with_obs.init.kind = InitKind::closed_loop_equilibrium;
            with_obs.noise.std = 2e-5;
            with_obs.dt = 2e-4;
            with_obs.t_end = 8.0;
            with_obs.events = {{1.0, EventKind::reference_step, 0.001}};
            ScenarioConfig no_obs = with_obs;
            no_obs.controller = ControllerKind::measured_state_feedback;
            m["observer_infeasible"] = {
                "pole-placed state feedback, observer vs full state measurement; the "
                "observer loop chatters into both input rails",
                {{"observer", with_obs}, {"measured", no_obs}}};
        }
        {
            // plain PI against PI plus the fixed-delay compensator
            ScenarioConfig pi;
            pi.controller = ControllerKind::pi_only;
            pi.ctrl.alpha = 0.0;
            pi.init.z0 = 0.008;
            pi.noise.std = 4e-6;
            pi.dt = 2e-4;
            pi.t_end = 13.0;
            pi.events = {{2.0, EventKind::reference_step, 0.005}};
            ScenarioConfig pid = pi;
            pid.controller = ControllerKind::pi_plus_delay_fixed;
            pid.ctrl.alpha = 100.0;
            m["pi_vs_delay"] = {"reference step under PI(100,170); alpha=0 grows "
                                "unstable, alpha=100 cancels the oscillation",
                                {{"pi_only", pi}, {"pi_delay", pid}}};
        }
        {
            // adaptive delay control, load pushed down then up
            ScenarioConfig c;
            c.controller = ControllerKind::pi_plus_delay_adaptive;
            c.ctrl.alpha = 100.0;
            c.ctrl.gamma = 600.0;
            c.ctrl.omega_hat0 = 40.0;
            c.ctrl.theta_mode = ThetaMode::heuristic;
            c.ctrl.beta = 2.8 * 16.346083838727791;
            c.ctrl.deadzone = 2e-6;
            c.init.z0 = 0.008;
            c.init.ydot0 = 0.10;
            c.noise.std = 4e-6;
            c.dt = 2e-4;
            c.t_end = 30.0;
            c.events = {{10.0, EventKind::load_impulse, -0.10},
                        {20.0, EventKind::load_impulse, +0.10}};
            m["adaptive_disturbed"] = {
                "adaptive theta from the frequency estimator (gamma=600); two load "
                "impulses of opposite sign",
                {{"adaptive_disturbed", c}}};
        }
        {
            // adaptive delay control from a strongly oscillating start
            ScenarioConfig c;
            c.controller = ControllerKind::pi_plus_delay_adaptive;
            c.ctrl.alpha = 100.0;
            c.ctrl.gamma = 600.0;
            c.ctrl.omega_hat0 = 40.0;
            c.ctrl.theta_mode = ThetaMode::heuristic;
            c.ctrl.beta = 2.8 * 16.346083838727791;
            c.ctrl.deadzone = 2e-6;
            c.init.z0 = 0.008;
            c.init.ydot0 = 0.20;
            c.noise.std = 4e-6;
            c.dt = 2e-4;
            c.t_end = 15.0;
            c.events = {{1.5, EventKind::reference_step, 0.002}};
            m["adaptive_oscillatory_init"] = {
                "oscillatory initial condition, then a reference step while the "
                "output still swings",
                {{"adaptive_oscillatory_init", c}}};
        }
        return m;
    }();
    return reg;
}

}  // namespace ncs
