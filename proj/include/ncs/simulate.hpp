#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ncs/control.hpp"
#include "ncs/design.hpp"
#include "ncs/estimator.hpp"
#include "ncs/state_space.hpp"

namespace ncs {

struct PlantState {
    Eigen::VectorXd x;   // (zdot, z, ydot, y)
    double f_act = 0.0;  // actuator force state [N]
    double t = 0.0;
};

struct NoiseModel {
    double std = 0.0;  // additive output noise [m]
    std::uint64_t seed = 1;
};

//! Seeded gaussian stream; identical seed, identical samples.
class NoiseStream {
public:
    explicit NoiseStream(const NoiseModel& m) : rng_(m.seed), dist_(0.0, 1.0), std_(m.std) {}
    double next() { return std_ > 0 ? std_ * dist_(rng_) : 0.0; }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> dist_;
    double std_;
};

inline double measure(const PlantState& st, NoiseStream& noise) {
    return st.x[3] + noise.next();
}

enum class EventKind { reference_step, load_impulse, input_cutoff, input_restore };

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::reference_step;
    double value = 0.0;  // reference_step: new y target as offset from initial y [m];
                         // load_impulse: passive-mass velocity jump [m/s]
};

enum class ControllerKind {
    none,
    pi_only,
    pi_plus_delay_fixed,
    pi_plus_delay_adaptive,
    observer_state_feedback,
    measured_state_feedback
};

//! What the observer believes the plant input force is. `commanded_force`
//! maps the saturated command through the static gain only (no lag model);
//! `plant_force` feeds the exact realized actuator force.
enum class ObserverInput { commanded_force, plant_force };

struct Limits {
    double z_min = 0.0;
    double z_max = 0.021;
    double u_min = 0.0;
    double u_max = 10.0;
};

//! Travel-limit contact. Default is the inelastic stop (position clamp,
//! inward velocity zeroed); the penalty wall is available for sensitivity
//! studies.
struct WallModel {
    bool penalty = false;
    double k_wall = 0.0;  // [N/m]
    double c_wall = 0.0;  // [N s/m]
};

struct ControllerParams {
    // PI / delay-compensator family
    double kp = 100.0;
    double ki = 170.0;
    double alpha = 0.0;
    double theta = 0.0;  // [s]; 0 selects the value computed from the plant mode
    double gravity_volts = 4.035;
    // state feedback / observer
    PoleSet feedback_poles{{-40, 0}, {-42, 0}, {-44, 0}, {-60, 0}};
    PoleSet observer_poles{{-498, 0}, {-503, 0}, {-508, 0}, {-513, 0}};
    ObserverInput observer_input = ObserverInput::commanded_force;
    // adaptive frequency estimator
    double gamma = 600.0;
    double omega_hat0 = 40.0;
    double beta = 0.0;  // [rad/s]; 0 selects 1.5x the nominal damped frequency
    double deadzone = 0.0;
    double estimator_floor = 0.1;
    double theta_smoothing = 0.05;  // [s]
    ThetaMode theta_mode = ThetaMode::model;
    double omega_min = 2.0;  // sizes delay buffers via theta_max = 2 pi / omega_min
};

enum class InitKind {
    open_loop_equilibrium,   // gravity balanced by a constant input force
    closed_loop_equilibrium  // rest point of the state-feedback loop (r = 0)
};

struct InitialState {
    InitKind kind = InitKind::open_loop_equilibrium;
    double z0 = 0.008;    // [m]
    double zdot0 = 0.0;   // additive velocity offsets [m/s]
    double ydot0 = 0.0;
};

struct ScenarioConfig {
    bool use_reference_plant = true;
    PhysicalParams params = reference_params();
    DampingCoupling coupling = DampingCoupling::symmetric;
    ActuatorLag actuator{3.2811, 0.0012};
    Limits limits;
    WallModel wall;
    ControllerKind controller = ControllerKind::none;
    ControllerParams ctrl;
    NoiseModel noise;
    std::vector<Event> events;
    double dt = 2e-4;
    double t_end = 10.0;
    InitialState init;
    double u_hold = 0.0;  // constant input for controller == none [V]
    int decimation = 10;

    StateSpace plant() const {
        return use_reference_plant ? reference_plant() : make_state_space(params, coupling);
    }
};

struct Trace {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
    //! Column slice as a flat vector.
    std::vector<double> series(const std::string& name) const;
};

struct RunResult {
    Trace trace;
    Trace estimator;  // empty unless the adaptive controller ran
};

//! One fixed RK4 step of the plant plus actuator lag with the input held
//! constant, then the travel-limit rule.
PlantState plant_step(const PlantState& st, const StateSpace& sys, const ActuatorLag& act,
                      double u, double dt, const Limits& limits, const WallModel& wall = {});

//! Full closed-loop run: measure -> estimator -> controller -> saturate ->
//! plant_step, with timeline events applied at their step boundaries.
RunResult run_scenario(const ScenarioConfig& cfg);

struct Scenario {
    std::string description;
    std::vector<std::pair<std::string, ScenarioConfig>> jobs;
};

//! Named configurations reproducing the reference experiments.
const std::map<std::string, Scenario>& scenario_registry();

}  // namespace ncs
