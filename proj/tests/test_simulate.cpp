#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ncs/simulate.hpp"

using namespace ncs;

namespace {

PlantState equilibrium(const PhysicalParams& p, double z0) {
    PlantState st;
    st.x.resize(4);
    st.x << 0.0, z0, 0.0, z0 - p.passive_load / p.stiffness;
    st.f_act = p.active_load + p.passive_load;
    return st;
}

}  // namespace

TEST_CASE("equilibrium is preserved over 1e5 steps") {
    const StateSpace sys = reference_plant();
    const PhysicalParams p = reference_params();
    const ActuatorLag act;
    const Limits lim;

    PlantState st = equilibrium(p, 0.01);
    const Eigen::VectorXd x0 = st.x;
    const double u = st.f_act / act.kappa;
    for (int i = 0; i < 100000; ++i) st = plant_step(st, sys, act, u, 2e-4, lim);
    CHECK((st.x - x0).norm() < 1e-9);
}

TEST_CASE("halving the step changes the state by less than 1e-6") {
    const StateSpace sys = reference_plant();
    const PhysicalParams p = reference_params();
    const ActuatorLag act;
    const Limits lim;

    auto run = [&](double dt) {
        PlantState st = equilibrium(p, 0.015);
        st.x[2] += 0.05;  // excite the mode
        const long n = static_cast<long>(1.0 / dt);
        for (long i = 0; i < n; ++i) st = plant_step(st, sys, act, 2.0, dt, lim);
        return st.x;
    };
    const Eigen::VectorXd a = run(2e-4), b = run(1e-4);
    CHECK((a - b).norm() / b.norm() < 1e-6);
}

TEST_CASE("unforced undamped-load energy never grows") {
    PhysicalParams p = reference_params();
    p.active_load = 0;
    p.passive_load = 0;
    const StateSpace sys = make_state_space(p);
    const ActuatorLag act{1.0, 0.0};
    Limits lim;
    lim.z_min = -10;
    lim.z_max = 10;

    PlantState st;
    st.x.resize(4);
    st.x << 0.0, 0.004, 0.08, 0.0;
    st.f_act = 0;

    auto energy = [&](const PlantState& s) {
        const double dz = s.x[1] - s.x[3];
        return 0.5 * p.active_mass * s.x[0] * s.x[0] + 0.5 * p.passive_mass * s.x[2] * s.x[2] +
               0.5 * p.stiffness * dz * dz;
    };
    double prev = energy(st);
    const double e0 = prev;
    for (int i = 0; i < 20000; ++i) {
        st = plant_step(st, sys, act, 0.0, 2e-4, lim);
        const double e = energy(st);
        CHECK(e <= prev + 1e-12 * e0);
        prev = e;
    }
    CHECK(prev < e0);
}

TEST_CASE("travel stop clamps inward motion only") {
    const StateSpace sys = reference_plant();
    const ActuatorLag act;
    Limits lim;
    lim.z_min = 0.0;
    lim.z_max = 0.021;

    PlantState st;
    st.x.resize(4);
    st.x << -0.5, 0.0001, 0.0, -0.03;  // heading hard into the lower stop
    st.f_act = 0;
    st = plant_step(st, sys, act, 0.0, 2e-4, lim);
    CHECK(st.x[1] == lim.z_min);
    CHECK(st.x[0] == 0.0);

    st.x << 0.5, 0.0209, 0.0, -0.01;  // heading into the upper stop
    st = plant_step(st, sys, act, 3.0, 2e-4, lim);
    CHECK(st.x[1] == lim.z_max);
    CHECK(st.x[0] == 0.0);
}

TEST_CASE("penalty wall bounces instead of clamping") {
    const StateSpace sys = reference_plant();
    const ActuatorLag act;
    Limits lim;
    WallModel wall;
    wall.penalty = true;
    wall.k_wall = 1e6;
    wall.c_wall = 10.0;

    PlantState st;
    st.x.resize(4);
    st.x << -0.2, 0.0005, 0.0, -0.036;
    st.f_act = 13.2;
    bool went_below = false;
    for (int i = 0; i < 5000; ++i) {
        st = plant_step(st, sys, act, 4.035, 2e-4, lim, wall);
        went_below = went_below || st.x[1] < 0.0;
    }
    CHECK(went_below);          // penetrates the wall slightly
    CHECK(st.x[1] > -1e-4);     // but the wall pushes back
}

TEST_CASE("divergence raises NonFinite with the step index") {
    ScenarioConfig cfg;
    cfg.controller = ControllerKind::none;
    cfg.u_hold = 4.035;
    cfg.dt = 0.05;  // far beyond the actuator-pole stability limit
    cfg.t_end = 50.0;
    cfg.noise.std = 0;
    CHECK_THROWS_AS(run_scenario(cfg), NonFinite);
}

TEST_CASE("measurement noise basics") {
    NoiseModel clean{0.0, 1};
    NoiseStream s0(clean);
    PlantState st;
    st.x.resize(4);
    st.x << 0, 0, 0, 0.0123;
    CHECK(measure(st, s0) == 0.0123);

    NoiseModel nm{4e-6, 99};
    NoiseStream a(nm), b(nm);
    double acc = 0, acc2 = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double va = measure(st, a);
        const double vb = measure(st, b);
        CHECK(va == vb);  // same seed, identical stream
        const double x = va - 0.0123;
        acc += x;
        acc2 += x * x;
    }
    const double std_est = std::sqrt(acc2 / n - (acc / n) * (acc / n));
    CHECK(std::abs(std_est - 4e-6) / 4e-6 < 0.01);
}

TEST_CASE("runs are deterministic for a fixed config and seed") {
    const ScenarioConfig cfg = scenario_registry().at("pi_vs_delay").jobs[1].second;
    ScenarioConfig shorter = cfg;
    shorter.t_end = 3.0;
    const RunResult a = run_scenario(shorter);
    const RunResult b = run_scenario(shorter);
    REQUIRE(a.trace.rows.size() == b.trace.rows.size());
    for (std::size_t i = 0; i < a.trace.rows.size(); ++i)
        CHECK(a.trace.rows[i] == b.trace.rows[i]);
}

TEST_CASE("idle scenario produces a constant trace") {
    ScenarioConfig cfg;
    cfg.controller = ControllerKind::none;
    cfg.u_hold = (reference_params().active_load + reference_params().passive_load) /
                 ActuatorLag{}.kappa;
    cfg.t_end = 2.0;
    cfg.noise.std = 0;
    const RunResult res = run_scenario(cfg);
    const auto y = res.trace.series("y");
    for (const double v : y) CHECK(v == doctest::Approx(y.front()).epsilon(1e-9));
}

TEST_CASE("every trace row respects the constraints") {
    for (const auto& name : {"free_fall", "pi_vs_delay"}) {
        const auto& sc = scenario_registry().at(name);
        for (const auto& [jname, cfg] : sc.jobs) {
            const RunResult res = run_scenario(cfg);
            const auto z = res.trace.series("z");
            const auto us = res.trace.series("u_sat");
            for (const double v : z) {
                CHECK(v >= cfg.limits.z_min - 1e-15);
                CHECK(v <= cfg.limits.z_max + 1e-15);
            }
            for (const double v : us) {
                CHECK(v >= cfg.limits.u_min);
                CHECK(v <= cfg.limits.u_max);
            }
        }
    }
}

TEST_CASE("free fall lands on the stop and the load keeps swinging") {
    const ScenarioConfig cfg = scenario_registry().at("free_fall").jobs[0].second;
    const RunResult res = run_scenario(cfg);
    const auto t = res.trace.series("t");
    const auto z = res.trace.series("z");
    const auto y = res.trace.series("y");

    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] > 25.0) CHECK(z[i] == cfg.limits.z_min);

    std::vector<double> tw, yw;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] > 21.0 && t[i] < 21.0 + 11 * 0.3845) {
            tw.push_back(t[i]);
            yw.push_back(y[i]);
        }
    const auto fit = test_helpers::fit_oscillation(tw, yw);
    REQUIRE(fit.ok);
    const double wd = dominant_oscillatory_mode(cfg.plant()).damped_frequency;
    CHECK(std::abs(fit.omega - wd) / wd < 0.02);
}

TEST_CASE("with the stop out of reach the fall shows the full-system mode") {
    // relative coordinate during the fall: the oscillatory pair of the free
    // plant, damping ratio 0.031
    ScenarioConfig cfg = scenario_registry().at("free_fall").jobs[0].second;
    cfg.limits.z_min = -10.0;
    cfg.t_end = 25.0;
    const RunResult res = run_scenario(cfg);
    const auto t = res.trace.series("t");
    const auto z = res.trace.series("z");
    const auto y = res.trace.series("y");

    std::vector<double> tw, rel;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] > 20.3 && t[i] < 20.3 + 11 * 0.3845) {
            tw.push_back(t[i]);
            rel.push_back(z[i] - y[i]);
        }
    const auto fit = test_helpers::fit_oscillation(tw, rel);
    REQUIRE(fit.ok);
    const ModeInfo m = dominant_oscillatory_mode(cfg.plant());
    CHECK(std::abs(fit.omega - m.damped_frequency) / m.damped_frequency < 0.02);
    CHECK(std::abs(fit.delta - m.damping_ratio) / m.damping_ratio < 0.2);
}

TEST_CASE("registry contents") {
    const auto& reg = scenario_registry();
    for (const auto& name : {"free_fall", "observer_infeasible", "pi_vs_delay",
                             "adaptive_disturbed", "adaptive_oscillatory_init"})
        CHECK(reg.count(name) == 1);

    const auto& ad = reg.at("adaptive_disturbed").jobs[0].second;
    CHECK(ad.ctrl.gamma == 600.0);
    CHECK(ad.events.size() == 2);
    CHECK(ad.events[0].kind == EventKind::load_impulse);
    CHECK(ad.events[1].kind == EventKind::load_impulse);
    CHECK(ad.events[0].value * ad.events[1].value < 0);

    const auto& ff = reg.at("free_fall").jobs[0].second;
    REQUIRE(ff.events.size() == 1);
    CHECK(ff.events[0].kind == EventKind::input_cutoff);
    CHECK(ff.events[0].time == 20.0);

    const auto& pv = reg.at("pi_vs_delay");
    REQUIRE(pv.jobs.size() == 2);
    CHECK(pv.jobs[0].second.ctrl.kp == 100.0);
    CHECK(pv.jobs[0].second.ctrl.ki == 170.0);
    CHECK(pv.jobs[0].second.ctrl.alpha == 0.0);
    CHECK(pv.jobs[1].second.ctrl.alpha == 100.0);
}

TEST_CASE("trace columns carry the estimator and observer extras") {
    {
        ScenarioConfig cfg = scenario_registry().at("adaptive_oscillatory_init").jobs[0].second;
        cfg.t_end = 1.0;
        const RunResult res = run_scenario(cfg);
        CHECK_NOTHROW(res.trace.column("omega_t"));
        CHECK_NOTHROW(res.trace.column("theta"));
        REQUIRE(!res.estimator.rows.empty());
        CHECK(res.estimator.columns ==
              std::vector<std::string>{"t", "w", "eta1", "eta2", "nu", "omega_t", "theta"});
    }
    {
        ScenarioConfig cfg = scenario_registry().at("observer_infeasible").jobs[0].second;
        cfg.t_end = 0.5;
        const RunResult res = run_scenario(cfg);
        CHECK_NOTHROW(res.trace.column("xhat1"));
        CHECK_NOTHROW(res.trace.column("xhat4"));
        CHECK(res.estimator.rows.empty());
        CHECK_THROWS_AS(res.trace.column("omega_t"), Error);
    }
}
