#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include "ncs/config.hpp"
#include "ncs/csv.hpp"
#include "ncs/design.hpp"
#include "ncs/frequency.hpp"
#include "ncs/simulate.hpp"

namespace fs = std::filesystem;
using namespace ncs;

namespace {

struct JobSummary {
    std::string name;
    double final_y = 0, final_r = 0, sat_fraction = 0, pp_last = 0;
    double final_omega = std::numeric_limits<double>::quiet_NaN();
    bool has_step = false;
    double pp1 = 0, pp2 = 0;  // peak-to-peak in the two 5 s windows after the step
};

double peak_to_peak(const std::vector<double>& t, const std::vector<double>& y, double a,
                    double b) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < a || t[i] >= b) continue;
        lo = std::min(lo, y[i]);
        hi = std::max(hi, y[i]);
    }
    return hi > lo ? hi - lo : 0.0;
}

JobSummary summarize(const std::string& name, const ScenarioConfig& cfg, const RunResult& res) {
    JobSummary s;
    s.name = name;
    const auto t = res.trace.series("t");
    const auto y = res.trace.series("y");
    const auto r = res.trace.series("r");
    const auto sat = res.trace.series("sat_flag");
    s.final_y = y.back();
    s.final_r = r.back();
    double acc = 0;
    for (const double v : sat) acc += v;
    s.sat_fraction = acc / static_cast<double>(sat.size());
    s.pp_last = peak_to_peak(t, y, cfg.t_end * 0.9, cfg.t_end + 1);
    if (!res.estimator.rows.empty()) s.final_omega = res.estimator.rows.back()[5];
    for (const auto& ev : cfg.events) {
        if (ev.kind != EventKind::reference_step) continue;
        s.has_step = true;
        s.pp1 = peak_to_peak(t, y, ev.time, ev.time + 5.0);
        s.pp2 = peak_to_peak(t, y, ev.time + 5.0, ev.time + 10.0);
    }
    return s;
}

void print_summary(std::ostream& os, const JobSummary& s) {
    os << "[" << s.name << "]\n";
    os << "  final y        = " << format_full(s.final_y) << " m\n";
    os << "  final r        = " << format_full(s.final_r) << " m\n";
    os << "  |y - r| final  = " << format_full(std::abs(s.final_y - s.final_r)) << " m\n";
    os << "  peak-to-peak over last 10% = " << format_full(s.pp_last) << " m\n";
    os << "  saturated steps = " << format_full(100.0 * s.sat_fraction) << " %\n";
    if (s.has_step) {
        os << "  step response windows: pp[0,5s] = " << format_full(s.pp1)
           << ", pp[5s,10s] = " << format_full(s.pp2) << "\n";
        os << "  oscillation: " << (s.pp2 > s.pp1 ? "GROWING" : "decaying") << "\n";
    }
    if (std::isfinite(s.final_omega))
        os << "  final omega estimate = " << format_full(s.final_omega) << " rad/s\n";
}

int cmd_run(const std::string& target, const std::vector<std::string>& overrides,
            const std::string& out_dir, long seed) {
    const auto& reg = scenario_registry();
    std::vector<std::pair<std::string, ScenarioConfig>> jobs;
    if (const auto it = reg.find(target); it != reg.end()) {
        jobs = it->second.jobs;
    } else if (fs::exists(target)) {
        jobs.emplace_back(fs::path(target).stem().string(), load_config(target));
    } else {
        std::cerr << "unknown scenario '" << target << "'. Known scenarios:\n";
        for (const auto& [name, sc] : reg) std::cerr << "  " << name << "\n";
        return 2;
    }

    for (auto& [name, cfg] : jobs) {
        for (const auto& ov : overrides) apply_override(cfg, ov);
        if (seed >= 0) cfg.noise.seed = static_cast<std::uint64_t>(seed);
    }

    fs::create_directories(out_dir);

    std::vector<std::future<RunResult>> futures;
    futures.reserve(jobs.size());
    for (const auto& [name, cfg] : jobs)
        futures.push_back(std::async(std::launch::async, [cfg] { return run_scenario(cfg); }));

    std::ofstream summary(fs::path(out_dir) / "summary.txt");
    int rc = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& [name, cfg] = jobs[i];
        try {
            const RunResult res = futures[i].get();
            const std::string prefix = jobs.size() > 1 ? "trace_" + name : "trace";
            write_csv_file((fs::path(out_dir) / (prefix + ".csv")).string(), res.trace);
            if (!res.estimator.rows.empty()) {
                const std::string eprefix =
                    jobs.size() > 1 ? "estimator_" + name : "estimator";
                write_csv_file((fs::path(out_dir) / (eprefix + ".csv")).string(),
                               res.estimator);
            }
            const JobSummary s = summarize(name, cfg, res);
            print_summary(std::cout, s);
            print_summary(summary, s);
        } catch (const NonFinite& e) {
            std::cerr << "job '" << name << "' diverged: " << e.what() << "\n";
            rc = 3;
        }
    }
    return rc;
}

StateSpace plant_from_option(const std::string& plant_file, PhysicalParams* params_out) {
    ScenarioConfig base;
    if (!plant_file.empty()) base = load_config(plant_file, base);
    if (params_out) *params_out = base.params;
    return base.plant();
}

int cmd_analyze(const std::string& plant_file, const std::string& out_dir, bool full) {
    PhysicalParams params;
    const StateSpace sys = plant_from_option(plant_file, &params);
    const ActuatorLag act;  // identified voice-coil values
    const FreqGrid grid = FreqGrid::analysis_default();

    const ModeInfo mode = dominant_oscillatory_mode(sys);
    const double theta = compute_theta(sys, mode.damped_frequency);

    const Eigen::RowVectorXd K = place_state_feedback(sys, ControllerParams{}.feedback_poles);
    const Eigen::VectorXd Q = place_observer(sys, ControllerParams{}.observer_poles);

    const TransferFn Lm = open_loop_measured(sys, K);
    const TransferFn Lo = open_loop_observer(sys, K, Q);
    const TransferFn FLm = with_actuator(act.unit_gain(), Lm);
    const TransferFn FLo = with_actuator(act.unit_gain(), Lo);

    const MarginReport sLm = sensitivity_peak(Lm, grid);
    const MarginReport sLo = sensitivity_peak(Lo, grid);
    const MarginReport sFLm = sensitivity_peak(FLm, grid);
    const MarginReport sFLo = sensitivity_peak(FLo, grid);

    const double kp = ControllerParams{}.kp, ki = ControllerParams{}.ki;
    const TransferFn Lpi = [&, sys](double w) {
        return eval_pi(kp, ki, w) * eval_actuator(act, w) * eval_tf(sys, w);
    };
    const MarginReport pi_margins = margins(Lpi, grid);

    std::ostringstream rep;
    rep << "plant mode:\n";
    rep << "  omega0 = " << format_full(mode.natural_frequency) << " rad/s\n";
    rep << "  delta  = " << format_full(mode.damping_ratio) << "\n";
    rep << "  omega  = " << format_full(mode.damped_frequency) << " rad/s\n";
    rep << "delay compensator:\n";
    rep << "  theta  = " << format_full(theta) << " s\n";
    rep << "maximum sensitivity (state-feedback loops, unit-gain actuator lag):\n";
    rep << "  S_max(Lm)   = " << format_full(sLm.s_max_db) << " dB at "
        << format_full(sLm.s_max_freq) << " rad/s\n";
    rep << "  S_max(F*Lm) = " << format_full(sFLm.s_max_db) << " dB at "
        << format_full(sFLm.s_max_freq) << " rad/s\n";
    rep << "  S_max(Lo)   = " << format_full(sLo.s_max_db) << " dB at "
        << format_full(sLo.s_max_freq) << " rad/s\n";
    rep << "  S_max(F*Lo) = " << format_full(sFLo.s_max_db) << " dB at "
        << format_full(sFLo.s_max_freq) << " rad/s\n";
    rep << "PI loop (Kp=" << kp << ", Ki=" << ki << "), full actuator:\n";
    rep << "  gain margin  = " << format_full(pi_margins.gain_margin_db) << " dB at "
        << format_full(pi_margins.phase_crossover) << " rad/s\n";
    rep << "  phase margin = " << format_full(pi_margins.phase_margin_deg) << " deg at "
        << format_full(pi_margins.gain_crossover) << " rad/s\n";
    rep << "  closed-loop unstable hint: "
        << (pi_margins.closed_loop_unstable_hint() ? "yes" : "no") << "\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        if (full) {
            write_csv_file((fs::path(out_dir) / "bode_G.csv").string(),
                           sample([&, sys](double w) { return eval_tf(sys, w); }, grid));
            auto sens = [](const TransferFn& L) {
                return [L](double w) { return 1.0 / (1.0 + L(w)); };
            };
            write_csv_file((fs::path(out_dir) / "sensitivity_Lm.csv").string(),
                           sample(sens(Lm), grid));
            write_csv_file((fs::path(out_dir) / "sensitivity_Lo.csv").string(),
                           sample(sens(Lo), grid));
            write_csv_file((fs::path(out_dir) / "sensitivity_FLm.csv").string(),
                           sample(sens(FLm), grid));
            write_csv_file((fs::path(out_dir) / "sensitivity_FLo.csv").string(),
                           sample(sens(FLo), grid));
            write_csv_file((fs::path(out_dir) / "reshape_R.csv").string(),
                           sample([&, sys](double w) { return reshape_ratio(sys, 100.0, theta, w); },
                                  grid));
        }
        std::ofstream f(fs::path(out_dir) / "margins.txt");
        f << rep.str();
    }
    std::cout << rep.str();
    return 0;
}

int cmd_reshape(const std::string& plant_file, const std::string& out_dir, double alpha) {
    const StateSpace sys = plant_from_option(plant_file, nullptr);
    const ModeInfo mode = dominant_oscillatory_mode(sys);
    const double theta = compute_theta(sys, mode.damped_frequency);
    const FreqGrid grid = FreqGrid::analysis_default();

    const double w = mode.damped_frequency;
    const double peak_db =
        20.0 * std::log10(std::abs(reshape_ratio(sys, alpha, theta, w)));
    double low_sum = 0.0;
    const int nlow = 100;
    for (int i = 0; i < nlow; ++i) {
        const double wl = 0.5 + (3.0 - 0.5) * i / (nlow - 1);
        low_sum += -20.0 * std::log10(std::abs(reshape_ratio(sys, alpha, theta, wl)));
    }
    std::cout << "alpha = " << alpha << ", theta = " << format_full(theta) << " s\n";
    std::cout << "resonance attenuation |R(i omega)| = " << format_full(peak_db) << " dB\n";
    std::cout << "low band mean |G_cl/G| over [0.5,3] rad/s = " << format_full(low_sum / nlow)
              << " dB\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_csv_file(
            (fs::path(out_dir) / "reshape_R.csv").string(),
            sample([&, sys](double w2) { return reshape_ratio(sys, alpha, theta, w2); }, grid));
    }
    return 0;
}

int cmd_list() {
    for (const auto& [name, sc] : scenario_registry()) {
        std::cout << name << "\n    " << sc.description << "\n    jobs:";
        for (const auto& [jname, cfg] : sc.jobs) std::cout << " " << jname;
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-collocated oscillatory system simulator and analysis tool"};
    app.require_subcommand(1);

    std::string target, out_dir, plant_file;
    std::vector<std::string> overrides;
    long seed = -1;
    double alpha = 100.0;

    auto* run = app.add_subcommand("run", "run a named scenario or a config file");
    run->add_option("target", target, "scenario name or config path")->required();
    run->add_option("--override", overrides, "key=value configuration override");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "noise seed for all jobs");

    auto* analyze = app.add_subcommand("analyze", "frequency-domain report and CSV export");
    analyze->add_option("--plant", plant_file, "key=value plant description file");
    analyze->add_option("--out", out_dir, "output directory");

    auto* marg = app.add_subcommand("margins", "margins and sensitivity summary only");
    marg->add_option("--plant", plant_file, "key=value plant description file");
    marg->add_option("--out", out_dir, "output directory");

    auto* resh = app.add_subcommand("reshape", "delay-compensator reshaping report");
    resh->add_option("--plant", plant_file, "key=value plant description file");
    resh->add_option("--out", out_dir, "output directory");
    resh->add_option("--alpha", alpha, "compensator gain");

    auto* list = app.add_subcommand("list", "print the scenario registry");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(target, overrides, out_dir.empty() ? "." : out_dir, seed);
        if (analyze->parsed()) return cmd_analyze(plant_file, out_dir.empty() ? "." : out_dir, true);
        if (marg->parsed()) return cmd_analyze(plant_file, out_dir, false);
        if (resh->parsed()) return cmd_reshape(plant_file, out_dir, alpha);
        if (list->parsed()) return cmd_list();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
