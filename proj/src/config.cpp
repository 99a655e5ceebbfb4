#include "ncs/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ncs/csv.hpp"

namespace ncs {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_num(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': not a number: '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string last = trim(cur);
    if (!last.empty() || !out.empty()) out.push_back(last);
    return out;
}

//! "re", "re+imi" or "re-imi".
std::complex<double> parse_complex(const std::string& v, const std::string& key) {
    const auto ipos = v.find_last_of('i');
    if (ipos == std::string::npos) return {parse_num(v, key), 0.0};
    std::string body = v.substr(0, ipos);
    std::size_t cut = body.find_last_of("+-");
    if (cut == std::string::npos || cut == 0)
        throw ConfigError("key '" + key + "': bad complex value '" + v + "'");
    if (body[cut - 1] == 'e' || body[cut - 1] == 'E') {
        cut = body.find_last_of("+-", cut - 2);
        if (cut == std::string::npos || cut == 0)
            throw ConfigError("key '" + key + "': bad complex value '" + v + "'");
    }
    const double re = parse_num(body.substr(0, cut), key);
    const double im = parse_num(body.substr(cut), key);
    return {re, im};
}

std::string format_complex(const std::complex<double>& c) {
    if (c.imag() == 0) return format_full(c.real());
    return format_full(c.real()) + (c.imag() >= 0 ? "+" : "") + format_full(c.imag()) + "i";
}

PoleSet parse_poles(const std::string& v, const std::string& key) {
    PoleSet out;
    for (const auto& item : split(v, ','))
        if (!item.empty()) out.push_back(parse_complex(item, key));
    return out;
}

std::string format_poles(const PoleSet& p) {
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ",";
        out += format_complex(p[i]);
    }
    return out;
}

EventKind parse_event_kind(const std::string& s) {
    if (s == "reference_step") return EventKind::reference_step;
    if (s == "load_impulse") return EventKind::load_impulse;
    if (s == "input_cutoff") return EventKind::input_cutoff;
    if (s == "input_restore") return EventKind::input_restore;
    throw ConfigError("unknown event kind '" + s + "'");
}

std::string event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::reference_step: return "reference_step";
        case EventKind::load_impulse: return "load_impulse";
        case EventKind::input_cutoff: return "input_cutoff";
        case EventKind::input_restore: return "input_restore";
    }
    return "?";
}

//! "kind:time[:value]" entries, comma separated.
std::vector<Event> parse_events(const std::string& v) {
    std::vector<Event> out;
    for (const auto& item : split(v, ',')) {
        if (item.empty()) continue;
        const auto fields = split(item, ':');
        if (fields.size() < 2 || fields.size() > 3)
            throw ConfigError("events: expected kind:time[:value], got '" + item + "'");
        Event ev;
        ev.kind = parse_event_kind(fields[0]);
        ev.time = parse_num(fields[1], "events");
        ev.value = fields.size() == 3 ? parse_num(fields[2], "events") : 0.0;
        if (ev.time < 0) throw ConfigError("events: negative time in '" + item + "'");
        out.push_back(ev);
    }
    return out;
}

std::string format_events(const std::vector<Event>& evs) {
    std::string out;
    for (std::size_t i = 0; i < evs.size(); ++i) {
        if (i) out += ",";
        out += event_kind_name(evs[i].kind) + ":" + format_full(evs[i].time) + ":" +
               format_full(evs[i].value);
    }
    return out;
}

struct KeyHandler {
    std::function<void(ScenarioConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

const std::map<std::string, KeyHandler>& key_table() {
    static const std::map<std::string, KeyHandler> table = [] {
        std::map<std::string, KeyHandler> t;
        auto num = [&t](const std::string& key, auto member) {
            t[key] = {[member, key](ScenarioConfig& c, const std::string&, const std::string& v) {
                          c.*member = parse_num(v, key);
                      },
                      [member](const ScenarioConfig& c) { return format_full(c.*member); }};
        };
        auto sub = [&t](const std::string& key, auto outer, auto member) {
            t[key] = {[outer, member, key](ScenarioConfig& c, const std::string&,
                                           const std::string& v) {
                          (c.*outer).*member = parse_num(v, key);
                      },
                      [outer, member](const ScenarioConfig& c) {
                          return format_full((c.*outer).*member);
                      }};
        };

        t["plant.source"] = {
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                if (v == "reference") c.use_reference_plant = true;
                else if (v == "physical") c.use_reference_plant = false;
                else throw ConfigError("key '" + k + "': expected reference|physical");
            },
            [](const ScenarioConfig& c) {
                return std::string(c.use_reference_plant ? "reference" : "physical");
            }};
        sub("plant.m", &ScenarioConfig::params, &PhysicalParams::active_mass);
        sub("plant.M", &ScenarioConfig::params, &PhysicalParams::passive_mass);
        sub("plant.k", &ScenarioConfig::params, &PhysicalParams::stiffness);
        sub("plant.zeta", &ScenarioConfig::params, &PhysicalParams::link_damping);
        sub("plant.sigma", &ScenarioConfig::params, &PhysicalParams::actuator_damping);
        sub("plant.phi", &ScenarioConfig::params, &PhysicalParams::active_load);
        sub("plant.Phi", &ScenarioConfig::params, &PhysicalParams::passive_load);
        t["plant.coupling"] = {
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                if (v == "symmetric") c.coupling = DampingCoupling::symmetric;
                else if (v == "asymmetric") c.coupling = DampingCoupling::asymmetric;
                else throw ConfigError("key '" + k + "': expected symmetric|asymmetric");
            },
            [](const ScenarioConfig& c) {
                return std::string(c.coupling == DampingCoupling::symmetric ? "symmetric"
                                                                            : "asymmetric");
            }};
        sub("actuator.kappa", &ScenarioConfig::actuator, &ActuatorLag::kappa);
        sub("actuator.tau", &ScenarioConfig::actuator, &ActuatorLag::tau);
        sub("limits.z_min", &ScenarioConfig::limits, &Limits::z_min);
        sub("limits.z_max", &ScenarioConfig::limits, &Limits::z_max);
        sub("limits.u_min", &ScenarioConfig::limits, &Limits::u_min);
        sub("limits.u_max", &ScenarioConfig::limits, &Limits::u_max);
        t["wall.penalty"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                                 c.wall.penalty = parse_bool(v, k);
                             },
                             [](const ScenarioConfig& c) {
                                 return std::string(c.wall.penalty ? "true" : "false");
                             }};
        sub("wall.k", &ScenarioConfig::wall, &WallModel::k_wall);
        sub("wall.c", &ScenarioConfig::wall, &WallModel::c_wall);

        t["controller.kind"] = {
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                if (v == "none") c.controller = ControllerKind::none;
                else if (v == "pi") c.controller = ControllerKind::pi_only;
                else if (v == "pi_delay") c.controller = ControllerKind::pi_plus_delay_fixed;
                else if (v == "pi_delay_adaptive")
                    c.controller = ControllerKind::pi_plus_delay_adaptive;
                else if (v == "observer_sf")
                    c.controller = ControllerKind::observer_state_feedback;
                else if (v == "measured_sf")
                    c.controller = ControllerKind::measured_state_feedback;
                else
                    throw ConfigError("key '" + k +
                                      "': expected none|pi|pi_delay|pi_delay_adaptive|"
                                      "observer_sf|measured_sf");
            },
            [](const ScenarioConfig& c) -> std::string {
                switch (c.controller) {
                    case ControllerKind::none: return "none";
                    case ControllerKind::pi_only: return "pi";
                    case ControllerKind::pi_plus_delay_fixed: return "pi_delay";
                    case ControllerKind::pi_plus_delay_adaptive: return "pi_delay_adaptive";
                    case ControllerKind::observer_state_feedback: return "observer_sf";
                    case ControllerKind::measured_state_feedback: return "measured_sf";
                }
                return "none";
            }};
        sub("controller.kp", &ScenarioConfig::ctrl, &ControllerParams::kp);
        sub("controller.ki", &ScenarioConfig::ctrl, &ControllerParams::ki);
        sub("controller.alpha", &ScenarioConfig::ctrl, &ControllerParams::alpha);
        sub("controller.theta", &ScenarioConfig::ctrl, &ControllerParams::theta);
        sub("controller.gravity_volts", &ScenarioConfig::ctrl, &ControllerParams::gravity_volts);
        t["controller.feedback_poles"] = {
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                c.ctrl.feedback_poles = parse_poles(v, k);
            },
            [](const ScenarioConfig& c) { return format_poles(c.ctrl.feedback_poles); }};
        t["controller.observer_poles"] = {
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                c.ctrl.observer_poles = parse_poles(v, k);
            },
            [](const ScenarioConfig& c) { return format_poles(c.ctrl.observer_poles); }};
        t["controller.observer_input"] = {
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                if (v == "commanded") c.ctrl.observer_input = ObserverInput::commanded_force;
                else if (v == "plant") c.ctrl.observer_input = ObserverInput::plant_force;
                else throw ConfigError("key '" + k + "': expected commanded|plant");
            },
            [](const ScenarioConfig& c) {
                return std::string(c.ctrl.observer_input == ObserverInput::commanded_force
                                       ? "commanded"
                                       : "plant");
            }};
        sub("estimator.gamma", &ScenarioConfig::ctrl, &ControllerParams::gamma);
        sub("estimator.omega0", &ScenarioConfig::ctrl, &ControllerParams::omega_hat0);
        sub("estimator.beta", &ScenarioConfig::ctrl, &ControllerParams::beta);
        sub("estimator.deadzone", &ScenarioConfig::ctrl, &ControllerParams::deadzone);
        sub("estimator.floor", &ScenarioConfig::ctrl, &ControllerParams::estimator_floor);
        sub("estimator.theta_smoothing", &ScenarioConfig::ctrl,
            &ControllerParams::theta_smoothing);
        sub("estimator.omega_min", &ScenarioConfig::ctrl, &ControllerParams::omega_min);
        t["estimator.theta_mode"] = {
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                if (v == "model") c.ctrl.theta_mode = ThetaMode::model;
                else if (v == "heuristic") c.ctrl.theta_mode = ThetaMode::heuristic;
                else throw ConfigError("key '" + k + "': expected model|heuristic");
            },
            [](const ScenarioConfig& c) {
                return std::string(c.ctrl.theta_mode == ThetaMode::model ? "model" : "heuristic");
            }};

        sub("noise.std", &ScenarioConfig::noise, &NoiseModel::std);
        t["noise.seed"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                               c.noise.seed = static_cast<std::uint64_t>(parse_num(v, k));
                           },
                           [](const ScenarioConfig& c) {
                               return std::to_string(c.noise.seed);
                           }};

        t["events"] = {[](ScenarioConfig& c, const std::string&, const std::string& v) {
                           c.events = parse_events(v);
                       },
                       [](const ScenarioConfig& c) { return format_events(c.events); }};

        num("sim.dt", &ScenarioConfig::dt);
        num("sim.t_end", &ScenarioConfig::t_end);
        t["sim.decimation"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                                   c.decimation = static_cast<int>(parse_num(v, k));
                               },
                               [](const ScenarioConfig& c) {
                                   return std::to_string(c.decimation);
                               }};

        t["init.kind"] = {
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                if (v == "open_loop") c.init.kind = InitKind::open_loop_equilibrium;
                else if (v == "closed_loop") c.init.kind = InitKind::closed_loop_equilibrium;
                else throw ConfigError("key '" + k + "': expected open_loop|closed_loop");
            },
            [](const ScenarioConfig& c) {
                return std::string(c.init.kind == InitKind::open_loop_equilibrium
                                       ? "open_loop"
                                       : "closed_loop");
            }};
        sub("init.z0", &ScenarioConfig::init, &InitialState::z0);
        sub("init.zdot0", &ScenarioConfig::init, &InitialState::zdot0);
        sub("init.ydot0", &ScenarioConfig::init, &InitialState::ydot0);
        num("run.u_hold", &ScenarioConfig::u_hold);
        return t;
    }();
    return table;
}

}  // namespace

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value: '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const auto& table = key_table();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
    it->second.set(cfg, key, value);
}

ScenarioConfig parse_config(const std::string& text, ScenarioConfig base,
                            const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        try {
            apply_override(base, line);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

ScenarioConfig load_config(const std::string& path, ScenarioConfig base) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(base), path);
}

std::string save_config(const ScenarioConfig& cfg) {
    std::string out;
    for (const auto& [key, handler] : key_table())
        out += key + " = " + handler.get(cfg) + "\n";
    return out;
}

}  // namespace ncs
