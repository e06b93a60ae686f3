#include "mvups/params.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace mvups {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ParamSpec> build_registry() {
    using S = Scenario;
    return {
        {"duration", "scenario", &S::duration, 0.0, 1e4, true, "simulated time (s)"},
        {"dt", "scenario", &S::dt, 0.0, 1e-2, true, "integration step (s)"},
        {"dip_start", "scenario", &S::dip_start, 0.0, kInf, false, "dip window start (s)"},
        {"dip_end", "scenario", &S::dip_end, 0.0, kInf, false, "dip window end (s)"},
        {"v_dip", "scenario", &S::v_dip, 0.0, 1.0, true, "retained Thevenin source magnitude during the dip (p.u.)"},
        {"load_base", "scenario", &S::load_base, 0.0, 5.0, false, "IT load level after the step (p.u.)"},
        {"load_step_time", "scenario", &S::load_step_time, 0.0, kInf, false, "IT load step time (s)"},
        {"pulse_amp", "scenario", &S::pulse_amp, 0.0, 5.0, false, "pulsed load amplitude (p.u.)"},
        {"pulse_freq", "scenario", &S::pulse_freq, 0.0, 1e3, true, "pulsed load frequency (Hz)"},
        {"pulse_start", "scenario", &S::pulse_start, 0.0, kInf, false, "pulse window start (s)"},
        {"pulse_end", "scenario", &S::pulse_end, 0.0, kInf, false, "pulse window end (s)"},
        {"v_dc_0", "scenario", &S::v_dc_0, 0.0, 2.0, true, "initial DC-link proxy voltage (p.u.)"},
        {"freq_event_time", "scenario", &S::freq_event_time, 0.0, kInf, false, "exogenous frequency step time (s)"},
        {"freq_event_dev", "scenario", &S::freq_event_dev, -0.1, 0.1, false, "exogenous frequency deviation after the step (p.u.)"},
        {"record_every", "scenario", &S::record_every, 1.0, 1e6, false, "trace decimation (steps per sample)"},
        {"init_steady", "scenario", &S::init_steady, 0.0, 1.0, false, "start loaded at the unity-pf operating point (1) or from rest (0)"},
        {"scr", "grid", &S::scr, 0.0, 100.0, true, "short-circuit ratio"},
        {"xr", "grid", &S::xr, 0.0, 1e3, true, "grid X/R ratio"},
        {"v_pcc_rated", "grid", &S::v_pcc_rated, 0.5, 1.5, false, "PCC voltage at rated unity-pf draw; sets the source magnitude (p.u.)"},
        {"x_f", "filter", &S::x_f, 0.0, 1.0, true, "filter reactance (p.u.)"},
        {"r_f", "filter", &S::r_f, 0.0, 1.0, false, "filter resistance (p.u.)"},
        {"t_dc", "dc", &S::t_dc, 0.0, 100.0, true, "DC-link energy time constant (s)"},
        {"v_dc_ref", "dc", &S::v_dc_ref, 0.0, 2.0, true, "DC-link reference (p.u.)"},
        {"e_max", "dc", &S::e_max, 0.0, 5.0, true, "modulation ceiling, |v_inv| <= e_max * v_dc"},
        {"v_dc_min", "dc", &S::v_dc_min, 0.0, 1.0, false, "DC-link floor where IT load is curtailed (p.u.); 0 disables"},
        {"tau_bess", "bess", &S::tau_bess, 0.0, 10.0, true, "BESS lag time constant (s)"},
        {"r_bess", "bess", &S::r_bess, 0.0, 1e6, true, "BESS ramp limit (p.u./s)"},
        {"p_dis_max", "bess", &S::p_dis_max, 0.0, 5.0, false, "BESS discharge limit (p.u.)"},
        {"p_chg_max", "bess", &S::p_chg_max, 0.0, 5.0, false, "BESS charge limit (p.u.)"},
        {"t_autonomy", "bess", &S::t_autonomy, 0.0, 1e6, true, "BESS autonomy at 1 p.u. (s)"},
        {"soc_min", "bess", &S::soc_min, 0.0, 1.0, false, "SoC lower bound"},
        {"soc_max", "bess", &S::soc_max, 0.0, 1.0, false, "SoC upper bound"},
        {"soc_0", "bess", &S::soc_0, 0.0, 1.0, false, "initial SoC"},
        {"i_max", "controller", &S::i_max, 0.0, 5.0, true, "vector current limit (p.u.)"},
        {"k_p", "controller", &S::k_p, 0.0, 100.0, false, "current-loop proportional gain"},
        {"k_i", "controller", &S::k_i, 0.0, 1e5, true, "current-loop integral gain"},
        {"xi_lim", "controller", &S::xi_lim, 0.0, 100.0, false, "current-loop integrator clamp; 0 selects e_max/k_i"},
        {"v_thresh", "controller", &S::v_thresh, 0.0, 1.5, true, "fault entry threshold (p.u.)"},
        {"v_rec", "controller", &S::v_rec, 0.0, 1.5, true, "fault exit threshold (p.u.)"},
        {"t_det", "controller", &S::t_det, 0.0, 1.0, false, "detection delay (s)"},
        {"v_ref", "controller", &S::v_ref, 0.0, 1.5, true, "reactive-support voltage reference (p.u.)"},
        {"k_v", "controller", &S::k_v, 0.0, 100.0, false, "reactive-support gain (p.u./p.u.)"},
        {"p_draw_min_fault", "controller", &S::p_draw_min_fault, 0.0, 1.0, false, "minimum grid draw while in fault (p.u.)"},
        {"tau_grid", "controller", &S::tau_grid, 0.0, 10.0, true, "draw shaping time constant (s)"},
        {"r_limit", "controller", &S::r_limit, 0.0, 1e9, true, "draw shaping upward rate limit (p.u./s)"},
        {"r_down", "controller", &S::r_down, 0.0, 1e9, true, "draw shaping downward rate limit (p.u./s)"},
        {"k_p_dc", "controller", &S::k_p_dc, 0.0, 100.0, false, "stiff-bus proportional gain"},
        {"k_i_dc", "controller", &S::k_i_dc, 0.0, 1e4, false, "stiff-bus integral gain"},
        {"soc_bias", "controller", &S::soc_bias, 0.0, 1.0, false, "extra draw while SoC is below its initial value (p.u.)"},
        {"mode1_enable", "controller", &S::mode1_enable, 0.0, 1.0, false, "stiff-bus regulation on (1) or off (0)"},
        {"mode3_enable", "controller", &S::mode3_enable, 0.0, 1.0, false, "frequency support on (1) or off (0)"},
        {"k_f", "controller", &S::k_f, 0.0, 1e4, false, "frequency droop gain (p.u./p.u.)"},
        {"p_ffr_max_sys", "controller", &S::p_ffr_max_sys, 0.0, 1.0, false, "frequency support cap on the system base (p.u.)"},
        {"mc_threshold", "controller", &S::mc_threshold, 0.0, 1.5, false, "momentary cessation threshold (p.u.)"},
        {"k_p_pll", "controller", &S::k_p_pll, 0.0, 1e4, false, "PLL proportional gain (rad/s per p.u.)"},
        {"k_i_pll", "controller", &S::k_i_pll, 0.0, 1e6, false, "PLL integral gain (rad/s^2 per p.u.)"},
        {"lvrt_threshold", "controller", &S::lvrt_threshold, 0.0, 1.5, false, "PLL benchmark LVRT threshold (p.u.)"},
        {"k_v_pll", "controller", &S::k_v_pll, 0.0, 100.0, false, "PLL benchmark LVRT reactive gain"},
        {"h", "system", &S::h, 0.0, 100.0, true, "system inertia constant (s)"},
        {"d", "system", &S::d, 0.0, 100.0, false, "system damping (p.u. on system base)"},
        {"s_sys_mw", "system", &S::s_sys_mw, 0.0, 1e7, true, "system base (MW)"},
        {"n_blocks", "system", &S::n_blocks, 0.0, 1e4, false, "number of aggregated facility blocks"},
        {"p_nom_mw", "system", &S::p_nom_mw, 0.0, 1e5, true, "facility block rating (MW)"},
        {"f0", "system", &S::f0, 0.0, 1e3, true, "nominal frequency (Hz)"},
        {"ffr_disturbance", "system", &S::ffr_disturbance, -1.0, 1.0, false, "generation loss for the frequency event (p.u. system base)"},
    };
}

const ParamSpec* find_spec(const std::string& key) {
    for (const auto& p : parameter_registry())
        if (p.key == key) return &p;
    return nullptr;
}

double parse_number(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("invalid number for '" + key + "': '" + text + "'");
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) throw ConfigError("invalid number for '" + key + "': '" + text + "'");
    return v;
}

}  // namespace

const std::vector<ParamSpec>& parameter_registry() {
    static const std::vector<ParamSpec> reg = build_registry();
    return reg;
}

std::string normalize_key(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        out += c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string controller_name(ControllerKind k) {
    switch (k) {
        case ControllerKind::proposed: return "proposed";
        case ControllerKind::gfl_mc: return "gfl-mc";
        case ControllerKind::gfl_pll: return "gfl-pll";
    }
    return "proposed";
}

ControllerKind parse_controller(const std::string& name) {
    std::string n = normalize_key(name);
    if (n == "proposed") return ControllerKind::proposed;
    if (n == "gfl_mc") return ControllerKind::gfl_mc;
    if (n == "gfl_pll") return ControllerKind::gfl_pll;
    throw ConfigError("unknown controller '" + name + "' (expected proposed, gfl-mc, gfl-pll)");
}

std::string valid_keys_list() {
    std::ostringstream os;
    os << "controller, load_kind";
    for (const auto& p : parameter_registry()) os << ", " << p.key;
    return os.str();
}

void set_parameter(Scenario& sc, const std::string& key_in, const std::string& value) {
    std::string key = normalize_key(key_in);
    if (key == "controller") {
        sc.controller = parse_controller(value);
        return;
    }
    if (key == "load_kind") {
        std::string v = normalize_key(value);
        if (v == "step") sc.pulsed_load = false;
        else if (v == "pulsed") sc.pulsed_load = true;
        else throw ConfigError("invalid load_kind '" + value + "' (expected step or pulsed)");
        return;
    }
    const ParamSpec* spec = find_spec(key);
    if (!spec) throw ConfigError("unknown parameter '" + key_in + "'; valid keys: " + valid_keys_list());
    double v = parse_number(key_in, value);
    bool below = spec->lo_open ? !(v > spec->lo) : !(v >= spec->lo);
    if (!std::isfinite(v) || below || v > spec->hi) {
        std::ostringstream os;
        os << "value " << value << " for '" << spec->key << "' out of range " << (spec->lo_open ? "(" : "[") << spec->lo
           << ", " << spec->hi << "]";
        throw ConfigError(os.str());
    }
    sc.*(spec->member) = v;
}

double get_parameter(const Scenario& sc, const std::string& key) {
    const ParamSpec* spec = find_spec(normalize_key(key));
    if (!spec) throw ConfigError("unknown parameter '" + key + "'; valid keys: " + valid_keys_list());
    return sc.*(spec->member);
}

Scenario apply_overrides(const Scenario& sc, const std::map<std::string, std::string>& overrides) {
    Scenario out = sc;
    for (const auto& [k, v] : overrides) set_parameter(out, k, v);
    validate(out);
    return out;
}

Scenario apply_overrides(const Scenario& sc, const std::map<std::string, double>& overrides) {
    std::map<std::string, std::string> text;
    for (const auto& [k, v] : overrides) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        text[k] = os.str();
    }
    return apply_overrides(sc, text);
}

void validate(const Scenario& sc) {
    if (sc.dip_start > sc.dip_end) throw ConfigError("dip_start must not exceed dip_end");
    if (sc.dip_end > sc.duration) throw ConfigError("dip_end must not exceed duration");
    if (!(sc.soc_min <= sc.soc_0 && sc.soc_0 <= sc.soc_max)) throw ConfigError("require soc_min <= soc_0 <= soc_max");
    if (sc.v_rec < sc.v_thresh) throw ConfigError("v_rec must be at least v_thresh");
    if (sc.pulse_start > sc.pulse_end) throw ConfigError("pulse_start must not exceed pulse_end");
    if (sc.v_dc_min >= sc.v_dc_ref) throw ConfigError("v_dc_min must be below v_dc_ref");
    for (double flag : {sc.mode1_enable, sc.mode3_enable, sc.init_steady})
        if (flag != 0.0 && flag != 1.0) throw ConfigError("mode1_enable, mode3_enable and init_steady must be 0 or 1");
    if (sc.record_every != std::floor(sc.record_every)) throw ConfigError("record_every must be an integer");
    if (sc.n_blocks != std::floor(sc.n_blocks)) throw ConfigError("n_blocks must be an integer");
}

}  // namespace mvups
