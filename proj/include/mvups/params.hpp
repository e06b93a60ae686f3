#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvups {

enum class ControllerKind { proposed, gfl_mc, gfl_pll };

struct Scenario {
    ControllerKind controller = ControllerKind::proposed;
    bool pulsed_load = false;

    // [scenario]
    double duration = 1.0;
    double dt = 1e-4;
    double dip_start = 0.50;
    double dip_end = 0.65;
    double v_dip = 0.5;
    double load_base = 1.0;
    double load_step_time = 0.1;
    double pulse_amp = 0.25;
    double pulse_freq = 1.0;
    double pulse_start = 0.0;
    double pulse_end = 1e9;
    double v_dc_0 = 1.0;
    double freq_event_time = 0.0;
    double freq_event_dev = 0.0;
    double record_every = 1;
    double init_steady = 0;

    // [grid]
    double scr = 1.5;
    double xr = 5.0;
    double v_pcc_rated = 1.0;

    // [filter]
    double x_f = 0.15;
    double r_f = 0.005;

    // [dc]
    double t_dc = 0.5;
    double v_dc_ref = 1.0;
    double e_max = 1.6;
    double v_dc_min = 0.7;

    // [bess]
    double tau_bess = 0.02;
    double r_bess = 5.0;
    double p_dis_max = 1.0;
    double p_chg_max = 0.3;
    double t_autonomy = 300.0;
    double soc_min = 0.2;
    double soc_max = 1.0;
    double soc_0 = 0.9;

    // [controller]
    double i_max = 1.0;
    double k_p = 0.3;
    double k_i = 20.0;
    double xi_lim = 0.0;
    double v_thresh = 0.85;
    double v_rec = 0.90;
    double t_det = 0.002;
    double v_ref = 1.0;
    double k_v = 2.5;
    double p_draw_min_fault = 0.2;
    double tau_grid = 0.0135;
    double r_limit = 0.2;
    double r_down = 10.0;
    double k_p_dc = 2.0;
    double k_i_dc = 10.0;
    double soc_bias = 0.02;
    double mode1_enable = 0;
    double mode3_enable = 0;
    double k_f = 20.0;
    double p_ffr_max_sys = 0.02;
    double mc_threshold = 0.70;
    double k_p_pll = 20.0;
    double k_i_pll = 200.0;
    double lvrt_threshold = 0.85;
    double k_v_pll = 2.5;

    // [system]
    double h = 5.0;
    double d = 1.0;
    double s_sys_mw = 30000.0;
    double n_blocks = 20;
    double p_nom_mw = 50.0;
    double f0 = 60.0;
    double ffr_disturbance = 0.0167;

    double xi_limit() const { return xi_lim > 0.0 ? xi_lim : e_max / k_i; }
};

struct ParamSpec {
    std::string key;
    std::string section;
    double Scenario::*member;
    double lo;
    double hi;
    bool lo_open;
    std::string doc;
};

const std::vector<ParamSpec>& parameter_registry();

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string normalize_key(const std::string& key);
std::string controller_name(ControllerKind k);
ControllerKind parse_controller(const std::string& name);

// Assigns one key; numeric values are parsed and range-checked.
void set_parameter(Scenario& sc, const std::string& key, const std::string& value);
double get_parameter(const Scenario& sc, const std::string& key);

Scenario apply_overrides(const Scenario& sc, const std::map<std::string, std::string>& overrides);
Scenario apply_overrides(const Scenario& sc, const std::map<std::string, double>& overrides);

void validate(const Scenario& sc);

std::string valid_keys_list();

}  // namespace mvups
