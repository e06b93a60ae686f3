#pragma once

#include "mvups/control_blocks.hpp"

namespace mvups {

constexpr double kOmega0 = 2.0 * 3.14159265358979323846 * 60.0;

struct TheveninGrid {
    double scr = 1.5;
    double xr = 5.0;
    Phasor z{0.0, 0.0};
    Phasor vth{1.0, 0.0};

    Phasor pcc_voltage(Phasor i) const { return vth + z * i; }
};

TheveninGrid thevenin_from_scr(double scr, double xr);

// Source phasor that places the PCC at v_pcc under unity-pf draw p.
Phasor thevenin_source_for(const TheveninGrid& g, Phasor v_pcc, double p_draw);

// Unity-pf current drawing p from the grid, solved by fixed-point iteration.
Phasor unity_pf_draw_current(const TheveninGrid& g, double p_draw);

struct RlFilter {
    double r = 0.005;
    double x = 0.15;
    Phasor i{0.0, 0.0};

    void step(Phasor v_inv, Phasor v_pcc, double dt);
};

struct DcLinkProxy {
    double v = 1.0;
    double t_dc = 0.5;
    double v_min = 0.7;
    bool at_floor = false;

    void step(double p_in, double p_load, double dt);
};

struct BessModel {
    LagRampPath path;
    double soc = 0.9;
    double soc_min = 0.2;
    double soc_max = 1.0;
    double p_dis_max = 1.0;
    double p_chg_max = 0.3;
    double t_autonomy = 300.0;

    double gate(double cmd) const;
    void step(double cmd, double dt);
    double power() const { return path.state; }
};

enum class LoadKind { step, pulsed };

struct LoadProfile {
    LoadKind kind = LoadKind::step;
    double base = 1.0;
    double step_time = 0.1;
    double amplitude = 0.25;
    double freq = 1.0;
    double window_start = 0.0;
    double window_end = 1e9;
};

double load_at(const LoadProfile& lp, double t);

struct HoldupBudget {
    double energy_j;
    double capacitance_f;
};

HoldupBudget holdup_budget(double p_load_w, double dt_hold_s, double v_dc0, double ratio_min);

// Time for the DC proxy to fall from v0 to v_min with zero input power.
double holdup_time(double v0, double v_min, double t_dc, double p_load);

}  // namespace mvups
