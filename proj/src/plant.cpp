#include "mvups/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvups {

TheveninGrid thevenin_from_scr(double scr, double xr) {
    if (!(scr > 0.0) || !(xr > 0.0)) throw std::invalid_argument("thevenin_from_scr: SCR and X/R must be positive");
    TheveninGrid g;
    g.scr = scr;
    g.xr = xr;
    double zmag = 1.0 / scr;
    double r = zmag / std::sqrt(1.0 + xr * xr);
    g.z = {r, xr * r};
    return g;
}

Phasor thevenin_source_for(const TheveninGrid& g, Phasor v_pcc, double p_draw) {
    // unity-pf draw: i is antiparallel to v_pcc with P = 1.5 |v| |i|
    double vm = std::abs(v_pcc);
    Phasor i = -(p_draw / (1.5 * vm)) * (v_pcc / vm);
    return v_pcc - g.z * i;
}

Phasor unity_pf_draw_current(const TheveninGrid& g, double p_draw) {
    Phasor i{0.0, 0.0};
    for (int k = 0; k < 200; ++k) {
        Phasor v = g.pcc_voltage(i);
        double vm = std::abs(v);
        if (vm < 1e-6) throw std::domain_error("unity_pf_draw_current: no operating point");
        Phasor next = -(p_draw / (1.5 * vm)) * (v / vm);
        if (std::abs(next - i) < 1e-14) return next;
        i = next;
    }
    return i;
}

void RlFilter::step(Phasor v_inv, Phasor v_pcc, double dt) {
    Phasor di = (kOmega0 / x) * (v_inv - v_pcc - r * i) - Phasor{0.0, kOmega0} * i;
    i += di * dt;
}

void DcLinkProxy::step(double p_in, double p_load, double dt) {
    double e = 0.5 * v * v + (p_in - p_load) / t_dc * dt;
    double e_min = 0.5 * v_min * v_min;
    at_floor = e <= e_min;
    if (at_floor) e = e_min;
    v = std::sqrt(std::max(0.0, 2.0 * e));
}

double BessModel::gate(double cmd) const {
    cmd = sat(cmd, -p_chg_max, p_dis_max);
    if (soc <= soc_min) cmd = std::min(cmd, 0.0);
    if (soc >= soc_max) cmd = std::max(cmd, 0.0);
    return cmd;
}

void BessModel::step(double cmd, double dt) {
    path.step(gate(cmd), dt);
    soc = sat(soc - path.state / t_autonomy * dt, soc_min, soc_max);
}

double load_at(const LoadProfile& lp, double t) {
    double level = t >= lp.step_time ? lp.base : 0.0;
    if (lp.kind == LoadKind::pulsed && t >= lp.window_start && t < lp.window_end) {
        double phase = std::fmod(lp.freq * (t - lp.window_start), 1.0);
        level += phase < 0.5 ? lp.amplitude : -lp.amplitude;
    }
    return std::max(0.0, level);
}

HoldupBudget holdup_budget(double p_load_w, double dt_hold_s, double v_dc0, double ratio_min) {
    if (!(ratio_min > 0.0 && ratio_min < 1.0) || !(v_dc0 > 0.0) || p_load_w < 0.0 || dt_hold_s < 0.0)
        throw std::invalid_argument("holdup_budget: invalid arguments");
    double energy = p_load_w * dt_hold_s;
    double cap = 2.0 * energy / (v_dc0 * v_dc0 * (1.0 - ratio_min * ratio_min));
    return {energy, cap};
}

double holdup_time(double v0, double v_min, double t_dc, double p_load) {
    return (v0 * v0 - v_min * v_min) * t_dc / (2.0 * p_load);
}

}  // namespace mvups
