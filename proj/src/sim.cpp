#include "mvups/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace mvups {

Phasor nominal_source(const Scenario& sc, const TheveninGrid& g) {
    return thevenin_source_for(g, Phasor{sc.v_pcc_rated, 0.0}, 1.0);
}

bool in_dip(const Scenario& sc, double t) {
    return t >= sc.dip_start && t < sc.dip_end;
}

LoadProfile load_profile(const Scenario& sc) {
    LoadProfile lp;
    lp.kind = sc.pulsed_load ? LoadKind::pulsed : LoadKind::step;
    lp.base = sc.load_base;
    lp.step_time = sc.load_step_time;
    lp.amplitude = sc.pulse_amp;
    lp.freq = sc.pulse_freq;
    lp.window_start = sc.pulse_start;
    lp.window_end = sc.pulse_end;
    return lp;
}

double exogenous_freq_dev(const Scenario& sc, double t) {
    return t >= sc.freq_event_time ? sc.freq_event_dev : 0.0;
}

AveragedSimulation::AveragedSimulation(const Scenario& sc)
    : sc_(sc),
      grid_(thevenin_from_scr(sc.scr, sc.xr)),
      load_(load_profile(sc)),
      ctl_(make_controller(sc)),
      uses_bess_(sc.controller == ControllerKind::proposed) {
    vth_nominal_ = nominal_source(sc, grid_);
    grid_.vth = vth_nominal_;
    filter_.r = sc.r_f;
    filter_.x = sc.x_f;
    dc_.v = sc.v_dc_0;
    dc_.t_dc = sc.t_dc;
    dc_.v_min = sc.v_dc_min;
    bess_.path.tau = sc.tau_bess;
    bess_.path.rate = sc.r_bess;
    bess_.soc = sc.soc_0;
    bess_.soc_min = sc.soc_min;
    bess_.soc_max = sc.soc_max;
    bess_.p_dis_max = sc.p_dis_max;
    bess_.p_chg_max = sc.p_chg_max;
    bess_.t_autonomy = sc.t_autonomy;
    if (sc.init_steady != 0.0) {
        load_.step_time = 0.0;
        double p0 = load_at(load_, 0.0);
        filter_.i = unity_pf_draw_current(grid_, p0);
        Observation obs;
        obs.i = filter_.i;
        obs.v_pcc = grid_.pcc_voltage(filter_.i);
        obs.v_dc = dc_.v;
        obs.p_load = p0;
        obs.soc = bess_.soc;
        controller_prime(ctl_, obs);
    }
}

TraceRecord AveragedSimulation::step(double freq_dev) {
    double dt = sc_.dt;
    double t = t_;
    grid_.vth = in_dip(sc_, t) ? vth_nominal_ * (sc_.v_dip / std::abs(vth_nominal_)) : vth_nominal_;

    Observation obs;
    obs.t = t;
    obs.i = filter_.i;
    obs.v_pcc = grid_.pcc_voltage(filter_.i);
    obs.v_dc = dc_.v;
    obs.p_load = load_at(load_, t);
    obs.soc = bess_.soc;
    obs.freq_dev = freq_dev;

    Command cmd = controller_step(ctl_, obs, dt);

    double p_grid = 1.5 * (obs.v_pcc * std::conj(obs.i)).real();
    double p_bess = bess_.power();

    TraceRecord rec{};
    rec.t = t;
    rec.p_draw = -p_grid;
    rec.p_grid = p_grid;
    rec.p_load = obs.p_load;
    rec.p_bess = p_bess;
    rec.soc = bess_.soc;
    rec.v_mag = std::abs(obs.v_pcc);
    rec.v_d = obs.v_pcc.real();
    rec.v_q = obs.v_pcc.imag();
    rec.i_d = obs.i.real();
    rec.i_q = obs.i.imag();
    rec.i_mag = std::abs(obs.i);
    rec.v_dc = dc_.v;
    rec.p_draw_ref = cmd.p_draw_ref;
    rec.i_ref_d = cmd.i_ref.real();
    rec.i_ref_q = cmd.i_ref.imag();
    rec.p_vdc = cmd.p_vdc;
    rec.p_supp = cmd.p_supp;
    rec.mode = cmd.mode;
    rec.in_fault = cmd.in_fault;
    rec.flags = (cmd.cessation ? kFlagCessation : 0u) | (cmd.voltage_floor ? kFlagVoltageFloor : 0u) |
                (cmd.infeasible ? kFlagInfeasible : 0u) | (cmd.pll_diverged ? kFlagPllDiverged : 0u) |
                (dc_.at_floor || dc_.v <= 0.0 ? kFlagBusCollapse : 0u);

    if (cmd.block) {
        filter_.i = {0.0, 0.0};
    } else {
        filter_.step(cmd.v_inv, obs.v_pcc, dt);
    }
    dc_.step(-p_grid + p_bess, obs.p_load, dt);
    if (uses_bess_) bess_.step(cmd.p_bess_cmd, dt);

    ++k_;
    t_ = k_ * dt;

    double im = std::abs(filter_.i);
    if (!std::isfinite(im) || im > kDivergenceCurrent) throw DivergenceError("simulation diverged: |i| exceeded limit");
    return rec;
}

void AveragedSimulation::run(Trace& out) {
    out.dt = sc_.dt;
    long n = std::lround(sc_.duration / sc_.dt);
    long every = std::max(1L, std::lround(sc_.record_every));
    out.rows.reserve(static_cast<std::size_t>(n / every + 1));
    try {
        while (k_ < n) {
            long k = k_;
            TraceRecord rec = step(exogenous_freq_dev(sc_, t_));
            if (k % every == 0) out.rows.push_back(rec);
        }
    } catch (const DivergenceError& e) {
        out.diverged = true;
        out.error = e.what();
    }
}

Trace run_scenario(const Scenario& sc) {
    validate(sc);
    AveragedSimulation sim(sc);
    Trace tr;
    sim.run(tr);
    return tr;
}

const std::vector<std::string>& trace_columns() {
    static const std::vector<std::string> cols = {
        "t",        "p_draw",     "p_grid", "p_load",  "p_bess", "soc",    "v_mag",    "v_d",   "v_q",
        "i_d",      "i_q",        "i_mag",  "v_dc",    "p_draw_ref", "i_ref_d", "i_ref_q", "p_vdc", "p_supp",
        "mode",     "in_fault",   "flags"};
    return cols;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_trace_csv(std::ostream& os, const Trace& tr) {
    const auto& cols = trace_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << '\n';
    for (const auto& r : tr.rows) {
        const double vals[] = {r.t,     r.p_draw, r.p_grid, r.p_load, r.p_bess,     r.soc,     r.v_mag,
                               r.v_d,   r.v_q,    r.i_d,    r.i_q,    r.i_mag,      r.v_dc,    r.p_draw_ref,
                               r.i_ref_d, r.i_ref_q, r.p_vdc, r.p_supp};
        for (std::size_t c = 0; c < std::size(vals); ++c) os << (c ? "," : "") << format_number(vals[c]);
        os << ',' << r.mode << ',' << (r.in_fault ? 1 : 0) << ',' << r.flags << '\n';
    }
}

}  // namespace mvups
