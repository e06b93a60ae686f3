#include "mvups/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace mvups {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

CurrentLoop make_loop(const Scenario& sc) {
    CurrentLoop loop;
    loop.pi.kp = sc.k_p;
    loop.pi.ki = sc.k_i;
    loop.pi.xi_lim = sc.xi_limit();
    loop.x_f = sc.x_f;
    loop.limits = {sc.i_max, sc.e_max};
    return loop;
}

}  // namespace

Phasor CurrentLimits::limit_current(Phasor i) const {
    double m = std::abs(i);
    return m > i_max ? i * (i_max / m) : i;
}

Phasor CurrentLimits::limit_voltage(Phasor v, double v_dc) const {
    double cap = e_max * std::max(0.0, v_dc);
    double m = std::abs(v);
    if (m <= cap) return v;
    return m > 0.0 ? v * (cap / m) : v;
}

bool FaultDetector::update(double vmag, double dt) {
    if (in_fault) {
        if (vmag > v_rec) {
            in_fault = false;
            timer = 0.0;
        }
        return in_fault;
    }
    if (vmag < v_thresh) {
        timer += dt;
        // half-step slack absorbs float accumulation in the timer
        if (timer >= t_det - 0.5 * dt) in_fault = true;
    } else {
        timer = 0.0;
    }
    return in_fault;
}

AlignedBasis AlignedBasis::from_voltage(Phasor v_pcc, const AlignedBasis& last) {
    double m = std::abs(v_pcc);
    if (m < 1e-6) return last;
    return AlignedBasis(v_pcc / m);
}

Mode2Refs mode2_allocation(double vmag, double p_draw_cmd, double p_draw_min, double k_v, double v_ref, double i_max) {
    Mode2Refs r{};
    double vm = std::max(vmag, kVoltageFloor);
    double i_perp_des = sat(k_v * (v_ref - vmag), 0.0, i_max);
    r.i_par_req = p_draw_min / (1.5 * vm);
    r.infeasible = r.i_par_req > i_max;
    if (r.infeasible) r.i_par_req = i_max;
    r.i_perp = -std::min(i_perp_des, std::sqrt(std::max(0.0, i_max * i_max - r.i_par_req * r.i_par_req)));
    r.i_par_max = std::sqrt(std::max(0.0, i_max * i_max - r.i_perp * r.i_perp));
    r.i_par = sat(-p_draw_cmd / (1.5 * vm), -r.i_par_max, r.i_par_max);
    return r;
}

Phasor CurrentLoop::step(Phasor i_ref, Phasor i, Phasor v_pcc, double v_dc, double dt) {
    Phasor ff = v_pcc + Phasor{0.0, x_f} * i;
    return limits.limit_voltage(ff + pi.step(i_ref - i, dt), v_dc);
}

void CurrentLoop::prime(Phasor i, double r_f) {
    Phasor xi = r_f * i / pi.ki;
    pi.xi = {sat(xi.real(), -pi.xi_lim, pi.xi_lim), sat(xi.imag(), -pi.xi_lim, pi.xi_lim)};
}

ProposedController::ProposedController(const Scenario& sc) : sc_(sc), loop_(make_loop(sc)) {
    det_ = {sc.v_thresh, sc.v_rec, sc.t_det, 0.0, false};
    shape_.tau = sc.tau_grid;
    shape_.rate_up = sc.r_limit;
    shape_.rate_down = sc.r_down;
    droop_ = {sc.k_f, sc.p_ffr_max_sys};
}

void ProposedController::prime(const Observation& obs) {
    shape_.state = obs.p_load;
    basis_ = AlignedBasis::from_voltage(obs.v_pcc, basis_);
    loop_.prime(obs.i, sc_.r_f);
}

double ProposedController::mode1_stiffbus_term(double v_dc, bool in_fault, double dt) {
    if (sc_.mode1_enable == 0.0 || in_fault) return 0.0;
    double e = sc_.v_dc_ref - v_dc;
    if (sc_.k_i_dc > 0.0) {
        double lim = sc_.p_dis_max / sc_.k_i_dc;
        xi_dc_ = sat(xi_dc_ + e * dt, -lim, lim);
    }
    return sat(sc_.k_p_dc * e + sc_.k_i_dc * xi_dc_, -sc_.p_dis_max, sc_.p_dis_max);
}

double ProposedController::mode3_support(double x) const {
    if (sc_.n_blocks <= 0.0) return 0.0;
    return droop_(x) * sc_.s_sys_mw / (sc_.n_blocks * sc_.p_nom_mw);
}

double ProposedController::mode3_target(double x, double p_load) const {
    return sat(p_load - mode3_support(x), 0.0, p_load + sc_.p_chg_max);
}

Command ProposedController::step(const Observation& obs, double dt) {
    Command cmd;
    double vmag = std::abs(obs.v_pcc);
    cmd.voltage_floor = vmag < kVoltageFloor;
    double vm = std::max(vmag, kVoltageFloor);
    basis_ = AlignedBasis::from_voltage(obs.v_pcc, basis_);

    bool fault = det_.update(vmag, dt);
    cmd.in_fault = fault;
    cmd.mode = fault ? 2 : 1;

    double p_dis = obs.soc <= sc_.soc_min ? 0.0 : sc_.p_dis_max;
    double p_draw_min = std::max(0.0, obs.p_load - p_dis);
    if (fault) p_draw_min = std::max(p_draw_min, sc_.p_draw_min_fault);

    if (!fault && sc_.mode3_enable != 0.0 && vmag > sc_.v_thresh) {
        cmd.p_supp = mode3_support(obs.freq_dev);
        if (cmd.p_supp != 0.0) cmd.mode = 3;
    }
    double bias = sc_.mode1_enable != 0.0 && obs.soc < sc_.soc_0 ? sc_.soc_bias : 0.0;
    double target = sat(obs.p_load + bias - cmd.p_supp, 0.0, obs.p_load + sc_.p_chg_max);
    cmd.p_draw_ref = shape_.step(target, dt);

    double sched = std::max(cmd.p_draw_ref, p_draw_min);
    double p_buf = sat(obs.p_load - sched, -sc_.p_chg_max, p_dis);
    double p_draw_cmd = std::max(0.0, obs.p_load - p_buf);

    double i_par, i_perp;
    if (fault) {
        Mode2Refs r = mode2_allocation(vmag, p_draw_cmd, p_draw_min, sc_.k_v, sc_.v_ref, sc_.i_max);
        i_par = r.i_par;
        i_perp = r.i_perp;
        cmd.infeasible = r.infeasible;
    } else {
        i_perp = 0.0;
        i_par = sat(-p_draw_cmd / (1.5 * vm), -sc_.i_max, sc_.i_max);
    }

    cmd.p_vdc = mode1_stiffbus_term(obs.v_dc, fault, dt);
    cmd.p_bess_cmd = p_buf + cmd.p_vdc;

    cmd.i_ref = basis_.to_dq(i_par, i_perp);
    cmd.v_inv = loop_.step(cmd.i_ref, obs.i, obs.v_pcc, obs.v_dc, dt);
    return cmd;
}

GflMcController::GflMcController(const Scenario& sc) : sc_(sc), loop_(make_loop(sc)) {}

void GflMcController::prime(const Observation& obs) {
    basis_ = AlignedBasis::from_voltage(obs.v_pcc, basis_);
    loop_.prime(obs.i, sc_.r_f);
}

Command GflMcController::step(const Observation& obs, double dt) {
    Command cmd;
    double vmag = std::abs(obs.v_pcc);
    cmd.voltage_floor = vmag < kVoltageFloor;
    basis_ = AlignedBasis::from_voltage(obs.v_pcc, basis_);
    cmd.p_draw_ref = obs.p_load;
    if (vmag < sc_.mc_threshold) {
        cmd.cessation = true;
        cmd.block = true;
        cmd.mode = 0;
        loop_.pi.reset();
        cmd.v_inv = obs.v_pcc;
        return cmd;
    }
    double vm = std::max(vmag, kVoltageFloor);
    cmd.i_ref = loop_.limits.limit_current(basis_.to_dq(-obs.p_load / (1.5 * vm), 0.0));
    cmd.v_inv = loop_.step(cmd.i_ref, obs.i, obs.v_pcc, obs.v_dc, dt);
    return cmd;
}

GflPllController::GflPllController(const Scenario& sc, double theta0)
    : sc_(sc), loop_(make_loop(sc)), theta_(wrap_angle(theta0)) {}

void GflPllController::prime(const Observation& obs) {
    theta_ = std::arg(obs.v_pcc);
    integ_ = 0.0;
    loop_.prime(obs.i, sc_.r_f);
}

Command GflPllController::step(const Observation& obs, double dt) {
    Command cmd;
    double vmag = std::abs(obs.v_pcc);
    cmd.voltage_floor = vmag < kVoltageFloor;
    double vm = std::max(vmag, kVoltageFloor);
    Phasor rot = std::polar(1.0, theta_);
    Phasor v_pll = obs.v_pcc * std::conj(rot);
    double vq = v_pll.imag();

    integ_ += vq * dt;
    omega_dev_ = sc_.k_p_pll * vq + sc_.k_i_pll * integ_;
    theta_ = wrap_angle(theta_ + omega_dev_ * dt);
    cmd.pll_diverged = std::abs(omega_dev_) > 0.5 * kOmega0;

    double i_d, i_q;
    if (vmag < sc_.lvrt_threshold) {
        cmd.mode = 2;
        cmd.in_fault = true;
        i_q = -sat(sc_.k_v_pll * (1.0 - vmag), 0.0, sc_.i_max);
        double head = std::sqrt(std::max(0.0, sc_.i_max * sc_.i_max - i_q * i_q));
        i_d = -std::min(obs.p_load / (1.5 * vm), head);
    } else {
        i_q = 0.0;
        i_d = -obs.p_load / (1.5 * vm);
    }
    cmd.p_draw_ref = obs.p_load;
    cmd.i_ref = loop_.limits.limit_current(Phasor{i_d, i_q} * rot);
    cmd.v_inv = loop_.step(cmd.i_ref, obs.i, obs.v_pcc, obs.v_dc, dt);
    return cmd;
}

Controller make_controller(const Scenario& sc) {
    switch (sc.controller) {
        case ControllerKind::gfl_mc: return GflMcController(sc);
        case ControllerKind::gfl_pll: return GflPllController(sc);
        case ControllerKind::proposed: break;
    }
    return ProposedController(sc);
}

Command controller_step(Controller& c, const Observation& obs, double dt) {
    return std::visit([&](auto& ctl) { return ctl.step(obs, dt); }, c);
}

void controller_prime(Controller& c, const Observation& obs) {
    std::visit([&](auto& ctl) { ctl.prime(obs); }, c);
}

}  // namespace mvups
