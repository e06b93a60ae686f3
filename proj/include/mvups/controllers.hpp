#pragma once

#include <variant>

#include "mvups/control_blocks.hpp"
#include "mvups/params.hpp"
#include "mvups/plant.hpp"

namespace mvups {

constexpr double kVoltageFloor = 1e-3;

struct CurrentLimits {
    double i_max = 1.0;
    double e_max = 1.6;

    Phasor limit_current(Phasor i) const;
    Phasor limit_voltage(Phasor v, double v_dc) const;
};

struct FaultDetector {
    double v_thresh = 0.85;
    double v_rec = 0.90;
    double t_det = 0.002;
    double timer = 0.0;
    bool in_fault = false;

    bool update(double vmag, double dt);
};

// Rotation between the V_pcc-aligned (parallel, perpendicular) basis and dq.
class AlignedBasis {
public:
    explicit AlignedBasis(Phasor u = {1.0, 0.0}) : u_(u) {}
    static AlignedBasis from_voltage(Phasor v_pcc, const AlignedBasis& last);
    Phasor to_dq(double par, double perp) const { return Phasor{par, perp} * u_; }
    Phasor from_dq(Phasor x) const { return x * std::conj(u_); }
    Phasor unit() const { return u_; }

private:
    Phasor u_;
};

struct Observation {
    double t = 0.0;
    Phasor v_pcc{1.0, 0.0};
    Phasor i{0.0, 0.0};
    double v_dc = 1.0;
    double p_load = 0.0;
    double soc = 0.9;
    double freq_dev = 0.0;
};

struct Command {
    Phasor v_inv{0.0, 0.0};
    Phasor i_ref{0.0, 0.0};
    double p_bess_cmd = 0.0;
    double p_draw_ref = 0.0;
    double p_vdc = 0.0;
    double p_supp = 0.0;
    int mode = 1;
    bool in_fault = false;
    bool block = false;
    bool cessation = false;
    bool voltage_floor = false;
    bool infeasible = false;
    bool pll_diverged = false;
};

struct Mode2Refs {
    double i_par;
    double i_perp;
    double i_par_max;
    double i_par_req;
    bool infeasible;
};

// Fault-mode current allocation for a given scheduled draw and minimum draw.
Mode2Refs mode2_allocation(double vmag, double p_draw_cmd, double p_draw_min, double k_v, double v_ref, double i_max);

// Current regulator shared by all three controllers.
struct CurrentLoop {
    PiRegulator pi;
    double x_f = 0.15;
    CurrentLimits limits;

    Phasor step(Phasor i_ref, Phasor i, Phasor v_pcc, double v_dc, double dt);
    // Loads the integrator so that the loop holds current i through filter resistance r_f.
    void prime(Phasor i, double r_f);
};

class ProposedController {
public:
    explicit ProposedController(const Scenario& sc);
    Command step(const Observation& obs, double dt);
    void prime(const Observation& obs);

    double mode1_stiffbus_term(double v_dc, bool in_fault, double dt);
    double mode3_target(double x, double p_load) const;
    double mode3_support(double x) const;

    const FaultDetector& detector() const { return det_; }
    const ShapingFilter& shaping() const { return shape_; }
    double xi_dc() const { return xi_dc_; }

private:
    Scenario sc_;
    FaultDetector det_;
    ShapingFilter shape_;
    CurrentLoop loop_;
    DroopLaw droop_;
    AlignedBasis basis_;
    double xi_dc_ = 0.0;
};

class GflMcController {
public:
    explicit GflMcController(const Scenario& sc);
    Command step(const Observation& obs, double dt);
    void prime(const Observation& obs);

private:
    Scenario sc_;
    CurrentLoop loop_;
    AlignedBasis basis_;
};

class GflPllController {
public:
    explicit GflPllController(const Scenario& sc, double theta0 = 0.0);
    Command step(const Observation& obs, double dt);
    void prime(const Observation& obs);

    double theta() const { return theta_; }
    double omega_dev() const { return omega_dev_; }

private:
    Scenario sc_;
    CurrentLoop loop_;
    double theta_;
    double integ_ = 0.0;
    double omega_dev_ = 0.0;
};

using Controller = std::variant<ProposedController, GflMcController, GflPllController>;

Controller make_controller(const Scenario& sc);
Command controller_step(Controller& c, const Observation& obs, double dt);
void controller_prime(Controller& c, const Observation& obs);

}  // namespace mvups
