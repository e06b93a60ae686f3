#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mvups/controllers.hpp"
#include "mvups/params.hpp"
#include "mvups/plant.hpp"

namespace mvups {

enum TraceFlag : unsigned {
    kFlagCessation = 1u << 0,
    kFlagVoltageFloor = 1u << 1,
    kFlagInfeasible = 1u << 2,
    kFlagBusCollapse = 1u << 3,
    kFlagPllDiverged = 1u << 4,
};

struct TraceRecord {
    double t;
    double p_draw;
    double p_grid;
    double p_load;
    double p_bess;
    double soc;
    double v_mag;
    double v_d;
    double v_q;
    double i_d;
    double i_q;
    double i_mag;
    double v_dc;
    double p_draw_ref;
    double i_ref_d;
    double i_ref_q;
    double p_vdc;
    double p_supp;
    int mode;
    bool in_fault;
    unsigned flags;
};

struct Trace {
    std::vector<TraceRecord> rows;
    double dt = 0.0;
    bool diverged = false;
    std::string error;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double kDivergenceCurrent = 50.0;

// Averaged dq engine; one instance per scenario.
class AveragedSimulation {
public:
    explicit AveragedSimulation(const Scenario& sc);

    // Advances one step with the given external frequency deviation; returns the record for the step start.
    TraceRecord step(double freq_dev);
    void run(Trace& out);

    double time() const { return t_; }
    long steps() const { return k_; }
    const Scenario& scenario() const { return sc_; }
    const TheveninGrid& grid() const { return grid_; }

private:
    Scenario sc_;
    TheveninGrid grid_;
    Phasor vth_nominal_;
    RlFilter filter_;
    DcLinkProxy dc_;
    BessModel bess_;
    LoadProfile load_;
    Controller ctl_;
    bool uses_bess_;
    double t_ = 0.0;
    long k_ = 0;
};

Phasor nominal_source(const Scenario& sc, const TheveninGrid& g);
bool in_dip(const Scenario& sc, double t);
LoadProfile load_profile(const Scenario& sc);
double exogenous_freq_dev(const Scenario& sc, double t);

Trace run_scenario(const Scenario& sc);

const std::vector<std::string>& trace_columns();
void write_trace_csv(std::ostream& os, const Trace& tr);
std::string format_number(double v);

}  // namespace mvups
