#pragma once

#include <string>
#include <vector>

#include "mvups/params.hpp"
#include "mvups/sim.hpp"

namespace mvups {

struct SwingProxy {
    double h = 5.0;
    double d = 1.0;
    double s_sys_mw = 30000.0;
    double n = 20;
    double p_nom_mw = 50.0;
    double f0 = 60.0;
    double x = 0.0;
    double p_m = 0.0;

    double frequency() const { return f0 * (1.0 + x); }
};

SwingProxy swing_from(const Scenario& sc);

double swing_step(SwingProxy& sp, double p_e, double dt);

struct FrequencyTrace {
    std::string name;
    std::vector<double> t;
    std::vector<double> f;

    // Frequency at the sample with the largest |f - f0|.
    double peak(double f0) const;
};

struct NamedTrace {
    std::string name;
    const Trace* trace;
};

// Open-loop mapping of the facility draw onto the swing proxy, starting at t_start.
std::vector<FrequencyTrace> run_fault_aggregation(const std::vector<NamedTrace>& traces, const SwingProxy& sp,
                                                  double t_start);

struct FfrResult {
    FrequencyTrace freq;
    Trace facility;
    double nadir = 0.0;
    double max_support = 0.0;
};

// Closed-loop frequency event: generation loss at sc.freq_event_time, facility Mode 3 reacting to x.
FfrResult run_ffr_event(const Scenario& sc, double disturbance);

struct SweepCell {
    double n;
    double h;
    std::string controller;
    double peak_f;
};

std::vector<SweepCell> nh_sweep(const std::vector<NamedTrace>& traces, const std::vector<double>& n_set,
                                const std::vector<double>& h_set, const SwingProxy& tmpl, double t_start);

// Searches D in [lo, hi] for the peak of one trace closest to target_f.
double calibrate_damping(const Trace& tr, SwingProxy sp, double t_start, double target_f, double lo, double hi);

}  // namespace mvups
