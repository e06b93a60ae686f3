#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvups/sim.hpp"

namespace mvups {

using Abc = std::array<double, 3>;

Abc abc_from_dq(Phasor x_dq, double theta);
Phasor dq_from_abc(const Abc& x, double theta);

struct AbcSample {
    double t;
    Abc v_pcc;
    Abc i;
    TraceRecord ctl;
};

struct AbcTrace {
    std::vector<AbcSample> samples;
    double dt = 0.0;
    bool diverged = false;
    std::string error;
};

struct EmtResult {
    AbcTrace raw;
    Trace phasor;
    std::vector<double> neg_seq;
    double max_current_sum = 0.0;
};

// Fixed-step abc network with the averaged-model controller in the loop.
AbcTrace run_emt_raw(const Scenario& sc, double dt = 50e-6);

// One-cycle sliding fundamental extraction at f0; emission starts after the first full cycle.
Trace phasor_postprocess(const AbcTrace& raw, double f0 = 60.0, std::vector<double>* neg_seq = nullptr);

EmtResult run_emt(const Scenario& sc, double dt = 50e-6);

struct ChannelComparison {
    std::string channel;
    double rms_pre = 0.0;
    double rms_post = 0.0;
};

struct ComparisonWindows {
    double pre_start;
    double pre_end;
    double post_start;
    double post_end;
};

ComparisonWindows default_comparison_windows(const Scenario& sc);

std::vector<ChannelComparison> compare_traces(const Trace& averaged, const Trace& emt, const ComparisonWindows& w);

// Paired (t, averaged, emt) series on the averaged time grid for one channel.
void write_paired_csv(std::ostream& os, const Trace& averaged, const Trace& emt, double TraceRecord::*channel);

}  // namespace mvups
