#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mvups/sim.hpp"

namespace mvups {

constexpr double kSettleWindow = 1.0 / 60.0;

struct FaultMetrics {
    double min_v = 0.0;
    double settled_min_v = 0.0;
    double max_i = 0.0;
    double mean_p_draw = 0.0;
    double min_v_dc = 0.0;
    double unserved_mwh = 0.0;
    double max_rate = 0.0;
    double max_p_bess = 0.0;
    unsigned flags = 0;
    bool diverged = false;
};

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

FaultMetrics fault_window_metrics(const Trace& tr, double start, double end, double s_base_mw = 50.0);

// Unserved IT energy in MWh over [start, end).
double unserved_energy(const Trace& tr, double start, double end, double s_base_mw);

double max_ramp_rate(const Trace& tr);

enum class TableFormat { text, csv };

struct TableColumn {
    std::string header;
    double FaultMetrics::*field;
    int decimals;
};

const std::vector<TableColumn>& default_columns();
const std::vector<TableColumn>& ablation_columns();
const std::vector<TableColumn>& sweep_columns();
const std::vector<TableColumn>& comparison_columns();

std::string render_table(const std::vector<std::pair<std::string, FaultMetrics>>& rows, TableFormat fmt,
                         const std::vector<TableColumn>& columns = default_columns());

std::string flags_summary(unsigned flags);

// Single-bin Fourier amplitude of one channel at f over [t0, t1).
double fourier_amplitude(const Trace& tr, double TraceRecord::*channel, double f, double t0, double t1);

struct DcRecovery {
    double initial_error = 0.0;
    double final_error = 0.0;
    // Earliest time after which the one-period mean of V_dc stays within tol of the reference; -1 if never.
    double settle_time = -1.0;
    double worst_mean_error_after = 0.0;
    double worst_inst_error_after = 0.0;
};

// Judged at t_check with a moving mean over one pulse period.
DcRecovery dc_recovery(const Trace& tr, double v_ref, double period, double tol, double t_check);

}  // namespace mvups
