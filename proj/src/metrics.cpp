#include "mvups/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace mvups {

namespace {

double sample_spacing(const Trace& tr, std::size_t k) {
    if (k + 1 < tr.rows.size()) return tr.rows[k + 1].t - tr.rows[k].t;
    if (k > 0) return tr.rows[k].t - tr.rows[k - 1].t;
    return tr.dt;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

double unserved_energy(const Trace& tr, double start, double end, double s_base_mw) {
    double e = 0.0;
    for (std::size_t k = 0; k < tr.rows.size(); ++k) {
        const auto& r = tr.rows[k];
        if (r.t < start || r.t >= end) continue;
        double delivered = std::min(r.p_load, r.p_draw + r.p_bess);
        e += std::max(0.0, r.p_load - delivered) * sample_spacing(tr, k);
    }
    return e * s_base_mw / 3600.0;
}

double max_ramp_rate(const Trace& tr) {
    double m = 0.0;
    for (std::size_t k = 1; k < tr.rows.size(); ++k) {
        double h = tr.rows[k].t - tr.rows[k - 1].t;
        if (h <= 0.0) continue;
        m = std::max(m, std::abs(tr.rows[k].p_draw_ref - tr.rows[k - 1].p_draw_ref) / h);
    }
    return m;
}

FaultMetrics fault_window_metrics(const Trace& tr, double start, double end, double s_base_mw) {
    FaultMetrics m;
    constexpr double inf = std::numeric_limits<double>::infinity();
    m.min_v = inf;
    m.settled_min_v = inf;
    m.min_v_dc = inf;
    double sum_p = 0.0;
    std::size_t n = 0;
    for (const auto& r : tr.rows) {
        if (r.t < start || r.t >= end) continue;
        m.min_v = std::min(m.min_v, r.v_mag);
        if (r.t >= start + kSettleWindow) m.settled_min_v = std::min(m.settled_min_v, r.v_mag);
        m.max_i = std::max(m.max_i, r.i_mag);
        m.min_v_dc = std::min(m.min_v_dc, r.v_dc);
        m.max_p_bess = std::max(m.max_p_bess, std::abs(r.p_bess));
        m.flags |= r.flags;
        sum_p += r.p_draw;
        ++n;
    }
    if (n == 0) throw MetricsError("fault window contains no samples");
    if (!std::isfinite(m.settled_min_v)) m.settled_min_v = m.min_v;
    m.mean_p_draw = sum_p / static_cast<double>(n);
    m.unserved_mwh = unserved_energy(tr, start, end, s_base_mw);
    m.max_rate = max_ramp_rate(tr);
    m.diverged = tr.diverged;
    return m;
}

const std::vector<TableColumn>& default_columns() {
    static const std::vector<TableColumn> c = {
        {"min|Vpcc|", &FaultMetrics::min_v, 3},        {"max|I|", &FaultMetrics::max_i, 3},
        {"mean Pdraw", &FaultMetrics::mean_p_draw, 3}, {"min Vdc", &FaultMetrics::min_v_dc, 3},
        {"unserved MWh", &FaultMetrics::unserved_mwh, 5}};
    return c;
}

const std::vector<TableColumn>& ablation_columns() {
    static const std::vector<TableColumn> c = {
        {"min|Vpcc|", &FaultMetrics::min_v, 3},        {"max|I|", &FaultMetrics::max_i, 3},
        {"mean Pdraw", &FaultMetrics::mean_p_draw, 3}, {"min Vdc", &FaultMetrics::min_v_dc, 3},
        {"max|dPref/dt|", &FaultMetrics::max_rate, 3}};
    return c;
}

const std::vector<TableColumn>& sweep_columns() {
    static const std::vector<TableColumn> c = {{"settled min|Vpcc|", &FaultMetrics::settled_min_v, 3},
                                               {"max|I|", &FaultMetrics::max_i, 3},
                                               {"max|Pbess|", &FaultMetrics::max_p_bess, 3},
                                               {"max|dPref/dt|", &FaultMetrics::max_rate, 3},
                                               {"unserved MWh", &FaultMetrics::unserved_mwh, 5}};
    return c;
}

const std::vector<TableColumn>& comparison_columns() {
    static const std::vector<TableColumn> c = {{"min|Vpcc|", &FaultMetrics::min_v, 3},
                                               {"settled min|Vpcc|", &FaultMetrics::settled_min_v, 3},
                                               {"max|I|", &FaultMetrics::max_i, 3},
                                               {"mean Pdraw", &FaultMetrics::mean_p_draw, 3},
                                               {"min Vdc", &FaultMetrics::min_v_dc, 3},
                                               {"unserved MWh", &FaultMetrics::unserved_mwh, 5}};
    return c;
}

std::string flags_summary(unsigned flags) {
    std::string s;
    auto add = [&](unsigned bit, const char* name) {
        if (flags & bit) s += s.empty() ? name : std::string("|") + name;
    };
    add(kFlagCessation, "cessation");
    add(kFlagVoltageFloor, "voltage-floor");
    add(kFlagInfeasible, "infeasible");
    add(kFlagBusCollapse, "bus-collapse");
    add(kFlagPllDiverged, "pll-diverged");
    return s.empty() ? "-" : s;
}

std::string render_table(const std::vector<std::pair<std::string, FaultMetrics>>& rows, TableFormat fmt,
                         const std::vector<TableColumn>& columns) {
    if (rows.empty()) throw MetricsError("render_table: no rows");
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header = {"case"};
    for (const auto& c : columns) header.push_back(c.header);
    header.push_back("flags");
    cells.push_back(header);
    for (const auto& [name, m] : rows) {
        std::vector<std::string> line = {name};
        for (const auto& c : columns) line.push_back(fixed(m.*(c.field), c.decimals));
        line.push_back(flags_summary(m.flags));
        cells.push_back(line);
    }
    std::ostringstream os;
    if (fmt == TableFormat::csv) {
        for (const auto& line : cells) {
            for (std::size_t c = 0; c < line.size(); ++c) {
                const std::string& v = line[c];
                bool quote = v.find_first_of(",\"") != std::string::npos;
                std::string q = v;
                if (quote) {
                    q.clear();
                    for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                    q = "\"" + q + "\"";
                }
                os << (c ? "," : "") << q;
            }
            os << '\n';
        }
        return os.str();
    }
    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t c = 0; c < cells[r].size(); ++c) {
            const std::string& v = cells[r][c];
            std::string pad(width[c] - v.size(), ' ');
            if (c == 0) os << v << pad;
            else os << "  " << pad << v;
        }
        os << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w + 2;
            os << std::string(total - 2, '-') << '\n';
        }
    }
    return os.str();
}

}  // namespace mvups

namespace mvups {

double fourier_amplitude(const Trace& tr, double TraceRecord::*channel, double f, double t0, double t1) {
    double re = 0.0, im = 0.0, span = 0.0;
    for (std::size_t k = 0; k < tr.rows.size(); ++k) {
        const auto& r = tr.rows[k];
        if (r.t < t0 || r.t >= t1) continue;
        double h = k + 1 < tr.rows.size() ? tr.rows[k + 1].t - r.t : tr.dt;
        double w = 2.0 * 3.14159265358979323846 * f * r.t;
        re += r.*channel * std::cos(w) * h;
        im += r.*channel * std::sin(w) * h;
        span += h;
    }
    if (span <= 0.0) throw MetricsError("fourier_amplitude: empty window");
    return 2.0 * std::hypot(re, im) / span;
}

DcRecovery dc_recovery(const Trace& tr, double v_ref, double period, double tol, double t_check) {
    const auto& rows = tr.rows;
    if (rows.size() < 2) throw MetricsError("dc_recovery: trace too short");
    DcRecovery out;
    out.initial_error = std::abs(rows.front().v_dc - v_ref);
    out.final_error = std::abs(rows.back().v_dc - v_ref);
    double step = rows[1].t - rows[0].t;
    std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(period / step)));
    if (n > rows.size()) throw MetricsError("dc_recovery: trace shorter than one period");
    std::vector<double> prefix(rows.size() + 1, 0.0);
    for (std::size_t k = 0; k < rows.size(); ++k) prefix[k + 1] = prefix[k] + rows[k].v_dc;
    double last_out = -1.0;
    for (std::size_t k = n; k <= rows.size(); ++k) {
        double t_end = rows[k - 1].t + step;
        double err = std::abs((prefix[k] - prefix[k - n]) / static_cast<double>(n) - v_ref);
        if (err > tol) last_out = t_end;
        if (t_end >= t_check) out.worst_mean_error_after = std::max(out.worst_mean_error_after, err);
    }
    for (const auto& r : rows)
        if (r.t >= t_check) out.worst_inst_error_after = std::max(out.worst_inst_error_after, std::abs(r.v_dc - v_ref));
    double t_first = rows[n - 1].t + step;
    out.settle_time = last_out < 0.0 ? t_first : last_out;
    if (last_out >= rows.back().t + step - 0.5 * step) out.settle_time = -1.0;
    return out;
}

}  // namespace mvups
