#include "mvups/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvups {

SwingProxy swing_from(const Scenario& sc) {
    SwingProxy sp;
    sp.h = sc.h;
    sp.d = sc.d;
    sp.s_sys_mw = sc.s_sys_mw;
    sp.n = sc.n_blocks;
    sp.p_nom_mw = sc.p_nom_mw;
    sp.f0 = sc.f0;
    return sp;
}

double swing_step(SwingProxy& sp, double p_e, double dt) {
    if (!(sp.h > 0.0)) throw std::invalid_argument("swing_step: H must be positive");
    sp.x += dt * ((sp.p_m - p_e) - sp.d * sp.x) / (2.0 * sp.h);
    return sp.x;
}

double FrequencyTrace::peak(double f0) const {
    double best = f0;
    double dev = -1.0;
    for (double v : f) {
        if (std::abs(v - f0) > dev) {
            dev = std::abs(v - f0);
            best = v;
        }
    }
    return best;
}

std::vector<FrequencyTrace> run_fault_aggregation(const std::vector<NamedTrace>& traces, const SwingProxy& sp,
                                                  double t_start) {
    std::vector<FrequencyTrace> out;
    if (traces.empty()) return out;
    const auto& ref = traces.front().trace->rows;
    for (const auto& nt : traces) {
        const auto& rows = nt.trace->rows;
        if (rows.size() != ref.size() || (!rows.empty() && (rows.front().t != ref.front().t || rows.back().t != ref.back().t)))
            throw std::invalid_argument("run_fault_aggregation: traces come from different scenarios");
    }
    double scale = sp.p_nom_mw / sp.s_sys_mw;
    for (const auto& nt : traces) {
        const auto& rows = nt.trace->rows;
        FrequencyTrace ft;
        ft.name = nt.name;
        std::size_t k0 = 0;
        while (k0 < rows.size() && rows[k0].t < t_start) ++k0;
        if (k0 >= rows.size()) throw std::invalid_argument("run_fault_aggregation: start beyond trace end");
        double p0 = rows[k0 > 0 ? k0 - 1 : 0].p_draw;
        SwingProxy s = sp;
        s.x = 0.0;
        s.p_m = 0.0;
        for (std::size_t k = k0; k < rows.size(); ++k) {
            ft.t.push_back(rows[k].t);
            ft.f.push_back(s.frequency());
            double h = k + 1 < rows.size() ? rows[k + 1].t - rows[k].t : nt.trace->dt;
            double p_e = s.n * (rows[k].p_draw - p0) * scale;
            swing_step(s, p_e, h);
        }
        out.push_back(std::move(ft));
    }
    return out;
}

FfrResult run_ffr_event(const Scenario& sc_in, double disturbance) {
    Scenario sc = sc_in;
    sc.init_steady = 1;
    sc.dip_start = sc.duration;
    sc.dip_end = sc.duration;
    validate(sc);
    AveragedSimulation sim(sc);
    SwingProxy sp = swing_from(sc);
    double scale = sp.p_nom_mw / sp.s_sys_mw;

    FfrResult res;
    res.freq.name = controller_name(sc.controller);
    res.facility.dt = sc.dt;
    long n = std::lround(sc.duration / sc.dt);
    double p0 = 0.0;
    for (long k = 0; k < n; ++k) {
        double t = sim.time();
        TraceRecord rec = sim.step(sp.x);
        if (k == 0) p0 = rec.p_draw;
        res.facility.rows.push_back(rec);
        res.freq.t.push_back(t);
        res.freq.f.push_back(sp.frequency());
        res.max_support = std::max(res.max_support, std::abs(rec.p_supp));
        sp.p_m = t >= sc.freq_event_time ? -disturbance : 0.0;
        swing_step(sp, sp.n * (rec.p_draw - p0) * scale, sc.dt);
    }
    res.nadir = sc.f0;
    for (double f : res.freq.f) res.nadir = std::min(res.nadir, f);
    return res;
}

std::vector<SweepCell> nh_sweep(const std::vector<NamedTrace>& traces, const std::vector<double>& n_set,
                                const std::vector<double>& h_set, const SwingProxy& tmpl, double t_start) {
    if (n_set.empty() || h_set.empty()) throw std::invalid_argument("nh_sweep: empty parameter set");
    std::vector<SweepCell> cells;
    for (double n : n_set) {
        for (double h : h_set) {
            SwingProxy sp = tmpl;
            sp.n = n;
            sp.h = h;
            auto fts = run_fault_aggregation(traces, sp, t_start);
            for (const auto& ft : fts) cells.push_back({n, h, ft.name, ft.peak(sp.f0)});
        }
    }
    return cells;
}

double calibrate_damping(const Trace& tr, SwingProxy sp, double t_start, double target_f, double lo, double hi) {
    auto err = [&](double d) {
        sp.d = d;
        auto ft = run_fault_aggregation({{"x", &tr}}, sp, t_start);
        return std::abs(ft.front().peak(sp.f0) - target_f);
    };
    double best = lo;
    double best_err = err(lo);
    constexpr int kGrid = 60;
    for (int k = 1; k <= kGrid; ++k) {
        double d = lo + (hi - lo) * k / kGrid;
        double e = err(d);
        if (e < best_err) {
            best_err = e;
            best = d;
        }
    }
    return best;
}

}  // namespace mvups
