#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mvups/emt.hpp"
#include "mvups/frequency.hpp"
#include "mvups/metrics.hpp"
#include "mvups/suites.hpp"

namespace {

using namespace mvups;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%-5s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0, double e = 0, double g = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d, e, g);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool near(double a, double target, double tol) { return std::abs(a - target) <= tol; }

const RowResult& row(const SuiteReport& r, const std::string& name) {
    for (const auto& x : r.rows)
        if (x.name == name) return x;
    throw std::runtime_error("missing row " + name);
}

FaultMetrics metrics_of(const Scenario& sc) {
    return fault_window_metrics(run_scenario(sc), sc.dip_start, sc.dip_end, sc.p_nom_mw);
}

Scenario with_controller(ControllerKind k) {
    Scenario sc;
    sc.controller = k;
    return sc;
}

}  // namespace

int main() {
    auto battery_start = Clock::now();
    std::vector<SuiteReport> suites;
    for (const auto& id : study_ids()) suites.push_back(run_study(id, Scenario{}, 1));
    double battery_s = seconds_since(battery_start);
    auto suite = [&](const std::string& id) -> const SuiteReport& {
        for (const auto& s : suites)
            if (s.study == id) return s;
        throw std::runtime_error("missing suite " + id);
    };
    bool suites_ok = true;
    for (const auto& s : suites) suites_ok = suites_ok && !s.any_failed();

    const SuiteReport& t1 = suite("table1");
    const FaultMetrics& mc = row(t1, "GFL-MC").metrics;
    const FaultMetrics& pll = row(t1, "GFL-PLL").metrics;
    const FaultMetrics& prop = row(t1, "Proposed").metrics;

    {
        double worst = 0.0;
        for (auto k : {ControllerKind::gfl_mc, ControllerKind::gfl_pll, ControllerKind::proposed}) {
            auto t0 = Clock::now();
            metrics_of(with_controller(k));
            worst = std::max(worst, seconds_since(t0));
        }
        bool pass = near(mc.unserved_mwh, 0.00208, 0.02 * 0.00208) && prop.unserved_mwh <= 1e-6 && worst < 1.0;
        report("AC1", pass,
               fmt("unserved GFL-MC %.6f MWh (0.00208 +-2%%), proposed %.2e MWh (<=1e-6), slowest scenario %.3f s (<1 s)",
                   mc.unserved_mwh, prop.unserved_mwh, worst));
    }

    {
        bool v = prop.settled_min_v > pll.settled_min_v && pll.settled_min_v > mc.settled_min_v;
        bool i = prop.max_i < mc.max_i && mc.max_i < pll.max_i;
        bool u = prop.unserved_mwh < pll.unserved_mwh && pll.unserved_mwh < mc.unserved_mwh;
        report("AC2", v && i && u,
               fmt("settled minV %.3f > %.3f > %.3f; maxI %.3f < %.3f < %.3f", prop.settled_min_v, pll.settled_min_v,
                   mc.settled_min_v, prop.max_i, mc.max_i, pll.max_i) +
                   fmt("; unserved %.5f < %.5f < %.5f", prop.unserved_mwh, pll.unserved_mwh, mc.unserved_mwh));
    }

    {
        const double tol = 0.05;
        bool pass = near(prop.settled_min_v, 0.789, tol) && near(prop.max_i, 0.570, tol) &&
                    near(prop.min_v_dc, 0.784, tol) && near(pll.settled_min_v, 0.661, tol) &&
                    near(pll.max_i, 1.017, tol) && near(mc.settled_min_v, 0.499, tol) && near(mc.max_i, 0.658, tol);
        report("AC3", pass,
               fmt("proposed %.3f/%.3f/%.3f (0.789/0.570/0.784)", prop.settled_min_v, prop.max_i, prop.min_v_dc) +
                   fmt("; GFL-PLL %.3f/%.3f (0.661/1.017); GFL-MC %.3f/%.3f (0.499/0.658); tol 0.05", pll.settled_min_v,
                       pll.max_i, mc.settled_min_v, mc.max_i));
    }

    {
        const SuiteReport& ab = suite("ablation");
        const SuiteReport& st = suite("stress");
        const FaultMetrics& base = row(ab, "Baseline").metrics;
        const FaultMetrics& nosoft = row(ab, "No soft return").metrics;
        const FaultMetrics& nobess = row(st, "No BESS (P_dis_max=0)").metrics;
        const FaultMetrics& nokv = row(ab, "No Q-support (K_v=0)").metrics;
        const FaultMetrics& nomin = row(ab, "No min draw policy (P_draw_min_fault=0)").metrics;
        bool pass = near(base.mean_p_draw, 0.198, 0.03) && near(base.max_rate, 0.200, 0.001) && nosoft.max_rate >= 50.0 &&
                    near(nobess.unserved_mwh, 0.00200, 0.0002) && nobess.max_i <= 1.0 + 1e-9 &&
                    nokv.settled_min_v < base.settled_min_v && nokv.min_v < base.min_v && nomin.mean_p_draw <= 0.12;
        report("AC4", pass,
               fmt("mean Pdraw %.3f, max rate %.4f, no-soft rate %.1f, no-BESS unserved %.5f maxI %.3f", base.mean_p_draw,
                   base.max_rate, nosoft.max_rate, nobess.unserved_mwh, nobess.max_i) +
                   fmt(", K_v=0 minV %.3f/%.3f vs %.3f/%.3f, no-min Pdraw %.3f", nokv.settled_min_v, nokv.min_v,
                       base.settled_min_v, base.min_v, nomin.mean_p_draw));
    }

    {
        const SuiteReport& sw = suite("sweeps");
        std::vector<FaultMetrics> scr, vd;
        for (const char* n : {"SCR=1.2 (V_dip=0.5)", "SCR=1.5 (V_dip=0.5)", "SCR=2.0 (V_dip=0.5)", "SCR=3.0 (V_dip=0.5)"})
            scr.push_back(row(sw, n).metrics);
        for (const char* n : {"V_dip=0.4 (SCR=1.5)", "V_dip=0.5 (SCR=1.5)", "V_dip=0.7 (SCR=1.5)"}) vd.push_back(row(sw, n).metrics);
        bool pass = true;
        for (std::size_t k = 1; k < scr.size(); ++k)
            pass = pass && scr[k].settled_min_v < scr[k - 1].settled_min_v && scr[k].max_i > scr[k - 1].max_i;
        for (std::size_t k = 1; k < vd.size(); ++k)
            pass = pass && vd[k].settled_min_v > vd[k - 1].settled_min_v && vd[k].max_i < vd[k - 1].max_i;
        double unserved = 0.0;
        for (const auto& r : sw.rows) unserved = std::max(unserved, r.metrics.unserved_mwh);
        pass = pass && unserved <= 1e-6;
        report("AC5", pass,
               fmt("SCR settled %.3f>%.3f>%.3f>%.3f, V_dip settled %.3f<%.3f", scr[0].settled_min_v, scr[1].settled_min_v,
                   scr[2].settled_min_v, scr[3].settled_min_v, vd[0].settled_min_v, vd[1].settled_min_v) +
                   fmt("<%.3f, maxI SCR %.3f..%.3f, V_dip %.3f..%.3f, max unserved %.1e MWh (<=1e-6)", vd[2].settled_min_v,
                       scr[0].max_i, scr[3].max_i, vd[0].max_i, vd[2].max_i, unserved));
    }

    std::vector<Trace> extra;
    {
        Scenario all_on;
        all_on.mode1_enable = 1;
        all_on.mode3_enable = 1;
        all_on.v_dc_0 = 0.9;
        all_on.freq_event_dev = -0.002;
        extra.push_back(run_scenario(all_on));
        Scenario deep = all_on;
        deep.v_dip = 0.1;
        deep.scr = 3.0;
        extra.push_back(run_scenario(deep));
    }

    {
        double worst = 0.0;
        std::size_t steps = 0;
        auto scan = [&](const Trace& tr) {
            for (const auto& r : tr.rows) {
                worst = std::max(worst, std::hypot(r.i_ref_d, r.i_ref_q));
                ++steps;
            }
        };
        for (const auto& s : suites)
            for (const auto& r : s.rows)
                if (r.scenario.controller == ControllerKind::proposed) scan(r.trace);
        for (const auto& tr : extra) scan(tr);

        std::mt19937 rng(1);
        std::uniform_real_distribution<double> mag(0.0, 1.4), ang(-3.14159, 3.14159), load(0.0, 2.0), soc(0.15, 1.0),
            vdc(0.6, 1.2), cur(-1.5, 1.5), fd(-0.01, 0.01);
        Scenario sc;
        sc.mode1_enable = 1;
        sc.mode3_enable = 1;
        ProposedController c(sc);
        double rand_worst = 0.0;
        const int cases = 20000;
        for (int k = 0; k < cases; ++k) {
            Observation o;
            o.v_pcc = std::polar(mag(rng), ang(rng));
            o.i = {cur(rng), cur(rng)};
            o.p_load = load(rng);
            o.soc = soc(rng);
            o.v_dc = vdc(rng);
            o.freq_dev = fd(rng);
            for (int r = 0; r < 1 + k % 30; ++r) rand_worst = std::max(rand_worst, std::abs(c.step(o, 1e-4).i_ref));
        }
        bool pass = worst <= 1.0 + 1e-9 && rand_worst <= 1.0 + 1e-9 && steps > 0;
        report("AC6", pass,
               fmt("max |i*| %.12f over %.0f suite steps, %.12f over %.0f randomized cases (<= 1+1e-9)", worst,
                   static_cast<double>(steps), rand_worst, cases));
    }

    {
        std::size_t fault_steps = 0, violations = 0, mode1_active = 0, mode3_active = 0;
        auto scan = [&](const Trace& tr) {
            for (const auto& r : tr.rows) {
                if (r.in_fault) {
                    ++fault_steps;
                    if (r.p_vdc != 0.0 || r.p_supp != 0.0) ++violations;
                } else {
                    mode1_active += r.p_vdc != 0.0;
                    mode3_active += r.p_supp != 0.0;
                }
            }
        };
        for (const auto& s : suites)
            for (const auto& r : s.rows)
                if (r.scenario.controller == ControllerKind::proposed) scan(r.trace);
        for (const auto& tr : extra) scan(tr);
        bool pass = violations == 0 && fault_steps > 0 && mode1_active > 0 && mode3_active > 0;
        report("AC7", pass,
               fmt("%.0f in-fault steps, %.0f with nonzero Mode-1/Mode-3 terms; %.0f/%.0f normal steps with Mode 1/Mode 3 active",
                   static_cast<double>(fault_steps), static_cast<double>(violations), static_cast<double>(mode1_active),
                   static_cast<double>(mode3_active)));
    }

    {
        const SuiteReport& sb = suite("mode1-stiffbus");
        const RowResult& on = row(sb, "Mode 1 on");
        const RowResult& off = row(sb, "Mode 1 off");
        double period = 1.0 / on.scenario.pulse_freq;
        DcRecovery r_on = dc_recovery(on.trace, on.scenario.v_dc_ref, period, 0.01, 2.0);
        DcRecovery r_off = dc_recovery(off.trace, off.scenario.v_dc_ref, period, 0.01, 2.0);
        double min_off_err = 1e9;
        for (const auto& r : off.trace.rows) min_off_err = std::min(min_off_err, std::abs(r.v_dc - off.scenario.v_dc_ref));
        bool pass = r_on.settle_time > 0.0 && r_on.settle_time <= 2.0 && min_off_err >= 0.5 * r_off.initial_error;
        report("AC8", pass,
               fmt("Mode 1 on: pulse-period mean V_dc within 1%% from %.3f s (<=2 s), worst mean error after 2 s %.4f, "
                   "instantaneous pulse ripple %.4f; Mode 1 off: min |error| %.4f vs initial %.4f (>=50%%)",
                   r_on.settle_time, r_on.worst_mean_error_after, r_on.worst_inst_error_after, min_off_err,
                   r_off.initial_error));
    }

    {
        const RowResult& p = row(suite("mode1-shaping"), "Pulsed load");
        double f = p.scenario.pulse_freq, t0 = 1.0, t1 = p.scenario.duration;
        double al = fourier_amplitude(p.trace, &TraceRecord::p_load, f, t0, t1);
        double ad = fourier_amplitude(p.trace, &TraceRecord::p_draw, f, t0, t1);
        double ab = fourier_amplitude(p.trace, &TraceRecord::p_bess, f, t0, t1);
        double db = 20.0 * std::log10(al / ad);
        bool pass = db >= 10.0 && ab >= 0.8 * al;
        report("AC9", pass,
               fmt("1 Hz bin: P_load %.4f, P_draw %.4f (%.2f dB, >=10 dB), P_bess %.4f (>=80%% of P_load)", al, ad, db, ab));
    }

    {
        const SuiteReport& t = suite("table1");
        const Trace& tmc = row(t, "GFL-MC").trace;
        const Trace& tpll = row(t, "GFL-PLL").trace;
        const Trace& tprop = row(t, "Proposed").trace;
        auto t0 = Clock::now();
        SwingProxy worst = swing_from(Scenario{});
        worst.n = 40;
        worst.h = 3;
        double d = calibrate_damping(tmc, worst, 0.5, 60.159, 0.5, 2.0);
        worst.d = d;
        auto fts = run_fault_aggregation({{"GFL-MC", &tmc}, {"GFL-PLL", &tpll}, {"Proposed", &tprop}}, worst, 0.5);
        double pk_mc = fts[0].peak(60.0), pk_prop = fts[2].peak(60.0);
        SwingProxy tmpl = swing_from(Scenario{});
        tmpl.d = d;
        auto cells = nh_sweep({{"GFL-MC", &tmc}, {"GFL-PLL", &tpll}, {"Proposed", &tprop}}, {10, 20, 40}, {3, 5, 7}, tmpl, 0.5);
        bool order = true;
        for (std::size_t k = 0; k + 2 < cells.size(); k += 3) {
            double a = std::abs(cells[k].peak_f - 60.0), b = std::abs(cells[k + 1].peak_f - 60.0),
                   c = std::abs(cells[k + 2].peak_f - 60.0);
            order = order && c < b && b < a;
        }
        double elapsed = seconds_since(t0);
        bool mc_ok = near(pk_mc, 60.159, 0.02);
        bool prop_ok = pk_prop >= 59.94 && pk_prop <= 59.98;
        report("AC10", mc_ok && prop_ok && order && elapsed < 5.0,
               fmt("N=40,H=3 calibrated D=%.3f: GFL-MC peak %.4f Hz (60.159+-0.02), proposed %.4f Hz ([59.94,59.98]), ",
                   d, pk_mc, pk_prop) +
                   (order ? "ordering holds in 9 cells" : "ordering violated") + fmt(", %.2f s (<5 s)", elapsed));
    }

    {
        HoldupBudget b = holdup_budget(50e6, 0.010, 10e3, 0.7);
        DcLinkProxy dc;
        dc.v = 1.0;
        dc.v_min = 0.7;
        dc.t_dc = 0.1;
        double t = 0.0;
        const double dt = 1e-6;
        while (!dc.at_floor && t < 1.0) {
            dc.step(0.0, 1.0, dt);
            t += dt;
        }
        double analytic = holdup_time(1.0, 0.7, 0.1, 1.0);
        bool pass = b.energy_j == 0.5e6 && near(b.capacitance_f, 0.020, 0.05 * 0.020) && near(t, analytic, 0.02 * analytic);
        report("AC11", pass,
               fmt("energy %.1f J (0.5 MJ), C %.4f mF (20 mF +-5%%), hold time %.5f s vs analytic %.5f s (+-2%%)", b.energy_j,
                   b.capacitance_f * 1e3, t, analytic));
    }

    {
        const SuiteReport& e = suite("emt-compare");
        const RowResult& av = row(e, "Averaged");
        Scenario sc = av.scenario;
        auto t0 = Clock::now();
        EmtResult emt = run_emt(sc);
        double elapsed = seconds_since(t0);
        auto cmp = compare_traces(av.trace, emt.phasor, default_comparison_windows(sc));
        double worst = 0.0;
        std::string chans;
        for (const auto& c : cmp) {
            worst = std::max({worst, c.rms_pre, c.rms_post});
            chans += " " + c.channel + fmt(" %.4f/%.4f", c.rms_pre, c.rms_post);
        }
        auto min_v = [&](const Trace& tr) {
            double m = 1e9;
            for (const auto& r : tr.rows)
                if (r.t >= sc.dip_start && r.t < sc.dip_end) m = std::min(m, r.v_mag);
            return m;
        };
        double mv_emt = min_v(emt.phasor), mv_av = min_v(av.trace);
        bool pass = !emt.raw.diverged && worst < 0.05 && mv_emt >= mv_av && elapsed < 30.0;
        report("AC12", pass,
               "RMS pre/post" + chans + fmt(" (<0.05); fault min|V| EMT %.3f >= averaged %.3f; EMT run %.2f s (<30 s)",
                                            mv_emt, mv_av, elapsed));
    }

    {
        double worst = 0.0;
        std::string which;
        for (auto k : {ControllerKind::gfl_mc, ControllerKind::gfl_pll, ControllerKind::proposed}) {
            Scenario sc = with_controller(k);
            Scenario half = sc;
            half.dt = sc.dt / 2;
            FaultMetrics a = metrics_of(sc), b = metrics_of(half);
            const std::pair<const char*, double FaultMetrics::*> fields[] = {
                {"min_v", &FaultMetrics::min_v},       {"settled_min_v", &FaultMetrics::settled_min_v},
                {"max_i", &FaultMetrics::max_i},       {"min_v_dc", &FaultMetrics::min_v_dc},
                {"unserved", &FaultMetrics::unserved_mwh}};
            for (const auto& [name, f] : fields) {
                double floor = f == &FaultMetrics::unserved_mwh ? 1e-6 : 1e-3;
                double rel = std::abs(a.*f - b.*f) / std::max(std::abs(a.*f), floor);
                if (rel > worst) {
                    worst = rel;
                    which = controller_name(k) + ":" + name;
                }
            }
        }
        bool pass = worst < 0.01 && battery_s < 120.0 && suites_ok;
        report("AC13", pass,
               fmt("dt-halving worst relative change %.4f%% (<1%%)", worst * 100.0) + " at " + which +
                   fmt("; full suite battery %.2f s (<120 s), rows ok %s", battery_s) + (suites_ok ? "yes" : "no"));
    }

    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
