#include <doctest.h>

#include <cmath>

#include "mvups/frequency.hpp"

using namespace mvups;

namespace {

Trace constant_draw(double duration, double dt, double level, double drop_start, double drop_end, double drop_level) {
    Trace tr;
    tr.dt = dt;
    long n = std::lround(duration / dt);
    for (long k = 0; k < n; ++k) {
        TraceRecord r{};
        r.t = k * dt;
        r.p_draw = (r.t >= drop_start && r.t < drop_end) ? drop_level : level;
        tr.rows.push_back(r);
    }
    return tr;
}

struct Baselines {
    Trace mc, pll, prop;
    Baselines() {
        Scenario sc;
        sc.controller = ControllerKind::gfl_mc;
        mc = run_scenario(sc);
        sc.controller = ControllerKind::gfl_pll;
        pll = run_scenario(sc);
        sc.controller = ControllerKind::proposed;
        prop = run_scenario(sc);
    }
};

const Baselines& baselines() {
    static const Baselines b;
    return b;
}

}  // namespace

TEST_CASE("swing equilibrium") {
    SwingProxy sp;
    sp.p_m = 0.3;
    for (int k = 0; k < 100000; ++k) swing_step(sp, 0.3, 1e-3);
    CHECK(sp.x == 0.0);
    CHECK(sp.frequency() == 60.0);
    SwingProxy bad;
    bad.h = 0.0;
    CHECK_THROWS(swing_step(bad, 0.0, 1e-3));
}

TEST_CASE("undamped slope and damped settling") {
    SwingProxy sp;
    sp.d = 0.0;
    sp.h = 4.0;
    sp.p_m = 0.01;
    for (int k = 0; k < 1000; ++k) swing_step(sp, 0.0, 1e-3);
    CHECK(sp.x == doctest::Approx(0.01 / (2 * 4.0) * 1.0).epsilon(1e-9));

    SwingProxy dp;
    dp.d = 1.5;
    dp.h = 3.0;
    dp.p_m = 0.01;
    const double dt = 1e-4;
    double t = 0.0;
    for (int k = 0; k < 100000; ++k) {
        swing_step(dp, 0.0, dt);
        t += dt;
    }
    double expect = 0.01 / 1.5 * (1.0 - std::exp(-1.5 * t / (2.0 * 3.0)));
    CHECK(dp.x == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("fault aggregation on recorded traces") {
    const auto& b = baselines();
    SwingProxy sp;
    auto fts = run_fault_aggregation({{"GFL-MC", &b.mc}, {"GFL-PLL", &b.pll}, {"Proposed", &b.prop}}, sp, 0.5);
    REQUIRE(fts.size() == 3);
    double dmc = std::abs(fts[0].peak(60.0) - 60.0);
    double dpll = std::abs(fts[1].peak(60.0) - 60.0);
    double dprop = std::abs(fts[2].peak(60.0) - 60.0);
    CHECK(dprop < dpll);
    CHECK(dpll < dmc);
    CHECK(fts[0].peak(60.0) > 60.0);

    SwingProxy none = sp;
    none.n = 0;
    auto flat = run_fault_aggregation({{"GFL-MC", &b.mc}}, none, 0.5);
    for (double f : flat.front().f) CHECK(f == 60.0);

    Trace shorter = constant_draw(0.5, 1e-4, 1.0, 0, 0, 0);
    CHECK_THROWS(run_fault_aggregation({{"a", &b.mc}, {"b", &shorter}}, sp, 0.2));
}

TEST_CASE("aggregate response scales with N and N/H") {
    Trace tr = constant_draw(1.0, 1e-4, 1.0, 0.5, 0.65, 0.0);
    SwingProxy sp;
    sp.d = 1.0;
    double d20 = run_fault_aggregation({{"x", &tr}}, sp, 0.5).front().peak(60.0) - 60.0;
    sp.n = 40;
    double d40 = run_fault_aggregation({{"x", &tr}}, sp, 0.5).front().peak(60.0) - 60.0;
    CHECK(d40 == doctest::Approx(2.0 * d20).epsilon(1e-3));

    SwingProxy a;
    a.d = 0.0;
    a.n = 20;
    a.h = 5;
    SwingProxy b2 = a;
    b2.n = 40;
    b2.h = 10;
    double pa = run_fault_aggregation({{"x", &tr}}, a, 0.5).front().peak(60.0);
    double pb = run_fault_aggregation({{"x", &tr}}, b2, 0.5).front().peak(60.0);
    CHECK(pa == doctest::Approx(pb).epsilon(1e-12));
}

TEST_CASE("N/H sweep keeps the controller ordering in every cell") {
    const auto& b = baselines();
    SwingProxy sp;
    auto cells = nh_sweep({{"GFL-MC", &b.mc}, {"GFL-PLL", &b.pll}, {"Proposed", &b.prop}}, {10, 20, 40}, {3, 5, 7}, sp, 0.5);
    REQUIRE(cells.size() == 27);
    for (std::size_t k = 0; k < cells.size(); k += 3) {
        double mc = std::abs(cells[k].peak_f - 60.0);
        double pll = std::abs(cells[k + 1].peak_f - 60.0);
        double prop = std::abs(cells[k + 2].peak_f - 60.0);
        CHECK(prop < pll);
        CHECK(pll < mc);
    }
    CHECK_THROWS(nh_sweep({{"GFL-MC", &b.mc}}, {}, {3}, sp, 0.5));
}

TEST_CASE("damping calibration stays in its bracket") {
    const auto& b = baselines();
    SwingProxy sp;
    sp.n = 40;
    sp.h = 3;
    double d = calibrate_damping(b.mc, sp, 0.5, 60.05, 0.5, 2.0);
    CHECK(d >= 0.5);
    CHECK(d <= 2.0);
}

TEST_CASE("closed-loop frequency event") {
    Scenario sc;
    sc.duration = 4.0;
    sc.freq_event_time = 1.0;
    FfrResult zero = run_ffr_event(sc, 0.0);
    for (std::size_t k = 0; k < zero.facility.rows.size(); ++k) {
        CHECK(zero.freq.f[k] == 60.0);
        CHECK(zero.facility.rows[k].p_draw == doctest::Approx(zero.facility.rows[k].p_load).epsilon(1e-6));
    }

    FfrResult off = run_ffr_event(sc, sc.ffr_disturbance);
    Scenario on_sc = sc;
    on_sc.mode3_enable = 1;
    FfrResult on = run_ffr_event(on_sc, sc.ffr_disturbance);
    CHECK(on.nadir > off.nadir);
    CHECK(off.nadir < 60.0);
    double min_draw = 1e9;
    for (const auto& r : on.facility.rows) min_draw = std::min(min_draw, r.p_draw - r.p_load);
    CHECK(min_draw < 0.0);
    double cap = sc.p_ffr_max_sys * sc.s_sys_mw / (sc.n_blocks * sc.p_nom_mw);
    CHECK(on.max_support <= cap + 1e-12);
    for (const auto& r : on.facility.rows) {
        CHECK(r.p_draw_ref >= 0.0);
        CHECK(r.p_draw_ref <= r.p_load + sc.p_chg_max + 1e-12);
    }
}
