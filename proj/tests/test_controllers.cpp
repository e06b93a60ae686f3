#include <doctest.h>

#include <cmath>
#include <random>

#include "mvups/controllers.hpp"

using namespace mvups;

namespace {

Observation steady_obs(Phasor v, double p_load) {
    Observation o;
    o.v_pcc = v;
    o.p_load = p_load;
    o.i = {-p_load / (1.5 * std::abs(v)), 0.0};
    o.i *= v / std::abs(v);
    return o;
}

}  // namespace

TEST_CASE("aligned basis rotations") {
    AlignedBasis id = AlignedBasis::from_voltage({1.0, 0.0}, AlignedBasis{});
    CHECK(std::abs(id.to_dq(0.3, -0.4) - Phasor{0.3, -0.4}) < 1e-15);

    AlignedBasis q = AlignedBasis::from_voltage({0.0, 1.0}, AlignedBasis{});
    Phasor x = q.to_dq(1.0, 0.0);
    CHECK(x.real() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(x.imag() == doctest::Approx(1.0));

    AlignedBasis r = AlignedBasis::from_voltage({0.6, 0.8}, AlignedBasis{});
    CHECK(std::arg(r.unit()) * 180.0 / 3.14159265358979323846 == doctest::Approx(53.1301).epsilon(1e-5));
    Phasor y{0.2, -0.7};
    CHECK(std::abs(r.to_dq(r.from_dq(y).real(), r.from_dq(y).imag()) - y) < 1e-14);

    AlignedBasis held = AlignedBasis::from_voltage({0.0, 0.0}, r);
    CHECK(held.unit() == r.unit());
}

TEST_CASE("mode 2 allocation hand evaluation") {
    Mode2Refs r = mode2_allocation(0.5, 0.2, 0.2, 2.5, 1.0, 1.0);
    CHECK(r.i_par_req == doctest::Approx(0.26667).epsilon(1e-4));
    CHECK(r.i_perp == doctest::Approx(-0.96379).epsilon(1e-4));
    CHECK(r.i_par_max == doctest::Approx(0.26667).epsilon(1e-4));
    CHECK(r.i_par == doctest::Approx(-0.26667).epsilon(1e-4));
    CHECK_FALSE(r.infeasible);

    Mode2Refs h = mode2_allocation(0.76, 0.0, 0.0, 2.5, 1.0, 1.0);
    CHECK(h.i_perp == doctest::Approx(-0.6));
    CHECK(h.i_par_max == doctest::Approx(0.8));

    Mode2Refs inf = mode2_allocation(0.1, 1.0, 0.2, 2.5, 1.0, 1.0);
    CHECK(inf.infeasible);
    CHECK(std::hypot(inf.i_par, inf.i_perp) <= 1.0 + 1e-12);
}

TEST_CASE("mode 2 headroom identity over random operating points") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> v(0.0, 1.2), p(0.0, 2.0), kv(0.0, 10.0), im(0.2, 2.0);
    for (int k = 0; k < 10000; ++k) {
        double i_max = im(rng);
        Mode2Refs r = mode2_allocation(v(rng), p(rng), p(rng) * 0.5, kv(rng), 1.0, i_max);
        CHECK(r.i_par_req * r.i_par_req + r.i_perp * r.i_perp <= i_max * i_max + 1e-12);
        CHECK(r.i_par_max * r.i_par_max + r.i_perp * r.i_perp == doctest::Approx(i_max * i_max).epsilon(1e-12));
        CHECK(std::hypot(r.i_par, r.i_perp) <= i_max + 1e-9);
    }
}

TEST_CASE("fault detector timing and hysteresis") {
    FaultDetector d{0.85, 0.90, 0.002, 0.0, false};
    const double dt = 1e-4;
    int steps = 0;
    while (!d.update(0.5, dt)) ++steps;
    CHECK((steps + 1) * dt <= 0.002 + dt + 1e-12);
    CHECK(d.update(0.88, dt));
    CHECK_FALSE(d.update(0.95, dt));

    FaultDetector b{0.85, 0.90, 0.002, 0.0, false};
    for (int k = 0; k < 10; ++k) CHECK_FALSE(b.update(0.5, dt));
    CHECK_FALSE(b.update(1.0, dt));
    for (int k = 0; k < 10; ++k) CHECK_FALSE(b.update(0.5, dt));
}

TEST_CASE("current and voltage limits") {
    CurrentLimits l{1.0, 1.6};
    CHECK(std::abs(l.limit_current({3.0, 4.0})) == doctest::Approx(1.0));
    CHECK(l.limit_current({0.3, 0.4}) == Phasor{0.3, 0.4});
    CHECK(std::abs(l.limit_voltage({3.0, 0.0}, 0.5)) == doctest::Approx(0.8));
}

TEST_CASE("proposed controller steady state") {
    Scenario sc;
    ProposedController c(sc);
    Observation o = steady_obs({1.0, 0.0}, 1.0);
    c.prime(o);
    Command cmd = c.step(o, 1e-4);
    CHECK(cmd.mode == 1);
    CHECK_FALSE(cmd.in_fault);
    CHECK(cmd.p_draw_ref == doctest::Approx(1.0));
    CHECK(cmd.i_ref.real() == doctest::Approx(-0.66667).epsilon(1e-4));
    CHECK(cmd.i_ref.imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cmd.p_bess_cmd == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("proposed controller enters mode 2 after the detection delay") {
    Scenario sc;
    ProposedController c(sc);
    Observation o = steady_obs({0.5, 0.0}, 1.0);
    c.prime(o);
    const double dt = 1e-4;
    double t = 0.0;
    Command cmd;
    do {
        cmd = c.step(o, dt);
        t += dt;
    } while (!cmd.in_fault && t < 0.1);
    CHECK(cmd.mode == 2);
    CHECK(t <= sc.t_det + dt + 1e-12);
    CHECK(cmd.i_ref.imag() == doctest::Approx(-0.96379).epsilon(1e-4));
    CHECK(cmd.p_vdc == 0.0);
    CHECK(cmd.p_supp == 0.0);
}

TEST_CASE("mode 1 stiff-bus term") {
    Scenario sc;
    sc.mode1_enable = 1;
    ProposedController c(sc);
    CHECK(c.mode1_stiffbus_term(1.0, false, 1e-4) == 0.0);
    CHECK(c.mode1_stiffbus_term(0.9, false, 1e-6) == doctest::Approx(0.2).epsilon(1e-5));
    CHECK(c.mode1_stiffbus_term(0.5, true, 1e-4) == 0.0);

    Scenario off;
    ProposedController d(off);
    CHECK(d.mode1_stiffbus_term(0.8, false, 1e-4) == 0.0);

    ProposedController w(sc);
    for (int k = 0; k < 100000; ++k) w.mode1_stiffbus_term(0.2, false, 1e-3);
    CHECK(w.xi_dc() <= sc.p_dis_max / sc.k_i_dc + 1e-15);
    CHECK(w.mode1_stiffbus_term(0.2, false, 1e-3) == doctest::Approx(sc.p_dis_max));
}

TEST_CASE("mode 3 target") {
    Scenario sc;
    sc.mode3_enable = 1;
    ProposedController c(sc);
    CHECK(c.mode3_target(0.0, 1.0) == 1.0);
    CHECK(c.mode3_target(-0.0001, 1.0) < 1.0);
    CHECK(c.mode3_target(0.5, 1.0) == doctest::Approx(1.3));
    double cap = sc.p_ffr_max_sys * sc.s_sys_mw / (sc.n_blocks * sc.p_nom_mw);
    for (double x = -0.05; x <= 0.05; x += 0.001) CHECK(std::abs(c.mode3_support(x)) <= cap + 1e-12);
}

TEST_CASE("vector current limit holds for randomized observations") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> mag(0.0, 1.4), ang(-3.14159, 3.14159), load(0.0, 2.0), soc(0.15, 1.0),
        vdc(0.6, 1.2), cur(-1.5, 1.5), freq(-0.01, 0.01);
    Scenario sc;
    sc.mode1_enable = 1;
    sc.mode3_enable = 1;
    ProposedController c(sc);
    const double dt = 1e-4;
    int cases = 0;
    for (int k = 0; k < 20000; ++k) {
        Observation o;
        double m = k % 7 == 0 ? mag(rng) * 1e-3 : mag(rng);
        o.v_pcc = std::polar(m, ang(rng));
        o.i = {cur(rng), cur(rng)};
        o.p_load = load(rng);
        o.soc = soc(rng);
        o.v_dc = vdc(rng);
        o.freq_dev = freq(rng);
        int reps = 1 + k % 40;
        for (int r = 0; r < reps; ++r) {
            Command cmd = c.step(o, dt);
            CHECK(std::abs(cmd.i_ref) <= sc.i_max + 1e-9);
            if (cmd.in_fault) {
                CHECK(cmd.p_vdc == 0.0);
                CHECK(cmd.p_supp == 0.0);
            }
            ++cases;
        }
    }
    CHECK(cases >= 10000);
}

TEST_CASE("GFL momentary cessation") {
    Scenario sc;
    sc.controller = ControllerKind::gfl_mc;
    GflMcController c(sc);
    Command blocked = c.step(steady_obs({0.5, 0.0}, 1.0), 1e-4);
    CHECK(blocked.block);
    CHECK(blocked.i_ref == Phasor{0.0, 0.0});

    Command nominal = c.step(steady_obs({1.0, 0.0}, 1.0), 1e-4);
    CHECK(nominal.i_ref.real() == doctest::Approx(-0.66667).epsilon(1e-4));

    Command sag = c.step(steady_obs({0.75, 0.0}, 1.0), 1e-4);
    CHECK(sag.i_ref.real() == doctest::Approx(-0.88889).epsilon(1e-4));
}

TEST_CASE("GFL PLL locking and LVRT allocation") {
    Scenario sc;
    sc.controller = ControllerKind::gfl_pll;
    GflPllController c(sc, 0.0);
    Command cmd = c.step(steady_obs({1.0, 0.0}, 1.0), 1e-4);
    CHECK(c.omega_dev() == 0.0);
    CHECK(c.theta() == 0.0);
    CHECK_FALSE(cmd.in_fault);

    GflPllController l(sc, 0.0);
    Command f = l.step(steady_obs({0.661, 0.0}, 1.0), 1e-4);
    CHECK(f.in_fault);
    CHECK(f.i_ref.imag() == doctest::Approx(-0.8475).epsilon(1e-4));
    CHECK(f.i_ref.real() == doctest::Approx(-0.5308).epsilon(1e-3));
    CHECK(-1.5 * 0.661 * f.i_ref.real() == doctest::Approx(0.525).epsilon(3e-3));

    GflPllController t(sc, 0.2);
    for (int k = 0; k < 20000; ++k) t.step(steady_obs({1.0, 0.0}, 1.0), 1e-4);
    CHECK(std::abs(t.theta()) < 1e-6);
}
