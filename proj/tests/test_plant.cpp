#include <doctest.h>

#include <cmath>
#include <random>

#include "mvups/plant.hpp"

using namespace mvups;

TEST_CASE("Thevenin impedance from SCR") {
    TheveninGrid g = thevenin_from_scr(1.5, 5.0);
    CHECK(std::abs(g.z) == doctest::Approx(0.6667).epsilon(1e-4));
    CHECK(g.z.real() == doctest::Approx(0.1307).epsilon(1e-3));
    CHECK(g.z.imag() == doctest::Approx(0.6535).epsilon(1e-3));

    TheveninGrid s = thevenin_from_scr(3.0, 5.0);
    CHECK(std::abs(s.z) == doctest::Approx(0.3333).epsilon(1e-3));

    TheveninGrid r = thevenin_from_scr(1.0, 1e12);
    CHECK(r.z.real() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.z.imag() == doctest::Approx(1.0));
}

TEST_CASE("PCC voltage") {
    TheveninGrid g;
    g.vth = {1.0, 0.0};
    g.z = {0.0, 0.6535};
    CHECK(g.pcc_voltage({0.0, 0.0}) == g.vth);
    Phasor v = g.pcc_voltage({0.0, -0.5});
    CHECK(v.real() == doctest::Approx(1.32675));
    CHECK(v.imag() == doctest::Approx(0.0));

    g.z = {0.1307, 0.6535};
    Phasor w = g.pcc_voltage({-0.5, 0.0});
    CHECK(w.real() == doctest::Approx(0.93465));
    CHECK(w.imag() == doctest::Approx(-0.32675));
}

TEST_CASE("PCC voltage is affine in the current") {
    TheveninGrid g = thevenin_from_scr(1.5, 5.0);
    g.vth = {1.1, 0.3};
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 1000; ++k) {
        Phasor i1{u(rng), u(rng)}, i2{u(rng), u(rng)};
        double a = u(rng), b = u(rng);
        Phasor lhs = g.pcc_voltage(a * i1 + b * i2) - g.vth;
        Phasor rhs = a * (g.pcc_voltage(i1) - g.vth) + b * (g.pcc_voltage(i2) - g.vth);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("source sizing places the PCC at the rated point") {
    TheveninGrid g = thevenin_from_scr(1.5, 5.0);
    g.vth = thevenin_source_for(g, {1.0, 0.0}, 1.0);
    Phasor i = unity_pf_draw_current(g, 1.0);
    Phasor v = g.pcc_voltage(i);
    CHECK(std::abs(v - Phasor{1.0, 0.0}) < 1e-9);
    CHECK(1.5 * (v * std::conj(i)).real() == doctest::Approx(-1.0));
}

TEST_CASE("RL filter") {
    RlFilter f;
    for (int k = 0; k < 100; ++k) f.step({1.0, 0.0}, {1.0, 0.0}, 1e-4);
    CHECK(std::abs(f.i) == 0.0);

    RlFilter g;
    for (int k = 0; k < 400000; ++k) g.step({0.15, 0.0}, {0.0, 0.0}, 1e-5);
    CHECK(std::abs(g.i) == doctest::Approx(0.15 / std::abs(Phasor{0.005, 0.15})).epsilon(1e-3));
    Phasor residual = Phasor{0.15, 0.0} - Phasor{0.005, 0.15} * g.i;
    CHECK(std::abs(residual) < 1e-3);
}

TEST_CASE("DC link proxy") {
    DcLinkProxy dc;
    dc.v = 0.93;
    for (int k = 0; k < 10000; ++k) dc.step(0.8, 0.8, 1e-4);
    CHECK(dc.v == 0.93);

    DcLinkProxy d;
    d.t_dc = 0.1;
    d.v_min = 0.7;
    double t = 0.0;
    const double dt = 1e-5;
    while (!d.at_floor && t < 1.0) {
        d.step(0.0, 1.0, dt);
        t += dt;
    }
    CHECK(t == doctest::Approx(0.0255).epsilon(1e-3));
    CHECK(holdup_time(1.0, 0.7, 0.1, 1.0) == doctest::Approx(0.0255));
}

TEST_CASE("BESS model") {
    BessModel b;
    for (int k = 0; k < 3000; ++k) b.step(0.8, 1e-4);
    CHECK(b.power() == doctest::Approx(0.8).epsilon(1e-4));

    BessModel s;
    s.soc = s.soc_min;
    CHECK(s.gate(0.5) <= 0.0);
    CHECK(s.gate(-0.2) == doctest::Approx(-0.2));

    BessModel h;
    h.path.state = 0.8;
    double soc0 = h.soc;
    for (int k = 0; k < 1500; ++k) h.step(0.8, 1e-4);
    CHECK(h.soc - soc0 == doctest::Approx(-0.0004).epsilon(1e-6));
}

TEST_CASE("SoC bookkeeping matches the integrated power") {
    BessModel b;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> cmd(-0.3, 1.0);
    const double dt = 1e-4;
    double integral = 0.0;
    double soc0 = b.soc;
    double c = 0.0;
    for (int k = 0; k < 20000; ++k) {
        if (k % 500 == 0) c = cmd(rng);
        b.step(c, dt);
        integral += b.power() * dt;
    }
    double expected = -integral / b.t_autonomy;
    CHECK(std::abs((b.soc - soc0) - expected) <= 1e-6 * std::abs(expected));
}

TEST_CASE("load profile") {
    LoadProfile step;
    CHECK(load_at(step, 0.05) == 0.0);
    CHECK(load_at(step, 0.2) == 1.0);

    LoadProfile p;
    p.kind = LoadKind::pulsed;
    p.step_time = 0.0;
    p.window_start = 2.0;
    CHECK(load_at(p, 2.25) == doctest::Approx(1.25));
    CHECK(load_at(p, 2.75) == doctest::Approx(0.75));
    CHECK(load_at(p, 1.5) == doctest::Approx(1.0));

    LoadProfile big = p;
    big.amplitude = 3.0;
    for (double t = 0.0; t < 5.0; t += 0.01) CHECK(load_at(big, t) >= 0.0);
}

TEST_CASE("hold-up budget") {
    HoldupBudget b = holdup_budget(50e6, 0.010, 10e3, 0.7);
    CHECK(b.energy_j == doctest::Approx(0.5e6).epsilon(1e-12));
    CHECK(b.capacitance_f == doctest::Approx(0.0196).epsilon(1e-3));

    HoldupBudget z = holdup_budget(50e6, 0.0, 10e3, 0.7);
    CHECK(z.energy_j == 0.0);
    CHECK(z.capacitance_f == 0.0);

    HoldupBudget d = holdup_budget(50e6, 0.020, 10e3, 0.7);
    CHECK(d.energy_j == doctest::Approx(1.0e6));
    CHECK(d.capacitance_f == doctest::Approx(0.0392).epsilon(1e-3));

    CHECK_THROWS(holdup_budget(50e6, 0.01, 10e3, 1.2));
    CHECK_THROWS(holdup_budget(-1.0, 0.01, 10e3, 0.7));
}
