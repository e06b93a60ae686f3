#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mvups/emt.hpp"

using namespace mvups;

namespace {

constexpr double kPi = 3.14159265358979323846;

AbcTrace sinusoid(double duration, double dt, double amp_before, double amp_after, double t_step) {
    AbcTrace tr;
    tr.dt = dt;
    long n = std::lround(duration / dt);
    for (long k = 0; k < n; ++k) {
        AbcSample s{};
        s.t = k * dt;
        double a = s.t < t_step ? amp_before : amp_after;
        s.v_pcc = abc_from_dq({a, 0.0}, kOmega0 * s.t);
        s.i = abc_from_dq({0.1, 0.0}, kOmega0 * s.t);
        tr.samples.push_back(s);
    }
    return tr;
}

struct EmtBaseline {
    Scenario sc;
    Trace averaged;
    EmtResult emt;
    EmtBaseline() {
        sc.duration = 8.0;
        sc.dip_start = 6.0;
        sc.dip_end = 6.15;
        averaged = run_scenario(sc);
        emt = run_emt(sc);
    }
};

const EmtBaseline& baseline() {
    static const EmtBaseline b;
    return b;
}

}  // namespace

TEST_CASE("abc/dq transforms") {
    Phasor x = dq_from_abc({1.0, -0.5, -0.5}, 0.0);
    CHECK(x.real() == doctest::Approx(1.0));
    CHECK(x.imag() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(dq_from_abc({0.0, 0.0, 0.0}, 1.3)) == 0.0);

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0), th(-10.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
        Phasor y{u(rng), u(rng)};
        double theta = th(rng);
        CHECK(std::abs(dq_from_abc(abc_from_dq(y, theta), theta) - y) < 1e-9);
        Abc a = abc_from_dq(y, theta);
        CHECK(std::abs(a[0] + a[1] + a[2]) < 1e-12);
    }
}

TEST_CASE("phasor extraction of a pure sinusoid") {
    const double dt = 50e-6;
    AbcTrace tr = sinusoid(0.2, dt, 0.5, 0.5, 1.0);
    std::vector<double> neg;
    Trace ph = phasor_postprocess(tr, 60.0, &neg);
    REQUIRE_FALSE(ph.rows.empty());
    CHECK(ph.rows.front().t >= 1.0 / 60.0 - 2 * dt);
    for (std::size_t k = 0; k < ph.rows.size(); ++k) {
        CHECK(ph.rows[k].v_mag == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(neg[k] < 1e-9);
    }
}

TEST_CASE("phasor extraction settles within one cycle of an amplitude step") {
    const double dt = 50e-6;
    AbcTrace tr = sinusoid(0.3, dt, 1.0, 0.5, 0.15);
    Trace ph = phasor_postprocess(tr, 60.0);
    for (const auto& r : ph.rows) {
        if (r.t < 0.15 - dt / 2) CHECK(r.v_mag == doctest::Approx(1.0).epsilon(1e-9));
        if (r.t > 0.15 + 1.0 / 60.0) CHECK(r.v_mag == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("averaged and abc models agree before the fault and after recovery") {
    const auto& b = baseline();
    REQUIRE_FALSE(b.emt.raw.diverged);
    auto cmp = compare_traces(b.averaged, b.emt.phasor, default_comparison_windows(b.sc));
    REQUIRE(cmp.size() == 3);
    for (const auto& c : cmp) {
        CHECK(c.rms_pre < 0.05);
        CHECK(c.rms_post < 0.05);
    }
}

TEST_CASE("abc model is not more pessimistic than the averaged model in the fault") {
    const auto& b = baseline();
    auto min_v = [&](const Trace& tr) {
        double m = 1e9;
        for (const auto& r : tr.rows)
            if (r.t >= b.sc.dip_start && r.t < b.sc.dip_end) m = std::min(m, r.v_mag);
        return m;
    };
    CHECK(min_v(b.emt.phasor) >= min_v(b.averaged));
}

TEST_CASE("balanced three-wire operation") {
    const auto& b = baseline();
    CHECK(b.emt.max_current_sum < 1e-9);
    REQUIRE(b.emt.neg_seq.size() == b.emt.phasor.rows.size());
    for (std::size_t k = 0; k < b.emt.phasor.rows.size(); ++k) {
        double t = b.emt.phasor.rows[k].t;
        bool steady = (t >= 5.5 && t < 6.0) || t >= 7.0;
        if (steady) CHECK(b.emt.neg_seq[k] < 1e-6);
    }
}

TEST_CASE("paired CSV lines up samples by time") {
    const auto& b = baseline();
    std::ostringstream os;
    write_paired_csv(os, b.averaged, b.emt.phasor, &TraceRecord::v_mag);
    std::string s = os.str();
    CHECK(s.rfind("t,averaged,emt\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : s) lines += c == '\n';
    CHECK(lines > 70000);
}
