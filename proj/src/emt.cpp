#include "mvups/emt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <ostream>

namespace mvups {

namespace {

constexpr double kTwoPiThird = 2.0 * 3.14159265358979323846 / 3.0;

const Phasor kA = std::polar(1.0, kTwoPiThird);

}  // namespace

Abc abc_from_dq(Phasor x, double theta) {
    Abc out;
    for (int k = 0; k < 3; ++k) {
        double th = theta - k * kTwoPiThird;
        out[k] = x.real() * std::cos(th) - x.imag() * std::sin(th);
    }
    return out;
}

Phasor dq_from_abc(const Abc& x, double theta) {
    double d = 0.0, q = 0.0;
    for (int k = 0; k < 3; ++k) {
        double th = theta - k * kTwoPiThird;
        d += x[k] * std::cos(th);
        q -= x[k] * std::sin(th);
    }
    return {2.0 / 3.0 * d, 2.0 / 3.0 * q};
}

AbcTrace run_emt_raw(const Scenario& sc, double dt) {
    validate(sc);
    AbcTrace out;
    out.dt = dt;

    TheveninGrid grid = thevenin_from_scr(sc.scr, sc.xr);
    Phasor vth_nom = nominal_source(sc, grid);
    Phasor vth_dip = vth_nom * (sc.v_dip / std::abs(vth_nom));
    double r_g = grid.z.real();
    double l_g = grid.z.imag() / kOmega0;
    double r_tot = r_g + sc.r_f;
    double l_tot = l_g + sc.x_f / kOmega0;
    double a = r_tot * dt / (2.0 * l_tot);

    DcLinkProxy dc;
    dc.v = sc.v_dc_0;
    dc.t_dc = sc.t_dc;
    dc.v_min = sc.v_dc_min;
    BessModel bess;
    bess.path.tau = sc.tau_bess;
    bess.path.rate = sc.r_bess;
    bess.soc = sc.soc_0;
    bess.soc_min = sc.soc_min;
    bess.soc_max = sc.soc_max;
    bess.p_dis_max = sc.p_dis_max;
    bess.p_chg_max = sc.p_chg_max;
    bess.t_autonomy = sc.t_autonomy;
    bool uses_bess = sc.controller == ControllerKind::proposed;
    LoadProfile load = load_profile(sc);
    Controller ctl = make_controller(sc);

    auto vth_abc = [&](double t) { return abc_from_dq(in_dip(sc, t) ? vth_dip : vth_nom, kOmega0 * t); };

    Abc i{0.0, 0.0, 0.0};
    Abc v_inv_prev = vth_abc(0.0);
    long n = std::lround(sc.duration / dt);
    out.samples.reserve(static_cast<std::size_t>(n));

    for (long k = 0; k < n; ++k) {
        double t = k * dt;
        double theta = kOmega0 * t;
        Abc vth = vth_abc(t);
        Abc v_pcc;
        for (int p = 0; p < 3; ++p) {
            double didt = (v_inv_prev[p] - vth[p] - r_tot * i[p]) / l_tot;
            v_pcc[p] = vth[p] + r_g * i[p] + l_g * didt;
        }

        Observation obs;
        obs.t = t;
        obs.v_pcc = dq_from_abc(v_pcc, theta);
        obs.i = dq_from_abc(i, theta);
        obs.v_dc = dc.v;
        obs.p_load = load_at(load, t);
        obs.soc = bess.soc;
        obs.freq_dev = exogenous_freq_dev(sc, t);
        Command cmd = controller_step(ctl, obs, dt);

        double p_grid = v_pcc[0] * i[0] + v_pcc[1] * i[1] + v_pcc[2] * i[2];
        double p_bess = bess.power();

        AbcSample s;
        s.t = t;
        s.v_pcc = v_pcc;
        s.i = i;
        TraceRecord& rec = s.ctl;
        rec = TraceRecord{};
        rec.t = t;
        rec.p_grid = p_grid;
        rec.p_draw = -p_grid;
        rec.p_load = obs.p_load;
        rec.p_bess = p_bess;
        rec.soc = bess.soc;
        rec.v_mag = std::abs(obs.v_pcc);
        rec.v_d = obs.v_pcc.real();
        rec.v_q = obs.v_pcc.imag();
        rec.i_d = obs.i.real();
        rec.i_q = obs.i.imag();
        rec.i_mag = std::abs(obs.i);
        rec.v_dc = dc.v;
        rec.p_draw_ref = cmd.p_draw_ref;
        rec.i_ref_d = cmd.i_ref.real();
        rec.i_ref_q = cmd.i_ref.imag();
        rec.p_vdc = cmd.p_vdc;
        rec.p_supp = cmd.p_supp;
        rec.mode = cmd.mode;
        rec.in_fault = cmd.in_fault;
        rec.flags = (cmd.cessation ? kFlagCessation : 0u) | (cmd.voltage_floor ? kFlagVoltageFloor : 0u) |
                    (cmd.infeasible ? kFlagInfeasible : 0u) | (cmd.pll_diverged ? kFlagPllDiverged : 0u) |
                    (dc.at_floor || dc.v <= 0.0 ? kFlagBusCollapse : 0u);
        out.samples.push_back(s);

        Abc vth_next = vth_abc(t + dt);
        if (cmd.block) {
            i = {0.0, 0.0, 0.0};
            v_inv_prev = vth_next;
        } else {
            Abc v_inv = abc_from_dq(cmd.v_inv, theta + 0.5 * kOmega0 * dt);
            for (int p = 0; p < 3; ++p) {
                double u = 2.0 * v_inv[p] - vth[p] - vth_next[p];
                i[p] = ((1.0 - a) * i[p] + dt / (2.0 * l_tot) * u) / (1.0 + a);
            }
            v_inv_prev = v_inv;
        }
        dc.step(-p_grid + p_bess, obs.p_load, dt);
        if (uses_bess) bess.step(cmd.p_bess_cmd, dt);

        double im = std::max({std::abs(i[0]), std::abs(i[1]), std::abs(i[2])});
        if (!std::isfinite(im) || im > kDivergenceCurrent) {
            out.diverged = true;
            out.error = "EMT simulation diverged: |i| exceeded limit";
            break;
        }
    }
    return out;
}

Trace phasor_postprocess(const AbcTrace& raw, double f0, std::vector<double>* neg_seq) {
    Trace out;
    out.dt = raw.dt;
    out.diverged = raw.diverged;
    out.error = raw.error;
    const auto& s = raw.samples;
    std::size_t win = static_cast<std::size_t>(std::max(1L, std::lround(1.0 / (f0 * raw.dt))));
    if (s.size() < win) return out;

    // Per-phase least-squares fit of A cos(wt) + B sin(wt) over a sliding one-cycle window.
    double w0 = 2.0 * 3.14159265358979323846 * f0;
    std::size_t n = s.size();
    std::vector<double> scc(n + 1), sss(n + 1), scs(n + 1);
    std::vector<std::array<double, 12>> sx(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
        double c = std::cos(w0 * s[k].t), sn = std::sin(w0 * s[k].t);
        scc[k + 1] = scc[k] + c * c;
        sss[k + 1] = sss[k] + sn * sn;
        scs[k + 1] = scs[k] + c * sn;
        for (int p = 0; p < 3; ++p) {
            sx[k + 1][2 * p] = sx[k][2 * p] + s[k].v_pcc[p] * c;
            sx[k + 1][2 * p + 1] = sx[k][2 * p + 1] + s[k].v_pcc[p] * sn;
            sx[k + 1][6 + 2 * p] = sx[k][6 + 2 * p] + s[k].i[p] * c;
            sx[k + 1][6 + 2 * p + 1] = sx[k][6 + 2 * p + 1] + s[k].i[p] * sn;
        }
    }
    if (neg_seq) neg_seq->clear();
    out.rows.reserve(n - win + 1);
    for (std::size_t k = win - 1; k < n; ++k) {
        std::size_t k0 = k + 1 - win;
        double gcc = scc[k + 1] - scc[k0], gss = sss[k + 1] - sss[k0], gcs = scs[k + 1] - scs[k0];
        double det = gcc * gss - gcs * gcs;
        Phasor ph[6];
        for (int m = 0; m < 6; ++m) {
            double xc = sx[k + 1][2 * m] - sx[k0][2 * m];
            double xs = sx[k + 1][2 * m + 1] - sx[k0][2 * m + 1];
            double a = (gss * xc - gcs * xs) / det;
            double b = (gcc * xs - gcs * xc) / det;
            ph[m] = {a, -b};
        }
        Phasor v = (ph[0] + kA * ph[1] + kA * kA * ph[2]) / 3.0;
        Phasor i = (ph[3] + kA * ph[4] + kA * kA * ph[5]) / 3.0;
        Phasor vn = (ph[0] + kA * kA * ph[1] + kA * ph[2]) / 3.0;
        if (neg_seq) neg_seq->push_back(std::abs(vn));
        TraceRecord r = s[k].ctl;
        r.t = s[k].t;
        r.v_d = v.real();
        r.v_q = v.imag();
        r.v_mag = std::abs(v);
        r.i_d = i.real();
        r.i_q = i.imag();
        r.i_mag = std::abs(i);
        r.p_grid = 1.5 * (v * std::conj(i)).real();
        r.p_draw = -r.p_grid;
        out.rows.push_back(r);
    }
    return out;
}

EmtResult run_emt(const Scenario& sc, double dt) {
    EmtResult res;
    res.raw = run_emt_raw(sc, dt);
    res.phasor = phasor_postprocess(res.raw, sc.f0, &res.neg_seq);
    for (const auto& s : res.raw.samples)
        res.max_current_sum = std::max(res.max_current_sum, std::abs(s.i[0] + s.i[1] + s.i[2]));
    long every = std::max(1L, std::lround(sc.record_every));
    if (every > 1) {
        std::vector<TraceRecord> dec;
        std::vector<double> neg;
        for (std::size_t k = 0; k < res.phasor.rows.size(); ++k) {
            if (std::lround(res.phasor.rows[k].t / dt) % every != 0) continue;
            dec.push_back(res.phasor.rows[k]);
            neg.push_back(res.neg_seq[k]);
        }
        res.phasor.rows = std::move(dec);
        res.neg_seq = std::move(neg);
    }
    return res;
}

ComparisonWindows default_comparison_windows(const Scenario& sc) {
    double settle = sc.dip_end - sc.dip_start + 0.5;
    return {sc.load_step_time + 0.1, sc.dip_start, std::min(sc.duration, sc.dip_end + settle), sc.duration};
}

namespace {

const TraceRecord* row_at(const Trace& tr, double t) {
    auto it = std::lower_bound(tr.rows.begin(), tr.rows.end(), t - 1e-9,
                               [](const TraceRecord& r, double v) { return r.t < v; });
    if (it == tr.rows.end()) return nullptr;
    if (std::abs(it->t - t) > 1e-6) return nullptr;
    return &*it;
}

double window_rms(const Trace& a, const Trace& b, double TraceRecord::*ch, double t0, double t1) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& r : a.rows) {
        if (r.t < t0 || r.t >= t1) continue;
        const TraceRecord* q = row_at(b, r.t);
        if (!q) continue;
        double d = r.*ch - q->*ch;
        s += d * d;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("compare_traces: no common samples in window");
    return std::sqrt(s / static_cast<double>(n));
}

}  // namespace

std::vector<ChannelComparison> compare_traces(const Trace& averaged, const Trace& emt, const ComparisonWindows& w) {
    struct Ch {
        const char* name;
        double TraceRecord::*field;
    };
    const Ch chans[] = {{"p_draw", &TraceRecord::p_draw}, {"v_mag", &TraceRecord::v_mag}, {"i_mag", &TraceRecord::i_mag}};
    std::vector<ChannelComparison> out;
    for (const auto& c : chans) {
        out.push_back({c.name, window_rms(averaged, emt, c.field, w.pre_start, w.pre_end),
                       window_rms(averaged, emt, c.field, w.post_start, w.post_end)});
    }
    return out;
}

void write_paired_csv(std::ostream& os, const Trace& averaged, const Trace& emt, double TraceRecord::*channel) {
    os << "t,averaged,emt\n";
    for (const auto& r : averaged.rows) {
        const TraceRecord* q = row_at(emt, r.t);
        if (!q) continue;
        os << format_number(r.t) << ',' << format_number(r.*channel) << ',' << format_number(q->*channel) << '\n';
    }
}

}  // namespace mvups
