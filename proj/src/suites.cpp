#include "mvups/suites.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "mvups/emt.hpp"

namespace mvups {

namespace {

using Overrides = std::map<std::string, std::string>;

const Overrides kNoDip3 = {{"duration", "3"}, {"dip_start", "3"}, {"dip_end", "3"}};

Overrides pulsed(double duration) {
    std::string d = format_number(duration);
    return {{"load_kind", "pulsed"}, {"init_steady", "1"}, {"duration", d}, {"dip_start", d}, {"dip_end", d}};
}

Overrides with(Overrides a, const Overrides& b) {
    for (const auto& [k, v] : b) a[k] = v;
    return a;
}

std::vector<SuiteRow> controller_rows() {
    return {{"GFL-MC", {{"controller", "gfl_mc"}}},
            {"GFL-PLL", {{"controller", "gfl_pll"}}},
            {"Proposed", {{"controller", "proposed"}}}};
}

const std::vector<double> kSweepN = {10, 20, 40};
const std::vector<double> kSweepH = {3, 5, 7};
constexpr double kFfrDuration = 10.0;
constexpr double kFfrEventTime = 1.0;
constexpr double kShapingWindowStart = 1.0;
constexpr double kStiffbusCheck = 2.0;
constexpr double kStiffbusTol = 0.01;
constexpr double kGflMcPeakTarget = 60.159;

RowResult run_row(const SuiteRow& row, const Scenario& base) {
    RowResult r;
    r.name = row.name;
    try {
        r.scenario = apply_overrides(base, row.overrides);
        switch (row.kind) {
            case RowKind::averaged:
                r.trace = run_scenario(r.scenario);
                break;
            case RowKind::ffr: {
                FfrResult f = run_ffr_event(r.scenario, r.scenario.ffr_disturbance);
                r.trace = std::move(f.facility);
                r.freq = std::move(f.freq);
                break;
            }
            case RowKind::emt: {
                Scenario sc = r.scenario;
                sc.record_every = std::max(1.0, std::round(sc.record_every * sc.dt / 50e-6));
                EmtResult e = run_emt(sc);
                r.trace = std::move(e.phasor);
                if (e.raw.diverged) {
                    r.trace.diverged = true;
                    r.trace.error = e.raw.error;
                }
                break;
            }
        }
        if (r.trace.diverged) {
            r.error = r.trace.error;
            return r;
        }
        if (r.scenario.dip_end > r.scenario.dip_start && row.kind != RowKind::ffr) {
            r.metrics = fault_window_metrics(r.trace, r.scenario.dip_start, r.scenario.dip_end, r.scenario.p_nom_mw);
            r.has_metrics = true;
        }
        r.ok = true;
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

const RowResult* find_row(const SuiteReport& rep, const std::string& name) {
    for (const auto& r : rep.rows)
        if (r.name == name && r.ok) return &r;
    return nullptr;
}

std::vector<std::pair<std::string, FaultMetrics>> metric_rows(const SuiteReport& rep) {
    std::vector<std::pair<std::string, FaultMetrics>> out;
    for (const auto& r : rep.rows)
        if (r.ok && r.has_metrics) out.emplace_back(r.name, r.metrics);
    return out;
}

void metrics_tables(SuiteReport& rep, const std::vector<TableColumn>& cols) {
    auto rows = metric_rows(rep);
    if (rows.empty()) return;
    rep.table_text = render_table(rows, TableFormat::text, cols);
    rep.table_csv = render_table(rows, TableFormat::csv, cols);
}

void append_errors(SuiteReport& rep) {
    for (const auto& r : rep.rows)
        if (!r.ok) rep.table_text += "ERROR " + r.name + ": " + r.error + "\n";
}

void finish_shaping(SuiteReport& rep) {
    std::ostringstream txt, csv;
    csv << "row,window_start,window_end,p_load_1hz,p_draw_1hz,p_bess_1hz,attenuation_db\n";
    for (const auto& r : rep.rows) {
        if (!r.ok || r.scenario.pulsed_load) continue;
        double peak = 0.0;
        for (const auto& rec : r.trace.rows) peak = std::max(peak, std::abs(rec.p_bess));
        char line[200];
        std::snprintf(line, sizeof line, "%-18s  max|dPref/dt| %.4f p.u./s  max|Pbess| %.4f p.u.\n", r.name.c_str(),
                      max_ramp_rate(r.trace), peak);
        txt << line;
    }
    txt << "\nrow                 1Hz Pload  1Hz Pdraw  1Hz Pbess  atten dB\n";
    for (const auto& r : rep.rows) {
        if (!r.ok || !r.scenario.pulsed_load) continue;
        double t0 = kShapingWindowStart, t1 = r.scenario.duration, f = r.scenario.pulse_freq;
        double al = fourier_amplitude(r.trace, &TraceRecord::p_load, f, t0, t1);
        double ad = fourier_amplitude(r.trace, &TraceRecord::p_draw, f, t0, t1);
        double ab = fourier_amplitude(r.trace, &TraceRecord::p_bess, f, t0, t1);
        double db = 20.0 * std::log10(al / std::max(ad, 1e-12));
        char line[200];
        std::snprintf(line, sizeof line, "%-18s  %9.4f  %9.4f  %9.4f  %8.2f\n", r.name.c_str(), al, ad, ab, db);
        txt << line;
        csv << r.name << ',' << format_number(t0) << ',' << format_number(t1) << ',' << format_number(al) << ','
            << format_number(ad) << ',' << format_number(ab) << ',' << format_number(db) << '\n';
    }
    rep.table_text = txt.str();
    rep.table_csv = csv.str();
}

void finish_stiffbus(SuiteReport& rep) {
    std::ostringstream txt, csv;
    csv << "row,initial_error,final_error,settle_time_s,worst_mean_error_after_2s,worst_inst_error_after_2s\n";
    txt << "row           init err  final err  settle(s)  mean err>2s  inst err>2s\n";
    for (const auto& r : rep.rows) {
        if (!r.ok) continue;
        DcRecovery d = dc_recovery(r.trace, r.scenario.v_dc_ref, 1.0 / r.scenario.pulse_freq, kStiffbusTol, kStiffbusCheck);
        char line[200];
        std::snprintf(line, sizeof line, "%-12s  %8.4f  %9.4f  %9.3f  %11.5f  %11.5f\n", r.name.c_str(), d.initial_error,
                      d.final_error, d.settle_time, d.worst_mean_error_after, d.worst_inst_error_after);
        txt << line;
        csv << r.name << ',' << format_number(d.initial_error) << ',' << format_number(d.final_error) << ','
            << format_number(d.settle_time) << ',' << format_number(d.worst_mean_error_after) << ','
            << format_number(d.worst_inst_error_after) << '\n';
    }
    rep.table_text = txt.str();
    rep.table_csv = csv.str();
}

std::vector<NamedTrace> controller_traces(const SuiteReport& rep) {
    std::vector<NamedTrace> out;
    for (const char* name : {"GFL-MC", "GFL-PLL", "Proposed"}) {
        const RowResult* r = find_row(rep, name);
        if (r) out.push_back({name, &r->trace});
    }
    return out;
}

std::string frequency_csv(const FrequencyTrace& ft) {
    std::ostringstream os;
    os << "t,f\n";
    for (std::size_t k = 0; k < ft.t.size(); ++k) os << format_number(ft.t[k]) << ',' << format_number(ft.f[k]) << '\n';
    return os.str();
}

void finish_freq_proxy(SuiteReport& rep, const Scenario& base) {
    std::ostringstream txt, csv;
    csv << "row,n,h,d,peak_or_nadir_hz\n";
    auto traces = controller_traces(rep);
    SwingProxy sp = swing_from(base);
    char line[200];
    if (!traces.empty()) {
        auto fts = run_fault_aggregation(traces, sp, base.dip_start);
        std::snprintf(line, sizeof line, "fault aggregation (N=%g, H=%g s, D=%g)\n", sp.n, sp.h, sp.d);
        txt << line;
        for (const auto& ft : fts) {
            double pk = ft.peak(sp.f0);
            std::snprintf(line, sizeof line, "  %-10s peak %.4f Hz\n", ft.name.c_str(), pk);
            txt << line;
            csv << ft.name << ',' << format_number(sp.n) << ',' << format_number(sp.h) << ',' << format_number(sp.d) << ','
                << format_number(pk) << '\n';
            rep.files["frequency_" + row_slug(ft.name) + ".csv"] = frequency_csv(ft);
        }
    }
    txt << "frequency event (generation loss at t=" << format_number(kFfrEventTime) << " s)\n";
    for (const auto& r : rep.rows) {
        if (!r.ok || r.freq.f.empty()) continue;
        double nadir = r.scenario.f0;
        for (double f : r.freq.f) nadir = std::min(nadir, f);
        std::snprintf(line, sizeof line, "  %-16s nadir %.4f Hz\n", r.name.c_str(), nadir);
        txt << line;
        csv << r.name << ',' << format_number(r.scenario.n_blocks) << ',' << format_number(r.scenario.h) << ','
            << format_number(r.scenario.d) << ',' << format_number(nadir) << '\n';
        rep.files[row_slug(r.name) + "/frequency.csv"] = frequency_csv(r.freq);
    }
    rep.table_text = txt.str();
    rep.table_csv = csv.str();
}

void finish_nh_sweep(SuiteReport& rep, const Scenario& base) {
    auto traces = controller_traces(rep);
    if (traces.empty()) return;
    SwingProxy sp = swing_from(base);
    auto cells = nh_sweep(traces, kSweepN, kSweepH, sp, base.dip_start);
    std::ostringstream txt, csv;
    csv << "n,h,controller,peak_hz\n";
    txt << "   N     H  controller   peak (Hz)\n";
    char line[200];
    for (const auto& c : cells) {
        std::snprintf(line, sizeof line, "%4g  %4g  %-10s  %.4f\n", c.n, c.h, c.controller.c_str(), c.peak_f);
        txt << line;
        csv << format_number(c.n) << ',' << format_number(c.h) << ',' << c.controller << ',' << format_number(c.peak_f)
            << '\n';
    }
    if (const RowResult* mc = find_row(rep, "GFL-MC")) {
        SwingProxy worst = sp;
        worst.n = kSweepN.back();
        worst.h = kSweepH.front();
        double d = calibrate_damping(mc->trace, worst, base.dip_start, kGflMcPeakTarget, 0.5, 2.0);
        worst.d = d;
        double pk = run_fault_aggregation({{"GFL-MC", &mc->trace}}, worst, base.dip_start).front().peak(sp.f0);
        std::snprintf(line, sizeof line, "calibrated D for GFL-MC at N=%g, H=%g: %.4f (peak %.4f Hz, target %.3f Hz)\n",
                      worst.n, worst.h, d, pk, kGflMcPeakTarget);
        txt << line;
    }
    rep.table_text = txt.str();
    rep.table_csv = csv.str();
}

void finish_emt(SuiteReport& rep) {
    const RowResult* av = find_row(rep, "Averaged");
    const RowResult* emt = find_row(rep, "EMT");
    metrics_tables(rep, comparison_columns());
    if (!av || !emt) return;
    auto cmp = compare_traces(av->trace, emt->trace, default_comparison_windows(av->scenario));
    std::ostringstream txt, csv;
    csv << "channel,rms_pre,rms_post\n";
    txt << "\nchannel   RMS pre    RMS post\n";
    char line[200];
    for (const auto& c : cmp) {
        std::snprintf(line, sizeof line, "%-8s  %.5f   %.5f\n", c.channel.c_str(), c.rms_pre, c.rms_post);
        txt << line;
        csv << c.channel << ',' << format_number(c.rms_pre) << ',' << format_number(c.rms_post) << '\n';
    }
    rep.table_text += txt.str();
    rep.files["comparison.csv"] = csv.str();
    const std::pair<const char*, double TraceRecord::*> chans[] = {
        {"p_draw", &TraceRecord::p_draw}, {"v_mag", &TraceRecord::v_mag}, {"i_mag", &TraceRecord::i_mag}};
    for (const auto& [name, field] : chans) {
        std::ostringstream os;
        write_paired_csv(os, av->trace, emt->trace, field);
        rep.files[std::string("paired_") + name + ".csv"] = os.str();
    }
}

}  // namespace

const std::vector<std::string>& study_ids() {
    static const std::vector<std::string> ids = {"table1",        "stress",         "ablation",
                                                 "sweeps",        "mode1-shaping",  "mode1-stiffbus",
                                                 "freq-proxy",    "nh-sweep",       "emt-compare"};
    return ids;
}

std::vector<SuiteRow> study_rows(const std::string& study) {
    const Overrides prop = {{"controller", "proposed"}};
    if (study == "table1" || study == "nh-sweep") return controller_rows();
    if (study == "stress")
        return {{"Baseline", prop},
                {"Low DC energy (T_dc=0.1 s)", with(prop, {{"t_dc", "0.1"}})},
                {"Detection delay (t_det=10 ms)", with(prop, {{"t_det", "0.01"}})},
                {"Slow BESS response (tau_bess=0.10 s)", with(prop, {{"tau_bess", "0.10"}})},
                {"Low BESS power (P_dis_max=0.3)", with(prop, {{"p_dis_max", "0.3"}})},
                {"Low BESS ramp (R_bess=1.0)", with(prop, {{"r_bess", "1.0"}})},
                {"No BESS (P_dis_max=0)", with(prop, {{"p_dis_max", "0"}})}};
    if (study == "ablation")
        return {{"Baseline", prop},
                {"No Q-support (K_v=0)", with(prop, {{"k_v", "0"}})},
                {"No min draw policy (P_draw_min_fault=0)", with(prop, {{"p_draw_min_fault", "0"}})},
                {"No soft return", with(prop, {{"r_limit", "1e9"}})},
                {"No BESS", with(prop, {{"p_dis_max", "0"}})}};
    if (study == "sweeps") {
        std::vector<SuiteRow> rows;
        for (const char* scr : {"1.2", "1.5", "2.0", "3.0"})
            rows.push_back({std::string("SCR=") + scr + " (V_dip=0.5)", with(prop, {{"scr", scr}, {"v_dip", "0.5"}})});
        for (const char* vd : {"0.4", "0.5", "0.7"})
            rows.push_back({std::string("V_dip=") + vd + " (SCR=1.5)", with(prop, {{"v_dip", vd}, {"scr", "1.5"}})});
        return rows;
    }
    if (study == "mode1-shaping")
        return {{"Step load", with(prop, kNoDip3)}, {"Pulsed load", with(prop, pulsed(5.0))}};
    if (study == "mode1-stiffbus") {
        Overrides m = with(prop, with(pulsed(5.0), {{"v_dc_0", "0.85"}}));
        return {{"Mode 1 off", with(m, {{"mode1_enable", "0"}})}, {"Mode 1 on", with(m, {{"mode1_enable", "1"}})}};
    }
    if (study == "freq-proxy") {
        auto rows = controller_rows();
        Overrides ev = with(prop, {{"duration", format_number(kFfrDuration)},
                                   {"freq_event_time", format_number(kFfrEventTime)}});
        rows.push_back({"FFR Mode 3 off", with(ev, {{"mode3_enable", "0"}}), RowKind::ffr});
        rows.push_back({"FFR Mode 3 on", with(ev, {{"mode3_enable", "1"}}), RowKind::ffr});
        return rows;
    }
    if (study == "emt-compare") {
        Overrides e = with(prop, {{"duration", "8"}, {"dip_start", "6.0"}, {"dip_end", "6.15"}});
        return {{"Averaged", e, RowKind::averaged}, {"EMT", e, RowKind::emt}};
    }
    std::string ids;
    for (const auto& s : study_ids()) ids += (ids.empty() ? "" : ", ") + s;
    throw SuiteError("unknown study '" + study + "'; valid: " + ids);
}

bool SuiteReport::any_failed() const {
    for (const auto& r : rows)
        if (!r.ok) return true;
    return false;
}

SuiteReport run_study(const std::string& study, const Scenario& base, int jobs) {
    auto rows = study_rows(study);
    for (const auto& row : rows) apply_overrides(base, row.overrides);

    SuiteReport rep;
    rep.study = study;
    rep.rows.resize(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < rows.size(); k = next++) rep.rows[k] = run_row(rows[k], base);
    };
    int n = std::max(1, std::min<int>(jobs, static_cast<int>(rows.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (study == "table1") metrics_tables(rep, comparison_columns());
    else if (study == "stress") metrics_tables(rep, default_columns());
    else if (study == "ablation") metrics_tables(rep, ablation_columns());
    else if (study == "sweeps") metrics_tables(rep, sweep_columns());
    else if (study == "mode1-shaping") finish_shaping(rep);
    else if (study == "mode1-stiffbus") finish_stiffbus(rep);
    else if (study == "freq-proxy") finish_freq_proxy(rep, base);
    else if (study == "nh-sweep") finish_nh_sweep(rep, base);
    else if (study == "emt-compare") finish_emt(rep);
    append_errors(rep);
    return rep;
}

const std::vector<std::string>& channel_names() {
    static const std::vector<std::string> c = {"p_draw", "p_load", "p_bess", "p_draw_ref", "v_mag",
                                               "i_mag",  "v_dc",   "soc",    "p_vdc",      "p_supp"};
    return c;
}

std::string row_slug(const std::string& name) {
    std::string out;
    for (char ch : name) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
        else if (c == '.') out += 'p';
        else if (!out.empty() && out.back() != '_') out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

namespace {

double channel_value(const TraceRecord& r, const std::string& c) {
    if (c == "p_draw") return r.p_draw;
    if (c == "p_load") return r.p_load;
    if (c == "p_bess") return r.p_bess;
    if (c == "p_draw_ref") return r.p_draw_ref;
    if (c == "v_mag") return r.v_mag;
    if (c == "i_mag") return r.i_mag;
    if (c == "v_dc") return r.v_dc;
    if (c == "soc") return r.soc;
    if (c == "p_vdc") return r.p_vdc;
    return r.p_supp;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw SuiteError("cannot write '" + p.string() + "'");
    out << content;
}

}  // namespace

void write_report(const SuiteReport& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::path root = fs::path(out_dir) / rep.study;
    for (const auto& r : rep.rows) {
        if (r.trace.rows.empty()) continue;
        fs::path dir = root / row_slug(r.name);
        for (const auto& c : channel_names()) {
            std::ostringstream os;
            os << "t," << c << '\n';
            for (const auto& rec : r.trace.rows) os << format_number(rec.t) << ',' << format_number(channel_value(rec, c)) << '\n';
            write_file(dir / (c + ".csv"), os.str());
        }
    }
    write_file(root / "metrics.txt", rep.table_text);
    write_file(root / "metrics.csv", rep.table_csv);
    for (const auto& [rel, content] : rep.files) write_file(root / rel, content);
}

}  // namespace mvups
