#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "mvups/config.hpp"
#include "mvups/emt.hpp"
#include "mvups/metrics.hpp"
#include "mvups/suites.hpp"

namespace {

using namespace mvups;

constexpr int kExitRowFailure = 1;
constexpr int kExitConfig = 2;

struct CommonOpts {
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    std::string controller;
};

void add_common(CLI::App* app, CommonOpts& o) {
    app->add_option("--config", o.config, "INI scenario file");
    app->add_option("--out", o.out, "output root (default: $MVUPS_OUT_DIR or ./out)");
    app->add_option("--override", o.overrides, "parameter override key=value (repeatable)");
    app->add_option("--controller", o.controller, "proposed | gfl_mc | gfl_pll");
}

std::string out_root(const CommonOpts& o) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("MVUPS_OUT_DIR"); env && *env) return env;
    return "out";
}

Scenario build_scenario(const CommonOpts& o) {
    Scenario sc = o.config.empty() ? Scenario{} : load_config_file(o.config);
    std::map<std::string, std::string> ov;
    if (!o.controller.empty()) ov["controller"] = o.controller;
    for (const auto& kv : o.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not key=value");
        ov[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return apply_overrides(sc, ov);
}

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary | std::ios::trunc) << s;
}

int cmd_run(const CommonOpts& o) {
    Scenario sc = build_scenario(o);
    Trace tr = run_scenario(sc);
    std::filesystem::path dir = std::filesystem::path(out_root(o)) / "run" / controller_name(sc.controller);
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "trace.csv", std::ios::binary | std::ios::trunc);
        write_trace_csv(os, tr);
    }
    write_text(dir / "scenario.ini", serialize_config(sc));
    if (tr.diverged) {
        std::cerr << "run diverged: " << tr.error << '\n';
        return kExitRowFailure;
    }
    if (sc.dip_end > sc.dip_start) {
        FaultMetrics m = fault_window_metrics(tr, sc.dip_start, sc.dip_end, sc.p_nom_mw);
        std::string table = render_table({{controller_name(sc.controller), m}}, TableFormat::text, comparison_columns());
        write_text(dir / "metrics.txt", table);
        write_text(dir / "metrics.csv",
                   render_table({{controller_name(sc.controller), m}}, TableFormat::csv, comparison_columns()));
        std::cout << table;
    }
    std::cout << "trace written to " << (dir / "trace.csv").string() << '\n';
    return 0;
}

int cmd_suite(const CommonOpts& o, const std::string& study, int jobs) {
    Scenario sc = build_scenario(o);
    SuiteReport rep = run_study(study, sc, jobs);
    write_report(rep, out_root(o));
    std::cout << rep.table_text;
    std::cout << "outputs in " << (std::filesystem::path(out_root(o)) / study).string() << '\n';
    return rep.any_failed() ? kExitRowFailure : 0;
}

int cmd_list() {
    std::printf("%-18s %-11s %-12s %-22s %s\n", "key", "section", "default", "range", "description");
    Scenario def;
    std::printf("%-18s %-11s %-12s %-22s %s\n", "controller", "", controller_name(def.controller).c_str(),
                "proposed|gfl_mc|gfl_pll", "control law");
    std::printf("%-18s %-11s %-12s %-22s %s\n", "load_kind", "scenario", "step", "step|pulsed", "IT load profile");
    for (const auto& p : parameter_registry()) {
        std::string range = std::string(p.lo_open ? "(" : "[") + format_number(p.lo) + ", " + format_number(p.hi) + "]";
        std::printf("%-18s %-11s %-12s %-22s %s\n", p.key.c_str(), p.section.c_str(), format_number(def.*(p.member)).c_str(),
                    range.c_str(), p.doc.c_str());
    }
    std::printf("\nstudies:");
    for (const auto& s : study_ids()) std::printf(" %s", s.c_str());
    std::printf("\n");
    return 0;
}

int cmd_compare(const CommonOpts& o) {
    Scenario sc = build_scenario(o);
    Trace av = run_scenario(sc);
    EmtResult emt = run_emt(sc);
    if (av.diverged || emt.raw.diverged) {
        std::cerr << "compare: a model diverged\n";
        return kExitRowFailure;
    }
    auto cmp = compare_traces(av, emt.phasor, default_comparison_windows(sc));
    std::filesystem::path dir = std::filesystem::path(out_root(o)) / "compare";
    std::printf("channel   RMS pre    RMS post\n");
    for (const auto& c : cmp) std::printf("%-8s  %.5f   %.5f\n", c.channel.c_str(), c.rms_pre, c.rms_post);
    const std::pair<const char*, double TraceRecord::*> chans[] = {
        {"p_draw", &TraceRecord::p_draw}, {"v_mag", &TraceRecord::v_mag}, {"i_mag", &TraceRecord::i_mag}};
    std::filesystem::create_directories(dir);
    for (const auto& [name, field] : chans) {
        std::ofstream os(dir / (std::string("paired_") + name + ".csv"), std::ios::binary | std::ios::trunc);
        write_paired_csv(os, av, emt.phasor, field);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Medium-voltage UPS control simulation and study runner"};
    app.require_subcommand(1);

    CommonOpts run_o, suite_o, cmp_o;
    auto* run = app.add_subcommand("run", "simulate one scenario");
    add_common(run, run_o);

    auto* suite = app.add_subcommand("suite", "run a named study");
    std::string study;
    int jobs = 1;
    suite->add_option("study", study, "study id")->required();
    suite->add_option("--jobs", jobs, "concurrent rows")->check(CLI::PositiveNumber);
    add_common(suite, suite_o);

    auto* list = app.add_subcommand("list", "print the parameter registry and study ids");

    auto* compare = app.add_subcommand("compare", "averaged model against the abc model");
    add_common(compare, cmp_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_o);
        if (*suite) return cmd_suite(suite_o, study, jobs);
        if (*list) return cmd_list();
        if (*compare) return cmd_compare(cmp_o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SuiteError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRowFailure;
    }
    return 0;
}
