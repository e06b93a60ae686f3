#pragma once

#include <map>
#include <string>
#include <vector>

#include "mvups/frequency.hpp"
#include "mvups/metrics.hpp"
#include "mvups/params.hpp"

namespace mvups {

const std::vector<std::string>& study_ids();

enum class RowKind { averaged, ffr, emt };

struct SuiteRow {
    std::string name;
    std::map<std::string, std::string> overrides;
    RowKind kind = RowKind::averaged;
};

// Row names and override sets for one study, resolved against the registry.
std::vector<SuiteRow> study_rows(const std::string& study);

struct RowResult {
    std::string name;
    Scenario scenario;
    Trace trace;
    FaultMetrics metrics;
    bool has_metrics = false;
    FrequencyTrace freq;
    bool ok = false;
    std::string error;
};

struct SuiteReport {
    std::string study;
    std::vector<RowResult> rows;
    std::string table_text;
    std::string table_csv;
    // Additional study outputs keyed by path relative to the study directory.
    std::map<std::string, std::string> files;

    bool any_failed() const;
};

class SuiteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

SuiteReport run_study(const std::string& study, const Scenario& base, int jobs = 1);

// Writes <out>/<study>/<row>/<channel>.csv, <out>/<study>/metrics.{txt,csv} and the extra files.
void write_report(const SuiteReport& report, const std::string& out_dir);

const std::vector<std::string>& channel_names();

// Directory name for a row label.
std::string row_slug(const std::string& name);

}  // namespace mvups
