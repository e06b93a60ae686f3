#include "mvups/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mvups {

namespace {

namespace pt = boost::property_tree;

const ParamSpec* spec_for(const std::string& key) {
    for (const auto& p : parameter_registry())
        if (p.key == key) return &p;
    return nullptr;
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
    return v;
}

bool is_section(const std::string& name) {
    static const std::set<std::string> names = {"scenario", "grid", "filter", "dc", "bess", "controller", "system"};
    return names.count(name) > 0;
}

void assign(Scenario& sc, const std::string& section, const std::string& raw_key, const std::string& value) {
    std::string key = normalize_key(raw_key);
    if (key == "controller" || key == "load_kind") {
        if (!section.empty() && section != "scenario" && section != "controller")
            throw ConfigError("key '" + key + "' does not belong in section [" + section + "]");
        set_parameter(sc, key, value);
        return;
    }
    const ParamSpec* spec = spec_for(key);
    if (!spec) throw ConfigError("unknown parameter '" + raw_key + "'; valid keys: " + valid_keys_list());
    if (!section.empty() && spec->section != section)
        throw ConfigError("key '" + key + "' belongs in section [" + spec->section + "], found in [" + section + "]");
    set_parameter(sc, key, value);
}

}  // namespace

Scenario parse_config(const std::string& text, const Scenario& base) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        std::string hint = e.message() == "duplicate section name"
                               ? " (a top-level key may not share its name with a section; put controller under [scenario])"
                               : "";
        throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " + e.message() + hint);
    }
    Scenario sc = base;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            assign(sc, "", name, unquote(node.data()));
            continue;
        }
        std::string section = normalize_key(name);
        if (!is_section(section))
            throw ConfigError("unknown section [" + name + "]; valid: scenario, grid, filter, dc, bess, controller, system");
        for (const auto& [key, leaf] : node) assign(sc, section, key, unquote(leaf.data()));
    }
    validate(sc);
    return sc;
}

Scenario load_config_file(const std::string& path, const Scenario& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    try {
        return parse_config(os.str(), base);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string serialize_config(const Scenario& sc) {
    std::ostringstream os;
    std::string current;
    for (const auto& p : parameter_registry()) {
        if (p.section != current) {
            current = p.section;
            os << (os.tellp() > 0 ? "\n[" : "[") << current << "]\n";
            if (current == "scenario") {
                os << "controller = " << controller_name(sc.controller) << '\n';
                os << "load_kind = " << (sc.pulsed_load ? "pulsed" : "step") << '\n';
            }
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", sc.*(p.member));
        os << p.key << " = " << buf << '\n';
    }
    return os.str();
}

}  // namespace mvups
