#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "genset/param.hpp"
#include "genset/signal.hpp"
#include "genset/simengine.hpp"
#include "genset/surropt.hpp"

namespace genset {

// INI-style configuration: [section] headers, key = value pairs, '#'/';'
// comments. Duplicate keys take the last value; unknown sections and keys
// are rejected when a RunConfig is assembled.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text,
                                 const std::string& origin = "<config>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_number(const std::string& section, const std::string& key) const;
    double get_number(const std::string& section, const std::string& key,
                      double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    // Comma-separated list; empty when the key is absent.
    std::vector<std::string> get_list(const std::string& section,
                                      const std::string& key) const;

    std::vector<std::string> section_names() const;
    std::vector<std::string> keys(const std::string& section) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// ------------------------------------------------- parameter registry

// Dotted-name access (e.g. "machine.h", "gov.ggov1d.k") to every tunable
// scalar in SystemParams; the table drives config parsing, bounds checking,
// and identification.
struct ParamAccessor {
    const char* name;
    double (*get)(const SystemParams&);
    void (*set)(SystemParams&, double);
};

const std::vector<ParamAccessor>& parameter_registry();
bool has_parameter(const std::string& name);
double get_parameter(const SystemParams& sys, const std::string& name);
void set_parameter(SystemParams& sys, const std::string& name, double value);

// Expands a group prefix ("machine", "exciter", "gov.ggov1d") to all registry
// names under it; a full parameter name passes through. Unknown -> error.
std::vector<std::string> expand_parameter_names(const std::string& name_or_group);

// ----------------------------------------------------------- run config

struct RunConfig {
    SystemParams system{};
    Scenario scenario{};
    ObjectiveOptions objective{};
    OptimizeOptions optimizer{};
    DeriveOptions derive{};
    std::vector<GovernorKind> compare_kinds = {GovernorKind::simple, GovernorKind::degov,
                                               GovernorKind::ggov1, GovernorKind::ggov1d};
    double rebound_end = 0.0; // explicit rebound-window end; 0 = derive from the data
    std::string out_dir = ".";
    std::string data_path{};
    std::string data_kind = "derived"; // or "raw"
    std::vector<std::string> free_groups{};   // [identify] free
    std::vector<std::string> freeze_groups{}; // [identify] freeze
    std::map<std::string, std::pair<double, double>> bounds{};
};

RunConfig load_run_config(const ConfigFile& file);

// Assembles the identification set: free names (minus frozen groups) with
// bounds from the config; frozen entries carry point bounds at the current
// value. Defaults to the configured governor's own group when no free list
// is given. Missing bounds for a free parameter -> error.
ParameterVector identification_vector(const RunConfig& cfg);

// Writes the identified values back onto a copy of the system parameters.
SystemParams apply_parameters(const SystemParams& sys, const ParameterVector& params);

} // namespace genset
