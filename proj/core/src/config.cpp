#include "genset/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "genset/errors.hpp"

namespace genset {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Strips a trailing comment: '#'/';' at line start or after whitespace.
std::string strip_comment(const std::string& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((s[i] == '#' || s[i] == ';') && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t'))
            return s.substr(0, i);
    }
    return s;
}

double parse_number(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto* begin = t.data();
    const auto* end = t.data() + t.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ValidationError("config: bad number '" + t + "' for " + where);
    return value;
}

} // namespace

// ------------------------------------------------------------ ConfigFile

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ValidationError("config: unterminated section header at " + where);
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty())
                throw ValidationError("config: empty section name at " + where);
            cfg.sections_[section]; // sections may be empty
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: expected key = value at " + where);
        if (section.empty())
            throw ValidationError("config: key outside any section at " + where);
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) throw ValidationError("config: empty key at " + where);
        cfg.sections_[section][key] = trim(body.substr(eq + 1));
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s != sections_.end()) {
        const auto k = s->second.find(key);
        if (k != s->second.end()) return k->second;
    }
    throw ValidationError("config: missing [" + section + "] " + key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double ConfigFile::get_number(const std::string& section, const std::string& key) const {
    return parse_number(get_string(section, key), "[" + section + "] " + key);
}

double ConfigFile::get_number(const std::string& section, const std::string& key,
                              double fallback) const {
    return has(section, key) ? get_number(section, key) : fallback;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get_string(section, key);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ValidationError("config: bad boolean '" + v + "' for [" + section + "] " + key);
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
    std::vector<std::string> out;
    if (!has(section, key)) return out;
    std::istringstream in(get_string(section, key));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<std::string> ConfigFile::section_names() const {
    std::vector<std::string> out;
    out.reserve(sections_.size());
    for (const auto& [name, _] : sections_) out.push_back(name);
    return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto s = sections_.find(section);
    if (s == sections_.end()) return out;
    out.reserve(s->second.size());
    for (const auto& [key, _] : s->second) out.push_back(key);
    return out;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    sections_[section][key] = value;
}

// ------------------------------------------------- parameter registry

const std::vector<ParamAccessor>& parameter_registry() {
#define GENSET_PARAM(path, field)                                   \
    ParamAccessor {                                                 \
        path, [](const SystemParams& s) { return s.field; },        \
            [](SystemParams& s, double v) { s.field = v; }          \
    }
    static const std::vector<ParamAccessor> table = {
        GENSET_PARAM("base.s_base", base.s_base),
        GENSET_PARAM("base.v_base", base.v_base),
        GENSET_PARAM("base.f_base", base.f_base),
        GENSET_PARAM("base.fuel_base", base.fuel_base),
        GENSET_PARAM("machine.l_md", machine.l_md),
        GENSET_PARAM("machine.l_mq", machine.l_mq),
        GENSET_PARAM("machine.l_l", machine.l_l),
        GENSET_PARAM("machine.l_lfd", machine.l_lfd),
        GENSET_PARAM("machine.l_lkd", machine.l_lkd),
        GENSET_PARAM("machine.l_f1d", machine.l_f1d),
        GENSET_PARAM("machine.l_kq1", machine.l_kq1),
        GENSET_PARAM("machine.l_kq2", machine.l_kq2),
        GENSET_PARAM("machine.r_s", machine.r_s),
        GENSET_PARAM("machine.r_fd", machine.r_fd),
        GENSET_PARAM("machine.r_kd", machine.r_kd),
        GENSET_PARAM("machine.r_kq1", machine.r_kq1),
        GENSET_PARAM("machine.r_kq2", machine.r_kq2),
        GENSET_PARAM("machine.h", machine.h),
        GENSET_PARAM("machine.d", machine.d),
        GENSET_PARAM("exciter.t_r", exciter.t_r),
        GENSET_PARAM("exciter.k_a", exciter.k_a),
        GENSET_PARAM("exciter.t_a", exciter.t_a),
        GENSET_PARAM("exciter.vr_min", exciter.vr_min),
        GENSET_PARAM("exciter.vr_max", exciter.vr_max),
        GENSET_PARAM("exciter.k_p", exciter.k_p),
        GENSET_PARAM("exciter.k_i", exciter.k_i),
        GENSET_PARAM("exciter.k_d", exciter.k_d),
        GENSET_PARAM("exciter.n_d", exciter.n_d),
        GENSET_PARAM("exciter.k_f", exciter.k_f),
        GENSET_PARAM("exciter.t_f", exciter.t_f),
        GENSET_PARAM("exciter.k_e", exciter.k_e),
        GENSET_PARAM("exciter.t_e", exciter.t_e),
        GENSET_PARAM("exciter.k_g", exciter.k_g),
        GENSET_PARAM("exciter.efd_1", exciter.efd_1),
        GENSET_PARAM("exciter.se_efd_1", exciter.se_efd_1),
        GENSET_PARAM("exciter.efd_2", exciter.efd_2),
        GENSET_PARAM("exciter.se_efd_2", exciter.se_efd_2),
        GENSET_PARAM("vhz.gain", vhz.gain),
        GENSET_PARAM("vhz.setpoint", vhz.setpoint),
        GENSET_PARAM("gov.simple.k_p", simple.k_p),
        GENSET_PARAM("gov.simple.k_i", simple.k_i),
        GENSET_PARAM("gov.simple.t_sm", simple.t_sm),
        GENSET_PARAM("gov.simple.c", simple.c),
        GENSET_PARAM("gov.simple.c_2", simple.c_2),
        GENSET_PARAM("gov.simple.c_3", simple.c_3),
        GENSET_PARAM("gov.simple.k_1", simple.k_1),
        GENSET_PARAM("gov.simple.tau_d", simple.tau_d),
        GENSET_PARAM("gov.degov.t_1", degov.t_1),
        GENSET_PARAM("gov.degov.t_2", degov.t_2),
        GENSET_PARAM("gov.degov.t_3", degov.t_3),
        GENSET_PARAM("gov.degov.t_4", degov.t_4),
        GENSET_PARAM("gov.degov.t_5", degov.t_5),
        GENSET_PARAM("gov.degov.t_6", degov.t_6),
        GENSET_PARAM("gov.degov.k", degov.k),
        GENSET_PARAM("gov.degov.t_d", degov.t_d),
        GENSET_PARAM("gov.ggov1.maxerr", ggov1.maxerr),
        GENSET_PARAM("gov.ggov1.minerr", ggov1.minerr),
        GENSET_PARAM("gov.ggov1.k_p", ggov1.k_p),
        GENSET_PARAM("gov.ggov1.k_i", ggov1.k_i),
        GENSET_PARAM("gov.ggov1.k_d", ggov1.k_d),
        GENSET_PARAM("gov.ggov1.n_d", ggov1.n_d),
        GENSET_PARAM("gov.ggov1.t_act", ggov1.t_act),
        GENSET_PARAM("gov.ggov1.valve_open", ggov1.valve_open),
        GENSET_PARAM("gov.ggov1.valve_close", ggov1.valve_close),
        GENSET_PARAM("gov.ggov1.pos_min", ggov1.pos_min),
        GENSET_PARAM("gov.ggov1.pos_max", ggov1.pos_max),
        GENSET_PARAM("gov.ggov1.k_turb", ggov1.k_turb),
        GENSET_PARAM("gov.ggov1.t_b", ggov1.t_b),
        GENSET_PARAM("gov.ggov1.t_c", ggov1.t_c),
        GENSET_PARAM("gov.ggov1.w_fnl", ggov1.w_fnl),
        GENSET_PARAM("gov.ggov1d.maxerr", ggov1d.maxerr),
        GENSET_PARAM("gov.ggov1d.minerr", ggov1d.minerr),
        GENSET_PARAM("gov.ggov1d.t_1", ggov1d.t_1),
        GENSET_PARAM("gov.ggov1d.t_2", ggov1d.t_2),
        GENSET_PARAM("gov.ggov1d.t_3", ggov1d.t_3),
        GENSET_PARAM("gov.ggov1d.t_4", ggov1d.t_4),
        GENSET_PARAM("gov.ggov1d.t_5", ggov1d.t_5),
        GENSET_PARAM("gov.ggov1d.t_6", ggov1d.t_6),
        GENSET_PARAM("gov.ggov1d.k", ggov1d.k),
        GENSET_PARAM("gov.ggov1d.valve_open", ggov1d.valve_open),
        GENSET_PARAM("gov.ggov1d.valve_close", ggov1d.valve_close),
        GENSET_PARAM("gov.ggov1d.pos_min", ggov1d.pos_min),
        GENSET_PARAM("gov.ggov1d.pos_max", ggov1d.pos_max),
        GENSET_PARAM("gov.ggov1d.k_turb", ggov1d.k_turb),
        GENSET_PARAM("gov.ggov1d.t_b", ggov1d.t_b),
        GENSET_PARAM("gov.ggov1d.t_c", ggov1d.t_c),
        GENSET_PARAM("gov.ggov1d.w_fnl", ggov1d.w_fnl),
        GENSET_PARAM("system.b_snubber", b_snubber),
        GENSET_PARAM("system.v_setpoint", v_setpoint),
    };
#undef GENSET_PARAM
    return table;
}

namespace {

const ParamAccessor* find_parameter(const std::string& name) {
    for (const auto& acc : parameter_registry())
        if (name == acc.name) return &acc;
    return nullptr;
}

} // namespace

bool has_parameter(const std::string& name) { return find_parameter(name) != nullptr; }

double get_parameter(const SystemParams& sys, const std::string& name) {
    const auto* acc = find_parameter(name);
    if (!acc) throw ValidationError("unknown parameter: " + name);
    return acc->get(sys);
}

void set_parameter(SystemParams& sys, const std::string& name, double value) {
    const auto* acc = find_parameter(name);
    if (!acc) throw ValidationError("unknown parameter: " + name);
    acc->set(sys, value);
}

std::vector<std::string> expand_parameter_names(const std::string& name_or_group) {
    if (has_parameter(name_or_group)) return {name_or_group};
    std::vector<std::string> out;
    const std::string prefix = name_or_group + ".";
    for (const auto& acc : parameter_registry())
        if (std::string(acc.name).rfind(prefix, 0) == 0) out.emplace_back(acc.name);
    if (out.empty())
        throw ValidationError("unknown parameter or group: " + name_or_group);
    return out;
}

// ----------------------------------------------------------- run config

namespace {

const std::set<std::string>& allowed_sections() {
    static const std::set<std::string> s = {
        "base",     "machine",   "exciter",  "vhz",       "governor", "gov.simple",
        "gov.degov", "gov.ggov1", "gov.ggov1d", "scenario", "system",   "objective",
        "optimizer", "signal",    "data",     "output",    "identify", "bounds"};
    return s;
}

void check_keys(const ConfigFile& f, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const auto& key : f.keys(section))
        if (!allowed.count(key))
            throw ValidationError("config: unknown key [" + section + "] " + key);
}

// Applies every registry-backed key in `section`; returns the key names seen.
std::set<std::string> apply_registry_section(const ConfigFile& f, SystemParams& sys,
                                             const std::string& section) {
    std::set<std::string> known;
    for (const auto& acc : parameter_registry()) {
        const std::string name(acc.name);
        const auto dot = name.rfind('.');
        if (name.substr(0, dot) != section) continue;
        const std::string key = name.substr(dot + 1);
        known.insert(key);
        if (f.has(section, key)) acc.set(sys, f.get_number(section, key));
    }
    return known;
}

} // namespace

RunConfig load_run_config(const ConfigFile& f) {
    for (const auto& section : f.section_names())
        if (!allowed_sections().count(section))
            throw ValidationError("config: unknown section [" + section + "]");

    RunConfig cfg;

    for (const std::string section :
         {"base", "machine", "vhz", "gov.simple", "gov.degov", "gov.ggov1", "gov.ggov1d",
          "system"}) {
        auto known = apply_registry_section(f, cfg.system, section);
        if (section == "vhz") known.insert("enabled");
        check_keys(f, section, known);
    }
    {
        auto known = apply_registry_section(f, cfg.system, "exciter");
        known.insert("feedback");
        check_keys(f, "exciter", known);
    }
    cfg.system.vhz.enabled = f.get_bool("vhz", "enabled", cfg.system.vhz.enabled);
    if (f.has("exciter", "feedback"))
        cfg.system.exciter.feedback =
            feedback_mode_from_string(f.get_string("exciter", "feedback"));

    check_keys(f, "governor", {"kind", "mode", "compare"});
    if (f.has("governor", "kind"))
        cfg.system.kind = governor_kind_from_string(f.get_string("governor", "kind"));
    if (f.has("governor", "compare")) {
        cfg.compare_kinds.clear();
        for (const auto& k : f.get_list("governor", "compare"))
            cfg.compare_kinds.push_back(governor_kind_from_string(k));
        if (cfg.compare_kinds.empty())
            throw ValidationError("config: empty [governor] compare list");
    }
    const std::string mode = f.get_string("governor", "mode", "isochronous");
    if (mode == "droop")
        throw ValidationError(
            "config: droop mode is not implemented; this model runs isochronous");
    if (mode != "isochronous")
        throw ValidationError("config: unknown governor mode '" + mode + "'");

    check_keys(f, "scenario",
               {"p0_kw", "q0_kvar", "p1_kw", "q1_kvar", "t_step", "t_end", "dt",
                "v_nominal", "f_nominal"});
    cfg.scenario.p0_kw = f.get_number("scenario", "p0_kw", cfg.scenario.p0_kw);
    cfg.scenario.q0_kvar = f.get_number("scenario", "q0_kvar", cfg.scenario.q0_kvar);
    cfg.scenario.p1_kw = f.get_number("scenario", "p1_kw", cfg.scenario.p1_kw);
    cfg.scenario.q1_kvar = f.get_number("scenario", "q1_kvar", cfg.scenario.q1_kvar);
    cfg.scenario.t_step = f.get_number("scenario", "t_step", cfg.scenario.t_step);
    cfg.scenario.t_end = f.get_number("scenario", "t_end", cfg.scenario.t_end);
    cfg.scenario.dt = f.get_number("scenario", "dt", cfg.scenario.dt);
    cfg.scenario.v_nominal = f.get_number("scenario", "v_nominal", cfg.scenario.v_nominal);
    cfg.scenario.f_nominal = f.get_number("scenario", "f_nominal", cfg.scenario.f_nominal);

    check_keys(f, "objective",
               {"w_p", "w_q", "w_v", "w_f", "norm", "window_start", "window_length",
                "rebound_end"});
    cfg.rebound_end = f.get_number("objective", "rebound_end", cfg.rebound_end);
    cfg.objective.w_p = f.get_number("objective", "w_p", cfg.objective.w_p);
    cfg.objective.w_q = f.get_number("objective", "w_q", cfg.objective.w_q);
    cfg.objective.w_v = f.get_number("objective", "w_v", cfg.objective.w_v);
    cfg.objective.w_f = f.get_number("objective", "w_f", cfg.objective.w_f);
    if (f.has("objective", "norm"))
        cfg.objective.norm = norm_kind_from_string(f.get_string("objective", "norm"));
    cfg.objective.window_start =
        f.get_number("objective", "window_start", cfg.objective.window_start);
    cfg.objective.window_length =
        f.get_number("objective", "window_length", cfg.objective.window_length);

    check_keys(f, "optimizer",
               {"max_evaluations", "seed", "initial_design", "n_candidates",
                "min_separation", "perturb_sigma", "penalty", "merit_weights"});
    cfg.optimizer.max_evaluations = static_cast<std::size_t>(
        f.get_number("optimizer", "max_evaluations",
                     static_cast<double>(cfg.optimizer.max_evaluations)));
    cfg.optimizer.seed = static_cast<std::uint64_t>(
        f.get_number("optimizer", "seed", static_cast<double>(cfg.optimizer.seed)));
    cfg.optimizer.initial_design = static_cast<std::size_t>(
        f.get_number("optimizer", "initial_design",
                     static_cast<double>(cfg.optimizer.initial_design)));
    cfg.optimizer.n_candidates = static_cast<std::size_t>(
        f.get_number("optimizer", "n_candidates",
                     static_cast<double>(cfg.optimizer.n_candidates)));
    cfg.optimizer.min_separation =
        f.get_number("optimizer", "min_separation", cfg.optimizer.min_separation);
    cfg.optimizer.perturb_sigma =
        f.get_number("optimizer", "perturb_sigma", cfg.optimizer.perturb_sigma);
    cfg.optimizer.penalty = f.get_number("optimizer", "penalty", cfg.optimizer.penalty);
    if (f.has("optimizer", "merit_weights")) {
        cfg.optimizer.merit_weights.clear();
        for (const auto& w : f.get_list("optimizer", "merit_weights"))
            cfg.optimizer.merit_weights.push_back(parse_number(w, "[optimizer] merit_weights"));
    }

    check_keys(f, "signal",
               {"output_dt", "pll_natural_freq_hz", "pll_damping", "pll_lock_band"});
    cfg.derive.output_dt = f.get_number("signal", "output_dt", cfg.derive.output_dt);
    cfg.derive.pll.natural_freq_hz =
        f.get_number("signal", "pll_natural_freq_hz", cfg.derive.pll.natural_freq_hz);
    cfg.derive.pll.damping = f.get_number("signal", "pll_damping", cfg.derive.pll.damping);
    cfg.derive.pll.lock_band =
        f.get_number("signal", "pll_lock_band", cfg.derive.pll.lock_band);
    cfg.derive.pll.f_nominal = cfg.scenario.f_nominal;

    check_keys(f, "data", {"path", "kind"});
    cfg.data_path = f.get_string("data", "path", cfg.data_path);
    cfg.data_kind = f.get_string("data", "kind", cfg.data_kind);
    if (cfg.data_kind != "raw" && cfg.data_kind != "derived")
        throw ValidationError("config: data kind must be raw or derived, got " +
                              cfg.data_kind);

    check_keys(f, "output", {"dir"});
    cfg.out_dir = f.get_string("output", "dir", cfg.out_dir);

    check_keys(f, "identify", {"free", "freeze"});
    cfg.free_groups = f.get_list("identify", "free");
    cfg.freeze_groups = f.get_list("identify", "freeze");

    for (const auto& key : f.keys("bounds")) {
        if (!has_parameter(key))
            throw ValidationError("config: unknown parameter in bounds: " + key);
        const auto parts = f.get_list("bounds", key);
        if (parts.size() != 2)
            throw ValidationError("config: bounds for " + key + " need 'lower, upper'");
        const double lo = parse_number(parts[0], "[bounds] " + key);
        const double hi = parse_number(parts[1], "[bounds] " + key);
        if (!(lo <= hi))
            throw ValidationError("config: bounds for " + key + " have lower > upper");
        cfg.bounds[key] = {lo, hi};
    }
    return cfg;
}

ParameterVector identification_vector(const RunConfig& cfg) {
    std::vector<std::string> free_list;
    if (cfg.free_groups.empty()) {
        free_list = expand_parameter_names("gov." + to_string(cfg.system.kind));
    } else {
        for (const auto& g : cfg.free_groups)
            for (auto& n : expand_parameter_names(g)) free_list.push_back(std::move(n));
    }
    std::set<std::string> frozen;
    for (const auto& g : cfg.freeze_groups)
        for (auto& n : expand_parameter_names(g)) frozen.insert(std::move(n));

    std::vector<Param> entries;
    std::set<std::string> seen;
    for (const auto& name : free_list) {
        if (!seen.insert(name).second) continue;
        Param p;
        p.name = name;
        p.value = get_parameter(cfg.system, name);
        p.frozen = frozen.count(name) > 0;
        if (p.frozen) {
            p.lower = p.upper = p.value;
        } else {
            const auto it = cfg.bounds.find(name);
            if (it == cfg.bounds.end())
                throw ValidationError("config: no bounds given for parameter " + name);
            p.lower = it->second.first;
            p.upper = it->second.second;
            p.value = std::clamp(p.value, p.lower, p.upper);
        }
        entries.push_back(std::move(p));
    }
    return ParameterVector(std::move(entries));
}

SystemParams apply_parameters(const SystemParams& sys, const ParameterVector& params) {
    SystemParams out = sys;
    for (const auto& p : params.entries()) set_parameter(out, p.name, p.value);
    return out;
}

} // namespace genset
