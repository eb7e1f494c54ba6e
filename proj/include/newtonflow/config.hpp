#pragma once

// Run configuration: a flat `key = value` text file, one entry per line,
// `#` starts a comment. Serialization writes every key so a resolved config
// reproduces itself exactly.

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "newtonflow/errors.hpp"
#include "newtonflow/flow.hpp"
#include "newtonflow/maps.hpp"
#include "newtonflow/sampling.hpp"

namespace newtonflow {

struct RunConfig {
    std::string command;
    std::string map = "zampieri-ex5";
    /// Row-major matrix for the linear map.
    Vector matrix;
    Vector target, start, x0, x1;
    FlowOptions flow;

    std::string criterion;
    std::string aux = "log-h";
    double a = 1.0, b = 1.0, c = 0.0;
    std::string omega = "const:1";
    std::string sampler;
    Vector radii{1, 2, 4, 8, 16};
    std::size_t samples = 1000;
    double r = 1.0;
    std::size_t n_dirs = 16;
    double growth_factor = 10.0;

    Vector box{-4, 4, -4, 4};
    std::size_t resolution = 101;
    std::size_t pairs = 0;

    std::size_t grid_res = 201;
    double inject_jacobian_fault = 0.0;

    std::uint64_t seed = 1;
    std::string out;
    std::string csv;
    std::size_t workers = 0;

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string format_vector(const Vector& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt::format("{}", v[i]);
    }
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParameterError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw ParameterError("not a number: '" + s + "'");
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw ParameterError("not a nonnegative integer: '" + s + "'");
    }
    return std::stoull(s);
}

struct ConfigField {
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <class T>
ConfigField string_field(const char* key, T RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return c.*member; },
            [member](RunConfig& c, const std::string& v) { c.*member = v; }};
}

inline ConfigField vector_field(const char* key, Vector RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return format_vector(c.*member); },
            [member](RunConfig& c, const std::string& v) { c.*member = v.empty() ? Vector{} : parse_vector(v); }};
}

template <class Getter, class Setter>
ConfigField double_field(const char* key, Getter get, Setter set) {
    return {key, [get](const RunConfig& c) { return fmt::format("{}", get(c)); },
            [set](RunConfig& c, const std::string& v) { set(c, parse_double(v)); }};
}

template <class Getter, class Setter>
ConfigField unsigned_field(const char* key, Getter get, Setter set) {
    return {key, [get](const RunConfig& c) { return fmt::format("{}", get(c)); },
            [set](RunConfig& c, const std::string& v) { set(c, parse_unsigned(v)); }};
}

#define NF_DOUBLE(key, expr) \
    double_field(key, [](const RunConfig& c) { return c.expr; }, [](RunConfig& c, double v) { c.expr = v; })
#define NF_UNSIGNED(key, expr)                                        \
    unsigned_field(                                                   \
        key, [](const RunConfig& c) { return c.expr; },               \
        [](RunConfig& c, std::uint64_t v) { c.expr = static_cast<decltype(c.expr)>(v); })

inline const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields{
        string_field("command", &RunConfig::command),
        string_field("map", &RunConfig::map),
        vector_field("matrix", &RunConfig::matrix),
        vector_field("target", &RunConfig::target),
        vector_field("start", &RunConfig::start),
        vector_field("x0", &RunConfig::x0),
        vector_field("x1", &RunConfig::x1),
        NF_DOUBLE("abs_tol", flow.abs_tol),
        NF_DOUBLE("rel_tol", flow.rel_tol),
        NF_DOUBLE("t_max", flow.t_max),
        NF_DOUBLE("blowup_radius", flow.blowup_radius),
        NF_DOUBLE("residual_tol", flow.residual_tol),
        NF_UNSIGNED("max_steps", flow.max_steps),
        NF_DOUBLE("max_condition", flow.max_condition),
        string_field("criterion", &RunConfig::criterion),
        string_field("aux", &RunConfig::aux),
        NF_DOUBLE("a", a),
        NF_DOUBLE("b", b),
        NF_DOUBLE("c", c),
        string_field("omega", &RunConfig::omega),
        string_field("sampler", &RunConfig::sampler),
        vector_field("radii", &RunConfig::radii),
        NF_UNSIGNED("samples", samples),
        NF_DOUBLE("r", r),
        NF_UNSIGNED("n_dirs", n_dirs),
        NF_DOUBLE("growth_factor", growth_factor),
        vector_field("box", &RunConfig::box),
        NF_UNSIGNED("resolution", resolution),
        NF_UNSIGNED("pairs", pairs),
        NF_UNSIGNED("grid_res", grid_res),
        NF_DOUBLE("inject_jacobian_fault", inject_jacobian_fault),
        NF_UNSIGNED("seed", seed),
        string_field("out", &RunConfig::out),
        string_field("csv", &RunConfig::csv),
        NF_UNSIGNED("workers", workers),
    };
    return fields;
}

#undef NF_DOUBLE
#undef NF_UNSIGNED

}  // namespace detail

inline std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& f : detail::config_fields()) {
        const std::string v = f.get(cfg);
        out += f.key;
        out += v.empty() ? " =" : " = " + v;
        out += '\n';
    }
    return out;
}

/// Sets one field by its config key; unknown keys are errors.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& f : detail::config_fields()) {
        if (key != f.key) continue;
        try {
            f.set(cfg, value);
        } catch (const Error& e) {
            throw ParameterError(key + ": " + e.what());
        }
        return;
    }
    throw ParameterError("unknown key '" + key + "'");
}

inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : detail::config_fields()) keys.emplace_back(f.key);
    return keys;
}

/// Applies `key = value` lines on top of `base`. Unknown keys are errors.
inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParameterError(fmt::format("config line {}: expected key = value", lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            set_config_value(base, key, value);
        } catch (const Error& e) {
            throw ParameterError(fmt::format("config line {}: {}", lineno, e.what()));
        }
    }
    return base;
}

/// Fills dimension-dependent defaults so nothing is defaulted later.
inline RunConfig resolve_config(RunConfig cfg) {
    if (cfg.command == "list-maps") return cfg;
    std::size_t dim = 0;
    if (cfg.map == "linear") {
        if (!cfg.matrix.empty()) {
            dim = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(cfg.matrix.size()))));
            if (dim * dim != cfg.matrix.size()) throw ParameterError("matrix must have a square number of entries");
        } else {
            dim = !cfg.start.empty() ? cfg.start.size() : !cfg.target.empty() ? cfg.target.size() : 2;
        }
    } else {
        dim = find_map(cfg.map).dim;
    }
    if (cfg.start.empty()) cfg.start = Vector(dim, 0.0);
    if (cfg.x0.empty()) cfg.x0 = Vector(dim, 0.0);
    if (cfg.x1.empty()) cfg.x1 = cfg.x0;
    if (cfg.sampler.empty()) {
        std::string s = "grid:";
        for (std::size_t d = 0; d < dim; ++d) s += "-5,5,";
        s += dim == 1 ? "2001" : dim == 2 ? "201" : "11";
        cfg.sampler = s;
    }
    return cfg;
}

}  // namespace newtonflow
