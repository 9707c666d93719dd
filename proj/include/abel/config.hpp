#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "abel/coefficients.hpp"
#include "abel/errors.hpp"

namespace abel {

struct SolverConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double delta = 1e-4;
    int grid = 2000;
    int harmonics = 64;
    double residual_tol = 1e-7;
    double slope_tol = 1e-3;
};

struct AnalysisConfig {
    std::vector<double> x_a{1e-12, 1e-3, 0.05};
    std::vector<double> slopes{-0.5, -0.3, 0.0};
    std::vector<double> u0;  // empty: use the built-in grid
};

struct ProblemConfig {
    double period = 0.0;
    std::optional<AbelSystem> normal;
    std::optional<GeneralAbelSystem> general;
    SolverConfig solver;
    AnalysisConfig analysis;
};

namespace detail {

struct ConfigValue {
    bool is_list = false;
    double scalar = 0.0;
    std::vector<double> list;
    int line = 0;
    int column = 0;
};

struct RawConfig {
    // (section, key) -> value; "" section holds top-level keys.
    std::map<std::pair<std::string, std::string>, ConfigValue> entries;
};

inline double parse_number(const std::string& tok, int line, int col) {
    const char* s = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw ParseError("expected a number, got '" + tok + "'", line, col);
    return v;
}

inline RawConfig tokenize_config(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line_buf;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line_buf)) {
        ++line_no;
        std::size_t i = 0;
        const std::size_t n = line_buf.size();
        auto col = [&] { return int(i) + 1; };
        auto skip_ws = [&] {
            while (i < n && (line_buf[i] == ' ' || line_buf[i] == '\t' || line_buf[i] == '\r')) ++i;
        };
        while (true) {
            skip_ws();
            if (i >= n || line_buf[i] == '#' || line_buf[i] == ';') break;
            if (line_buf[i] == '[') {
                const std::size_t close = line_buf.find(']', i);
                if (close == std::string::npos)
                    throw ParseError("unterminated '['", line_no, col());
                std::string name = line_buf.substr(i + 1, close - i - 1);
                // a list here would mean a key is missing in front of it
                for (char c : name)
                    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                        throw ParseError("expected a section name inside [...]", line_no, col());
                if (name.empty()) throw ParseError("empty section name", line_no, col());
                section = name;
                i = close + 1;
                continue;
            }
            if (!std::isalpha(static_cast<unsigned char>(line_buf[i])) && line_buf[i] != '_')
                throw ParseError(std::string("unexpected character '") + line_buf[i] + "'",
                                 line_no, col());
            const int key_col = col();
            std::size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(line_buf[j])) ||
                             line_buf[j] == '_'))
                ++j;
            const std::string key = line_buf.substr(i, j - i);
            i = j;
            skip_ws();
            if (i >= n || line_buf[i] != '=')
                throw ParseError("expected '=' after '" + key + "'", line_no, col());
            ++i;
            skip_ws();
            if (i >= n) throw ParseError("missing value after '" + key + " ='", line_no, col());

            ConfigValue val;
            val.line = line_no;
            val.column = col();
            if (line_buf[i] == '[') {
                const std::size_t close = line_buf.find(']', i);
                if (close == std::string::npos)
                    throw ParseError("unterminated list", line_no, col());
                std::string body = line_buf.substr(i + 1, close - i - 1);
                val.is_list = true;
                std::size_t p = 0;
                while (p < body.size()) {
                    std::size_t q = body.find(',', p);
                    if (q == std::string::npos) q = body.size();
                    std::string tok = body.substr(p, q - p);
                    const std::size_t first = tok.find_first_not_of(" \t");
                    if (first == std::string::npos) {
                        if (q != body.size() || !val.list.empty())
                            throw ParseError("empty list element", line_no, val.column);
                    } else {
                        const std::size_t last = tok.find_last_not_of(" \t");
                        val.list.push_back(parse_number(tok.substr(first, last - first + 1),
                                                        line_no, val.column));
                    }
                    p = q + 1;
                }
                i = close + 1;
            } else {
                std::size_t k = i;
                while (k < n && !std::isspace(static_cast<unsigned char>(line_buf[k])) &&
                       line_buf[k] != '#')
                    ++k;
                val.scalar = parse_number(line_buf.substr(i, k - i), line_no, col());
                i = k;
            }
            const auto ins = raw.entries.emplace(std::make_pair(section, key), val);
            if (!ins.second)
                throw SchemaError("duplicate key '" + key + "'" +
                                  (section.empty() ? "" : " in section [" + section + "]"));
            (void)key_col;
        }
    }
    return raw;
}

}  // namespace detail

/// Parse the line-oriented config grammar:
///   period = 6.283185307179586
///   [A] mean = 0.0 cos = [] sin = [0.1]
///   [solver] rel_tol = 1e-9 delta = 1e-4
/// Unknown sections or keys, duplicates, mixed coefficient families, and
/// out-of-range values are rejected.
inline ProblemConfig parse_config(const std::string& text) {
    detail::RawConfig raw = detail::tokenize_config(text);
    ProblemConfig cfg;

    static const std::vector<std::string> coeff_normal{"A", "B", "C"};
    static const std::vector<std::string> coeff_general{"a0", "a1", "a2", "b0", "b1"};
    static const std::vector<std::string> solver_keys{"rel_tol", "abs_tol",      "delta",
                                                      "grid",    "harmonics",    "residual_tol",
                                                      "slope_tol"};
    static const std::vector<std::string> analysis_keys{"x_a", "slopes", "u0"};
    static const std::vector<std::string> coeff_keys{"mean", "cos", "sin"};

    auto contains = [](const std::vector<std::string>& v, const std::string& s) {
        for (const auto& e : v)
            if (e == s) return true;
        return false;
    };

    for (const auto& [sk, val] : raw.entries) {
        const auto& [section, key] = sk;
        if (section.empty()) {
            if (key != "period") throw SchemaError("unknown top-level key '" + key + "'");
            continue;
        }
        if (contains(coeff_normal, section) || contains(coeff_general, section)) {
            if (!contains(coeff_keys, key))
                throw SchemaError("unknown key '" + key + "' in section [" + section + "]");
        } else if (section == "solver") {
            if (!contains(solver_keys, key))
                throw SchemaError("unknown key '" + key + "' in section [solver]");
        } else if (section == "analysis") {
            if (!contains(analysis_keys, key))
                throw SchemaError("unknown key '" + key + "' in section [analysis]");
        } else {
            throw SchemaError("unknown section [" + section + "]");
        }
    }

    auto find = [&](const std::string& section,
                    const std::string& key) -> const detail::ConfigValue* {
        auto it = raw.entries.find(std::make_pair(section, key));
        return it == raw.entries.end() ? nullptr : &it->second;
    };
    auto need_scalar = [&](const detail::ConfigValue& v, const std::string& what) {
        if (v.is_list) throw SchemaError(what + " expects a scalar, got a list");
        return v.scalar;
    };
    auto need_list = [&](const detail::ConfigValue& v, const std::string& what) {
        if (!v.is_list) throw SchemaError(what + " expects a list like [0.1, 0.2]");
        return v.list;
    };

    const detail::ConfigValue* period_v = find("", "period");
    if (!period_v) throw SchemaError("missing 'period'");
    cfg.period = need_scalar(*period_v, "'period'");
    if (!(cfg.period > 0.0) || !std::isfinite(cfg.period))
        throw SchemaError("'period' must be positive and finite");

    auto section_present = [&](const std::string& s) {
        for (const auto& [sk, val] : raw.entries)
            if (sk.first == s) return true;
        return false;
    };
    bool any_normal = false, any_general = false;
    for (const auto& s : coeff_normal) any_normal = any_normal || section_present(s);
    for (const auto& s : coeff_general) any_general = any_general || section_present(s);
    if (any_normal && any_general)
        throw SchemaError("give either [A],[B],[C] or [a0]..[b1], not both");
    if (!any_normal && !any_general)
        throw SchemaError("no coefficient sections: give [A],[B],[C] or [a0]..[b1]");

    auto read_coeff = [&](const std::string& s) {
        if (!section_present(s)) throw SchemaError("missing coefficient section [" + s + "]");
        double mean = 0.0;
        std::vector<double> cs, sn;
        if (const auto* v = find(s, "mean")) mean = need_scalar(*v, "[" + s + "] mean");
        if (const auto* v = find(s, "cos")) cs = need_list(*v, "[" + s + "] cos");
        if (const auto* v = find(s, "sin")) sn = need_list(*v, "[" + s + "] sin");
        return PeriodicCoefficient(cfg.period, mean, std::move(cs), std::move(sn));
    };

    if (any_normal) {
        cfg.normal.emplace(read_coeff("A"), read_coeff("B"), read_coeff("C"));
    } else {
        cfg.general.emplace(read_coeff("a0"), read_coeff("a1"), read_coeff("a2"),
                            read_coeff("b0"), read_coeff("b1"));
    }

    SolverConfig& sv = cfg.solver;
    if (const auto* v = find("solver", "rel_tol")) sv.rel_tol = need_scalar(*v, "rel_tol");
    if (const auto* v = find("solver", "abs_tol")) sv.abs_tol = need_scalar(*v, "abs_tol");
    if (const auto* v = find("solver", "delta")) sv.delta = need_scalar(*v, "delta");
    if (const auto* v = find("solver", "grid")) {
        const double g = need_scalar(*v, "grid");
        if (g != double(long(g))) throw SchemaError("'grid' must be an integer");
        sv.grid = int(g);
    }
    if (const auto* v = find("solver", "harmonics")) {
        const double g = need_scalar(*v, "harmonics");
        if (g != double(long(g))) throw SchemaError("'harmonics' must be an integer");
        sv.harmonics = int(g);
    }
    if (const auto* v = find("solver", "residual_tol"))
        sv.residual_tol = need_scalar(*v, "residual_tol");
    if (const auto* v = find("solver", "slope_tol")) sv.slope_tol = need_scalar(*v, "slope_tol");

    if (!(sv.rel_tol > 0.0) || !(sv.abs_tol > 0.0))
        throw SchemaError("solver tolerances must be positive");
    if (!(sv.delta > 0.0) || sv.delta > 1e-3 * cfg.period)
        throw SchemaError("'delta' must lie in (0, period/1000]");
    if (sv.grid < 16) throw SchemaError("'grid' must be at least 16");
    if (sv.harmonics < 1 || sv.harmonics > 512)
        throw SchemaError("'harmonics' must lie in [1, 512]");
    if (!(sv.residual_tol > 0.0) || !(sv.slope_tol > 0.0))
        throw SchemaError("'residual_tol' and 'slope_tol' must be positive");

    AnalysisConfig& an = cfg.analysis;
    if (const auto* v = find("analysis", "x_a")) an.x_a = need_list(*v, "x_a");
    if (const auto* v = find("analysis", "slopes")) an.slopes = need_list(*v, "slopes");
    if (const auto* v = find("analysis", "u0")) an.u0 = need_list(*v, "u0");
    for (double x : an.x_a)
        if (!(x > 0.0) || x > 0.1) throw SchemaError("'x_a' entries must lie in (0, 0.1]");
    for (double s : an.slopes)
        if (s > 0.0) throw SchemaError("'slopes' entries must be <= 0");
    for (double u : an.u0)
        if (!std::isfinite(u)) throw SchemaError("'u0' entries must be finite");
    return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace abel
