#ifndef FRACBOUND_CONFIG_HPP
#define FRACBOUND_CONFIG_HPP

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "fracbound/error.hpp"
#include "fracbound/expr.hpp"

namespace fracbound {

/// Flat key-value run configuration. Two on-disk forms: an INI-like text
/// (key = value per line, '#' comments) and a flat JSON object. Unknown keys
/// are rejected.
class Config {
public:
    static const std::set<std::string>& schema() {
        static const std::set<std::string> keys = {
            "mode",       "theorem",    "route",      "a",
            "b",          "l",          "omega",      "k",
            "f",          "p",          "beta",       "alpha",
            "delta",      "gamma",      "T",          "x0",
            "tol",        "r",          "N",          "max_iter",
            "l_exponent", "k_exponent", "f0_exponent", "out",
            "format",     "verify",
        };
        return keys;
    }

    void set(const std::string& key, const std::string& value) {
        if (!schema().count(key)) throw ConfigError("unknown configuration key '" + key + "'");
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::optional<std::string> get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    std::string require(const std::string& key) const {
        auto v = get(key);
        if (!v) throw ConfigError("missing required configuration key '" + key + "'");
        return *v;
    }

    /// Numbers go through the expression parser with no variables, so
    /// rational text like 2/3 is exact.
    double number(const std::string& key) const { return parse_number(key, require(key)); }

    std::optional<double> number_opt(const std::string& key) const {
        auto v = get(key);
        if (!v) return std::nullopt;
        return parse_number(key, *v);
    }

    double number_or(const std::string& key, double fallback) const {
        return number_opt(key).value_or(fallback);
    }

    long integer_or(const std::string& key, long fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            const long n = std::stol(*v, &used);
            if (used != v->size()) throw std::invalid_argument("");
            return n;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' must be an integer, got '" + *v + "'");
        }
    }

    bool flag_or(const std::string& key, bool fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw ConfigError("key '" + key + "' must be a boolean, got '" + *v + "'");
    }

    expr::Expr expression(const std::string& key, std::string_view vars) const {
        const std::string text = require(key);
        try {
            return expr::parse(text, vars);
        } catch (const ParseError& e) {
            throw ConfigError("key '" + key + "': " + e.what());
        }
    }

    std::optional<expr::Expr> expression_opt(const std::string& key,
                                             std::string_view vars) const {
        if (!has(key)) return std::nullopt;
        return expression(key, vars);
    }

    /// Overlay other on top of this one (other wins).
    void merge_from(const Config& other) {
        for (const auto& [k, v] : other.values_) values_[k] = v;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

    std::string to_text() const {
        std::ostringstream os;
        for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
        return os.str();
    }

    static Config from_text(const std::string& text) {
        Config c;
        std::istringstream is(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r\n");
                if (b == std::string::npos) return std::string();
                const auto e = s.find_last_not_of(" \t\r\n");
                return s.substr(b, e - b + 1);
            };
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + t + "'");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
            c.set(key, value);
        }
        return c;
    }

    static Config from_json(const std::string& text) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("invalid JSON configuration: ") + e.what());
        }
        if (!j.is_object()) throw ConfigError("JSON configuration must be a flat object");
        Config c;
        for (const auto& [k, v] : j.items()) {
            if (v.is_string())
                c.set(k, v.get<std::string>());
            else if (v.is_boolean())
                c.set(k, v.get<bool>() ? "true" : "false");
            else if (v.is_number())
                c.set(k, v.dump());
            else
                throw ConfigError("key '" + k + "' must be a string, number or boolean");
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '{') return from_json(text);
        return from_text(text);
    }

private:
    std::map<std::string, std::string> values_;

    static double parse_number(const std::string& key, const std::string& text) {
        try {
            const auto e = expr::parse(text, "");
            double v;
            if (!expr::constant_value(e, v)) throw ConfigError("");
            return v;
        } catch (const Error&) {
            throw ConfigError("key '" + key + "' must be a numeric constant, got '" + text +
                              "'");
        }
    }
};

} // namespace fracbound

#endif
