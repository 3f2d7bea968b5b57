#pragma once

// Flat key-value configuration with [section] headers, explicit unit suffixes
// on physical quantities, and line-precise diagnostics. The parser rejects
// unitless physical values ("pump_power = 0.25" is an error, "= 250 mW" is
// not) and collects every problem instead of stopping at the first.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qfc {

struct ConfigError {
    int line = 0;
    std::string field;
    std::string message;

    std::string format() const {
        std::ostringstream os;
        if (line > 0) os << "line " << line << ": ";
        if (!field.empty()) os << field << ": ";
        os << message;
        return os.str();
    }
};

enum class Unit {
    dimensionless,  // bare fraction/count, '%' allowed
    watt,
    centimeter,
    second,
    gigahertz,
    hertz,
    normalized_efficiency,  // W^-1 cm^-2
    noise_coefficient,      // counts/s/mW/cm/THz
};

namespace detail {

struct UnitEntry {
    std::string_view suffix;
    double factor;
};

inline const std::vector<UnitEntry>& unit_table(Unit u) {
    static const std::vector<UnitEntry> watt{{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}, {"kW", 1e3}};
    static const std::vector<UnitEntry> cm{
        {"cm", 1.0}, {"mm", 0.1}, {"m", 100.0}, {"um", 1e-4}};
    static const std::vector<UnitEntry> sec{
        {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"min", 60.0}};
    static const std::vector<UnitEntry> ghz{
        {"GHz", 1.0}, {"MHz", 1e-3}, {"kHz", 1e-6}, {"THz", 1e3}, {"Hz", 1e-9}};
    static const std::vector<UnitEntry> hz{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}};
    static const std::vector<UnitEntry> none{{"", 1.0}, {"%", 0.01}};
    static const std::vector<UnitEntry> eta_n{{"/W/cm^2", 1.0}, {"%/W/cm^2", 0.01}};
    static const std::vector<UnitEntry> alpha_n{{"kHz/mW/cm/THz", 1e3},
                                                {"Hz/mW/cm/THz", 1.0},
                                                {"counts/s/mW/cm/THz", 1.0}};
    switch (u) {
        case Unit::watt: return watt;
        case Unit::centimeter: return cm;
        case Unit::second: return sec;
        case Unit::gigahertz: return ghz;
        case Unit::hertz: return hz;
        case Unit::dimensionless: return none;
        case Unit::normalized_efficiency: return eta_n;
        case Unit::noise_coefficient: return alpha_n;
    }
    return none;
}

inline const char* unit_name(Unit u) {
    switch (u) {
        case Unit::watt: return "a power (W, mW, uW)";
        case Unit::centimeter: return "a length (cm, mm, m, um)";
        case Unit::second: return "a time (s, ms, us, ns)";
        case Unit::gigahertz: return "a bandwidth (GHz, MHz, kHz, THz)";
        case Unit::hertz: return "a rate (Hz, kHz, MHz)";
        case Unit::dimensionless: return "a dimensionless value";
        case Unit::normalized_efficiency: return "a normalized efficiency (/W/cm^2)";
        case Unit::noise_coefficient: return "a noise coefficient (kHz/mW/cm/THz)";
    }
    return "";
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace detail

/// Parses one "<number> [unit]" token in the given dimension.
inline std::optional<double> parse_quantity(std::string_view text, Unit unit,
                                            std::string& problem) {
    const std::string s = detail::trim(text);
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &pos);
    } catch (const std::exception&) {
        problem = "expected a number, got '" + s + "'";
        return std::nullopt;
    }
    const std::string suffix = detail::trim(s.substr(pos));
    for (const auto& entry : detail::unit_table(unit))
        if (suffix == entry.suffix) return value * entry.factor;
    if (suffix.empty())
        problem = std::string("missing unit; expected ") + detail::unit_name(unit);
    else
        problem = "unknown unit '" + suffix + "'; expected " +
                  detail::unit_name(unit);
    return std::nullopt;
}

/// Parsed config file: section.key -> value text, with source lines kept for
/// diagnostics. Typed access records problems instead of throwing so that
/// validation can report everything at once.
class Config {
public:
    struct Entry {
        std::string text;
        int line = 0;
        mutable bool used = false;
    };

    static Config parse(std::istream& is, std::vector<ConfigError>& errors) {
        Config cfg;
        std::string line;
        std::string section;
        int line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (t.front() == '[') {
                if (t.back() != ']') {
                    errors.push_back({line_no, "", "unterminated section header"});
                    continue;
                }
                section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
                if (section.empty())
                    errors.push_back({line_no, "", "empty section name"});
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                errors.push_back({line_no, "", "expected 'key = value': '" + t + "'"});
                continue;
            }
            const std::string key = detail::trim(std::string_view(t).substr(0, eq));
            const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
            if (key.empty()) {
                errors.push_back({line_no, "", "missing key before '='"});
                continue;
            }
            if (section.empty()) {
                errors.push_back({line_no, key, "key outside any [section]"});
                continue;
            }
            const std::string field = section + "." + key;
            if (cfg.entries_.count(field))
                errors.push_back({line_no, field, "duplicate key"});
            cfg.entries_[field] = Entry{value, line_no, false};
        }
        return cfg;
    }

    static Config parse_file(const std::string& path, std::vector<ConfigError>& errors) {
        std::ifstream is(path);
        if (!is) {
            errors.push_back({0, "", "cannot open config file: " + path});
            return Config{};
        }
        return parse(is, errors);
    }

    bool has(const std::string& field) const { return entries_.count(field) > 0; }
    int line_of(const std::string& field) const {
        auto it = entries_.find(field);
        return it == entries_.end() ? 0 : it->second.line;
    }

    std::optional<double> quantity(const std::string& field, Unit unit,
                                   std::vector<ConfigError>& errors) const {
        auto it = entries_.find(field);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        std::string problem;
        auto v = parse_quantity(it->second.text, unit, problem);
        if (!v) errors.push_back({it->second.line, field, problem});
        return v;
    }

    std::optional<std::vector<double>> quantity_list(const std::string& field, Unit unit,
                                                     std::vector<ConfigError>& errors) const {
        auto it = entries_.find(field);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        std::vector<double> out;
        std::stringstream ss(it->second.text);
        std::string item;
        bool ok = true;
        while (std::getline(ss, item, ',')) {
            std::string problem;
            auto v = parse_quantity(item, unit, problem);
            if (!v) {
                errors.push_back({it->second.line, field, problem});
                ok = false;
                continue;
            }
            out.push_back(*v);
        }
        if (out.empty()) {
            errors.push_back({it->second.line, field, "empty list"});
            ok = false;
        }
        return ok ? std::optional(out) : std::nullopt;
    }

    std::optional<std::uint64_t> integer(const std::string& field,
                                         std::vector<ConfigError>& errors) const {
        auto it = entries_.find(field);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(it->second.text, &pos);
            if (!detail::trim(it->second.text.substr(pos)).empty())
                throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            errors.push_back({it->second.line, field,
                              "expected a non-negative integer, got '" + it->second.text + "'"});
            return std::nullopt;
        }
    }

    std::optional<bool> boolean(const std::string& field,
                                std::vector<ConfigError>& errors) const {
        auto it = entries_.find(field);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        if (it->second.text == "true" || it->second.text == "yes") return true;
        if (it->second.text == "false" || it->second.text == "no") return false;
        errors.push_back({it->second.line, field, "expected true/false"});
        return std::nullopt;
    }

    std::optional<std::string> string(const std::string& field) const {
        auto it = entries_.find(field);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        return it->second.text;
    }

    /// Reports keys nobody consumed (typos, misplaced sections).
    void report_unused(std::vector<ConfigError>& errors) const {
        for (const auto& [field, entry] : entries_)
            if (!entry.used)
                errors.push_back({entry.line, field, "unknown key"});
    }

private:
    std::map<std::string, Entry> entries_;
};

}  // namespace qfc
