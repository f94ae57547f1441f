#pragma once

// Report documents written by the command-line tool, as JSON or CSV.
//
// JSON: {command, config, results, properties, runtime_seconds}, keys in
// insertion order. CSV: one block per table (header row, then one row per
// entry), then a `name,value` block of scalar results, then a
// `name,value,tolerance,passed` block of properties; blocks are separated
// by a blank line. Numbers use the shortest round-trip decimal form.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hypvar::report {

using Json = nlohmann::ordered_json;
using Cell = std::variant<double, std::int64_t, std::string>;

struct Property {
    std::string name;
    double value = 0.0;     // the measured quantity the tolerance applies to
    double tolerance = 0.0;
    bool passed = false;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Document {
    std::string command;
    Json config = Json::object();
    std::vector<std::pair<std::string, Cell>> scalars;
    std::vector<Table> tables;
    std::vector<Property> properties;
    double runtime_seconds = 0.0;

    void scalar(std::string name, Cell v) { scalars.emplace_back(std::move(name), std::move(v)); }

    /// Records `value <= bound` (or `value >= bound` with at_least).
    bool check(std::string name, double value, double bound, bool at_least = false) {
        const bool ok = at_least ? value >= bound : value <= bound;
        properties.push_back({std::move(name), value, bound, ok});
        return ok;
    }

    bool all_passed() const {
        for (const auto& p : properties)
            if (!p.passed) return false;
        return true;
    }

    std::size_t passed_count() const {
        std::size_t n = 0;
        for (const auto& p : properties) n += p.passed ? 1 : 0;
        return n;
    }
};

/// Shortest decimal that reads back to the same double; inf and nan spelled out.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline Json cell_json(const Cell& c) {
    return std::visit([](const auto& v) { return Json(v); }, c);
}

inline std::string cell_csv(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

// nlohmann writes non-finite doubles as null; keep them readable instead.
inline Json number_json(double x) {
    return std::isfinite(x) ? Json(x) : Json(format_number(x));
}

inline Json to_json(const Document& doc) {
    Json results = Json::object();
    for (const auto& [name, v] : doc.scalars) {
        const auto* d = std::get_if<double>(&v);
        results[name] = d ? number_json(*d) : cell_json(v);
    }
    for (const auto& t : doc.tables) {
        Json rows = Json::array();
        for (const auto& row : t.rows) {
            Json obj = Json::object();
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                const auto* d = std::get_if<double>(&row[c]);
                obj[t.columns[c]] = d ? number_json(*d) : cell_json(row[c]);
            }
            rows.push_back(std::move(obj));
        }
        results[t.name] = std::move(rows);
    }
    Json props = Json::array();
    for (const auto& p : doc.properties)
        props.push_back({{"name", p.name},
                         {"value", number_json(p.value)},
                         {"tolerance", number_json(p.tolerance)},
                         {"passed", p.passed}});
    return {{"command", doc.command},
            {"config", doc.config},
            {"results", std::move(results)},
            {"properties", std::move(props)},
            {"runtime_seconds", doc.runtime_seconds}};
}

inline void write_json(std::ostream& os, const Document& doc) {
    os << to_json(doc).dump(2) << '\n';
}

inline void write_csv(std::ostream& os, const Document& doc) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    bool first = true;
    auto separate = [&] {
        if (!first) os << '\n';
        first = false;
    };
    for (const auto& t : doc.tables) {
        separate();
        line(t.columns);
        for (const auto& row : t.rows) {
            std::vector<std::string> cells;
            for (const auto& c : row) cells.push_back(cell_csv(c));
            line(cells);
        }
    }
    separate();
    line({"name", "value"});
    line({"command", doc.command});
    for (const auto& [name, v] : doc.scalars) line({name, cell_csv(v)});
    separate();
    line({"name", "value", "tolerance", "passed"});
    for (const auto& p : doc.properties)
        line({p.name, format_number(p.value), format_number(p.tolerance),
              p.passed ? "true" : "false"});
}

} // namespace hypvar::report
