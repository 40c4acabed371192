#pragma once

// Minimal TOML subset reader/writer used for scenario files.
// Supported: [table.subtable] headers, key = value with integers, floats,
// booleans, quoted strings, and flat arrays of scalars. Comments (#) and
// blank lines are skipped. Unsupported syntax raises ParseError with a
// line number.

#include <cctype>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace iptm::toml {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

using Value = std::variant<int64_t, double, bool, std::string, std::vector<double>>;

class Document {
  public:
    void set(const std::string& key, Value v) { values_[key] = std::move(v); }

    bool contains(const std::string& key) const { return values_.count(key) > 0; }

    double get_number(const std::string& key) const {
        const Value& v = require(key);
        if (std::holds_alternative<int64_t>(v)) return static_cast<double>(std::get<int64_t>(v));
        if (std::holds_alternative<double>(v)) return std::get<double>(v);
        throw ParseError("key '" + key + "' is not a number");
    }

    double get_number_or(const std::string& key, double fallback) const {
        return contains(key) ? get_number(key) : fallback;
    }

    int64_t get_integer(const std::string& key) const {
        const Value& v = require(key);
        if (!std::holds_alternative<int64_t>(v))
            throw ParseError("key '" + key + "' is not an integer");
        return std::get<int64_t>(v);
    }

    int64_t get_integer_or(const std::string& key, int64_t fallback) const {
        return contains(key) ? get_integer(key) : fallback;
    }

    bool get_bool(const std::string& key) const {
        const Value& v = require(key);
        if (!std::holds_alternative<bool>(v)) throw ParseError("key '" + key + "' is not a bool");
        return std::get<bool>(v);
    }

    bool get_bool_or(const std::string& key, bool fallback) const {
        return contains(key) ? get_bool(key) : fallback;
    }

    std::string get_string(const std::string& key) const {
        const Value& v = require(key);
        if (!std::holds_alternative<std::string>(v))
            throw ParseError("key '" + key + "' is not a string");
        return std::get<std::string>(v);
    }

    std::string get_string_or(const std::string& key, const std::string& fallback) const {
        return contains(key) ? get_string(key) : fallback;
    }

    const std::map<std::string, Value>& entries() const { return values_; }

  private:
    const Value& require(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ParseError("missing key '" + key + "'");
        return it->second;
    }

    std::map<std::string, Value> values_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline Value parse_scalar(const std::string& tok, int lineno) {
    std::string t = trim(tok);
    if (t.empty()) throw ParseError("empty value at line " + std::to_string(lineno));
    if (t == "true") return true;
    if (t == "false") return false;
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"')
            throw ParseError("unterminated string at line " + std::to_string(lineno));
        return t.substr(1, t.size() - 2);
    }
    // integer if it parses fully without . e E
    bool looks_int = t.find_first_of(".eE") == std::string::npos;
    try {
        size_t pos = 0;
        if (looks_int) {
            int64_t i = std::stoll(t, &pos);
            if (pos == t.size()) return i;
        }
        double d = std::stod(t, &pos);
        if (pos == t.size()) return d;
    } catch (const std::exception&) {
    }
    throw ParseError("cannot parse value '" + t + "' at line " + std::to_string(lineno));
}

}  // namespace detail

/// Parse a TOML-subset document from text. Keys are flattened as
/// "table.subtable.key".
inline Document parse(const std::string& text) {
    Document doc;
    std::istringstream in(text);
    std::string line, prefix;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(detail::strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("malformed table header at line " + std::to_string(lineno));
            prefix = detail::trim(line.substr(1, line.size() - 2));
            if (prefix.empty())
                throw ParseError("empty table name at line " + std::to_string(lineno));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key = value at line " + std::to_string(lineno));
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key at line " + std::to_string(lineno));
        std::string full = prefix.empty() ? key : prefix + "." + key;
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']')
                throw ParseError("unterminated array at line " + std::to_string(lineno));
            std::vector<double> arr;
            std::string body = val.substr(1, val.size() - 2);
            std::istringstream items(body);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = detail::trim(item);
                if (item.empty()) continue;
                Value v = detail::parse_scalar(item, lineno);
                if (std::holds_alternative<int64_t>(v))
                    arr.push_back(static_cast<double>(std::get<int64_t>(v)));
                else if (std::holds_alternative<double>(v))
                    arr.push_back(std::get<double>(v));
                else
                    throw ParseError("non-numeric array element at line " + std::to_string(lineno));
            }
            doc.set(full, arr);
        } else {
            doc.set(full, detail::parse_scalar(val, lineno));
        }
    }
    return doc;
}

/// Serialize a flat key set back to TOML, grouping keys by their table
/// prefix. Round-trips everything `parse` accepts.
inline std::string serialize(const Document& doc) {
    // group by prefix (text before last '.')
    std::map<std::string, std::vector<std::pair<std::string, const Value*>>> tables;
    for (const auto& [key, value] : doc.entries()) {
        size_t dot = key.rfind('.');
        std::string table = dot == std::string::npos ? "" : key.substr(0, dot);
        std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
        tables[table].emplace_back(leaf, &value);
    }
    std::ostringstream out;
    out.precision(17);
    auto emit = [&out](const std::string& key, const Value& v) {
        out << key << " = ";
        if (std::holds_alternative<int64_t>(v)) {
            out << std::get<int64_t>(v);
        } else if (std::holds_alternative<double>(v)) {
            out << std::get<double>(v);
        } else if (std::holds_alternative<bool>(v)) {
            out << (std::get<bool>(v) ? "true" : "false");
        } else if (std::holds_alternative<std::string>(v)) {
            out << '"' << std::get<std::string>(v) << '"';
        } else {
            const auto& arr = std::get<std::vector<double>>(v);
            out << '[';
            for (size_t i = 0; i < arr.size(); ++i) out << (i ? ", " : "") << arr[i];
            out << ']';
        }
        out << '\n';
    };
    bool first = true;
    for (const auto& [table, entries] : tables) {
        if (!table.empty()) {
            if (!first) out << '\n';
            out << '[' << table << "]\n";
        }
        for (const auto& [leaf, value] : entries) emit(leaf, *value);
        first = false;
    }
    return out.str();
}

}  // namespace iptm::toml
