#pragma once

// Output helpers: CSV writers for fields and tables, plus a small
// deterministic JSON value tree (doubles printed with %.17g).

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lespectra/geometry.hpp"

namespace lespectra {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Field CSV: header row, one row per node in lexicographic (i, then j)
/// order, axis coordinates first, value last.
inline void write_field_csv(const std::string& path, const Field& f,
                            const std::string& value_name = "value") {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    const Grid& g = f.grid();
    os << (g.dim() == 2 ? "x,y," : "x,") << value_name << "\n";
    for (int i = 0; i < g.npts(0); ++i) {
        if (g.dim() == 1) {
            auto pt = g.point({i, 0});
            os << fmt_double(pt[0]) << ',' << fmt_double(f.at({i, 0})) << "\n";
        } else {
            for (int j = 0; j < g.npts(1); ++j) {
                auto pt = g.point({i, j});
                os << fmt_double(pt[0]) << ',' << fmt_double(pt[1]) << ','
                   << fmt_double(f.at({i, j})) << "\n";
            }
        }
    }
}

/// Generic numeric table CSV: header from column names, rows as given.
inline void write_table_csv(const std::string& path,
                            const std::vector<std::string>& columns,
                            const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    for (std::size_t c = 0; c < columns.size(); ++c)
        os << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& r : rows) {
        if (r.size() != columns.size())
            throw std::invalid_argument("write_table_csv: ragged row");
        for (std::size_t c = 0; c < r.size(); ++c)
            os << fmt_double(r[c]) << (c + 1 < r.size() ? "," : "\n");
    }
}

/// Minimal ordered JSON tree for result files; insertion order preserved.
class JsonValue {
public:
    JsonValue() : kind_(Kind::Null) {}
    JsonValue(double v) : kind_(Kind::Number), num_(v) {}
    JsonValue(int v) : kind_(Kind::Number), num_(v), integral_(true) {}
    JsonValue(bool v) : kind_(Kind::Bool), flag_(v) {}
    JsonValue(const char* s) : kind_(Kind::String), str_(s) {}
    JsonValue(std::string s) : kind_(Kind::String), str_(std::move(s)) {}

    static JsonValue object() {
        JsonValue v;
        v.kind_ = Kind::Object;
        return v;
    }
    static JsonValue array() {
        JsonValue v;
        v.kind_ = Kind::Array;
        return v;
    }

    JsonValue& set(const std::string& key, JsonValue v) {
        if (kind_ != Kind::Object) throw std::logic_error("json: not an object");
        keys_.push_back(key);
        members_.push_back(std::make_shared<JsonValue>(std::move(v)));
        return *this;
    }
    JsonValue& push(JsonValue v) {
        if (kind_ != Kind::Array) throw std::logic_error("json: not an array");
        members_.push_back(std::make_shared<JsonValue>(std::move(v)));
        return *this;
    }

    void dump(std::string& out, int indent = 0) const {
        auto pad = [&](int n) { out.append(static_cast<std::size_t>(2 * n), ' '); };
        switch (kind_) {
            case Kind::Null: out += "null"; break;
            case Kind::Bool: out += flag_ ? "true" : "false"; break;
            case Kind::Number:
                if (integral_ && num_ == static_cast<long long>(num_))
                    out += std::to_string(static_cast<long long>(num_));
                else
                    out += fmt_double(num_);
                break;
            case Kind::String:
                out += '"';
                for (char c : str_) {
                    if (c == '"' || c == '\\') out += '\\';
                    out += c;
                }
                out += '"';
                break;
            case Kind::Object:
                out += "{";
                for (std::size_t k = 0; k < keys_.size(); ++k) {
                    out += k ? ",\n" : "\n";
                    pad(indent + 1);
                    out += '"';
                    out += keys_[k];
                    out += "\": ";
                    members_[k]->dump(out, indent + 1);
                }
                if (!keys_.empty()) {
                    out += "\n";
                    pad(indent);
                }
                out += "}";
                break;
            case Kind::Array:
                out += "[";
                for (std::size_t k = 0; k < members_.size(); ++k) {
                    out += k ? ",\n" : "\n";
                    pad(indent + 1);
                    members_[k]->dump(out, indent + 1);
                }
                if (!members_.empty()) {
                    out += "\n";
                    pad(indent);
                }
                out += "]";
                break;
        }
    }

    std::string dump() const {
        std::string out;
        dump(out);
        out += "\n";
        return out;
    }

private:
    enum class Kind { Null, Bool, Number, String, Object, Array };
    Kind kind_;
    double num_ = 0.0;
    bool integral_ = false;
    bool flag_ = false;
    std::string str_;
    std::vector<std::string> keys_;
    std::vector<std::shared_ptr<JsonValue>> members_;
};

inline void write_json(const std::string& path, const JsonValue& v) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << v.dump();
}

}  // namespace lespectra
