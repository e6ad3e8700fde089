// Copyright 2026 The bellcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bellcert/core.hpp"

namespace bellcert::report {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

/// One pass/fail check. `source` names the payload field(s) the measured
/// value is computed from.
struct Verdict {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    std::string comparison;  // "<=" or ">="
    std::string source;

    bool pass() const {
        if (!std::isfinite(measured)) return false;
        return comparison == ">=" ? measured >= threshold : measured <= threshold;
    }

    Json to_json() const {
        return Json{{"pass", pass()}, {"measured", measured}, {"threshold", threshold},
                    {"comparison", comparison}, {"source", source}};
    }
};

inline Verdict at_most(std::string name, double measured, double threshold, std::string source) {
    return {std::move(name), measured, threshold, "<=", std::move(source)};
}

inline Verdict at_least(std::string name, double measured, double threshold, std::string source) {
    return {std::move(name), measured, threshold, ">=", std::move(source)};
}

inline Json to_json(const RVector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

inline Json to_json(const RMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

/// Complex matrix as rows of [re, im] pairs.
inline Json to_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(row);
    }
    return rows;
}

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    // Keep doubles recognisable as floating point after a round trip.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

namespace detail {

inline void dump(const Json& j, std::ostream& os, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: keys already sorted
                if (!first) os << ",\n";
                first = false;
                os << pad << Json(it.key()).dump() << ": ";
                dump(it.value(), os, indent, depth + 1);
            }
            os << "\n" << close_pad << "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            bool scalar_only = true;
            for (const auto& e : j) scalar_only = scalar_only && e.is_primitive();
            if (scalar_only) {
                os << "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) os << ", ";
                    dump(j[i], os, indent, depth + 1);
                }
                os << "]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ",\n";
                os << pad;
                dump(j[i], os, indent, depth + 1);
            }
            os << "\n" << close_pad << "]";
            return;
        }
        case Json::value_t::number_float:
            os << format_double(j.get<double>());
            return;
        default:
            os << j.dump();
            return;
    }
}

inline std::string csv_field(const Json& v) {
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    if (v.is_null()) return "";
    return v.dump();
}

}  // namespace detail

/// Canonical JSON: keys sorted, two-space indentation, doubles printed with
/// 17 significant digits, trailing newline.
inline std::string to_canonical_json(const Json& j) {
    std::ostringstream os;
    detail::dump(j, os, 2, 0);
    os << "\n";
    return os.str();
}

/// Flat CSV from an array of flat objects; the header is the sorted union of
/// keys.
inline std::string to_csv(const Json& rows) {
    std::map<std::string, int> columns;
    for (const auto& r : rows) {
        for (auto it = r.begin(); it != r.end(); ++it) columns.emplace(it.key(), 0);
    }
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, _] : columns) {
        os << (first ? "" : ",") << k;
        first = false;
    }
    os << "\n";
    for (const auto& r : rows) {
        first = true;
        for (const auto& [k, _] : columns) {
            os << (first ? "" : ",");
            first = false;
            if (r.contains(k)) os << detail::csv_field(r.at(k));
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace bellcert::report
