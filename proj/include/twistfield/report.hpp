// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file report.hpp
 * @brief Check records, tolerance overrides and report emission.
 *
 * report.json holds only deterministic fields; wall times go to
 * summary.txt and timings.csv.
 */

#pragma once

#include "twistfield/core.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace twistfield {

/// A residual must stay at or below its tolerance; a witness must exceed it.
enum class Comparison { AtMost, Exceeds };

struct CheckRecord {
    std::string suite;
    std::string name;
    std::string anchor;  ///< the identity checked, or "plumbing"
    double residual = 0.0;
    double tolerance = 0.0;
    Comparison comparison = Comparison::AtMost;
    bool pass = false;
    std::string restrictions;
    std::vector<std::string> conventions;
    double wall_seconds = 0.0;  ///< not serialized

    std::string key() const { return suite + "/" + name; }
    void evaluate() {
        pass = std::isfinite(residual) && (comparison == Comparison::AtMost ? residual <= tolerance : residual > tolerance);
    }
};

inline CheckRecord make_record(std::string suite, std::string name, std::string anchor, double residual, double tolerance,
                               Comparison cmp = Comparison::AtMost, std::string restrictions = "none",
                               std::vector<std::string> conventions = {}) {
    CheckRecord r{std::move(suite), std::move(name), std::move(anchor), residual, tolerance, cmp, false,
                  std::move(restrictions), std::move(conventions), 0.0};
    r.evaluate();
    return r;
}

/// Overrides keyed by "suite/name", "suite" or "*"; the most specific wins.
class ToleranceTable {
public:
    void set(const std::string& key, double value) {
        require(std::isfinite(value) && value >= 0.0, ErrorKind::InvalidArgument, "tolerance for '" + key + "' must be a finite value >= 0");
        table_[key] = value;
    }
    bool empty() const { return table_.empty(); }
    const std::map<std::string, double>& entries() const { return table_; }

    void apply(CheckRecord& r) const {
        for (const std::string& k : {r.key(), r.suite, std::string("*")}) {
            const auto it = table_.find(k);
            if (it != table_.end()) {
                r.tolerance = it->second;
                break;
            }
        }
        r.evaluate();
    }

    /// Parses "KEY=VAL".
    static std::pair<std::string, double> parse(const std::string& arg) {
        const auto eq = arg.find('=');
        require(eq != std::string::npos && eq > 0, ErrorKind::InvalidArgument, "tolerance override must be KEY=VAL, got '" + arg + "'");
        const std::string val = arg.substr(eq + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(used == val.size() && used > 0, ErrorKind::InvalidArgument, "tolerance value is not a number: '" + val + "'");
        return {arg.substr(0, eq), v};
    }

private:
    std::map<std::string, double> table_;
};

inline nlohmann::ordered_json to_json(const CheckRecord& r) {
    nlohmann::ordered_json j;
    j["suite"] = r.suite;
    j["name"] = r.name;
    j["anchor"] = r.anchor;
    j["residual"] = r.residual;
    j["tolerance"] = r.tolerance;
    j["comparison"] = r.comparison == Comparison::AtMost ? "at_most" : "exceeds";
    j["pass"] = r.pass;
    j["restrictions"] = r.restrictions;
    j["conventions"] = r.conventions;
    return j;
}

inline std::string report_json(const std::vector<CheckRecord>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
}

inline bool all_pass(const std::vector<CheckRecord>& records) {
    for (const auto& r : records)
        if (!r.pass) return false;
    return true;
}

inline std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline void write_summary(std::ostream& os, const std::vector<CheckRecord>& records) {
    std::size_t failed = 0;
    for (const auto& r : records) {
        failed += !r.pass;
        os << (r.pass ? "PASS " : "FAIL ") << r.key() << "  residual=" << format_sci(r.residual)
           << (r.comparison == Comparison::AtMost ? " <= " : " > ") << format_sci(r.tolerance) << "  [" << format_sci(r.wall_seconds)
           << " s]\n";
    }
    os << records.size() - failed << "/" << records.size() << " checks passed\n";
}

inline void write_timings_csv(std::ostream& os, const std::vector<CheckRecord>& records) {
    os << "suite,name,wall_seconds\n";
    for (const auto& r : records) os << r.suite << "," << r.name << "," << r.wall_seconds << "\n";
}

} // namespace twistfield
