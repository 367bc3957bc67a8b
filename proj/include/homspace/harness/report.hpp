#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "homspace/io.hpp"

namespace homspace {

struct ReportRow {
    std::string check;
    std::string subject;  // space label or instance
    std::string step;
    double measured = 0;
    double bound = 0;
    bool pass = true;
    bool required = true;  // informational rows never decide an expectation
    double runtime_ms = 0;
    std::string witness;
    bool runtime = false;  // measured value is wall-clock time
};

struct CheckOutcome {
    std::string check;
    std::string expect;  // pass | fail | error
    bool met = true;
    std::size_t rows = 0;
    std::size_t failed = 0;
    std::string error;
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string input_hash;
    std::vector<ReportRow> rows;
    std::vector<CheckOutcome> outcomes;
    bool ok() const {
        for (const auto& o : outcomes)
            if (!o.met) return false;
        return true;
    }
};

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

/// Non-finite numbers are written as strings so that reports stay valid JSON.
inline json num_json(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline json environment_stamp() {
    json e;
    e["library"] = "homspace 1.0.0";
#ifdef __VERSION__
    e["compiler"] = __VERSION__;
#endif
    e["cxx"] = long(__cplusplus);
    return e;
}

/// JSON report; the trailing "timing" block and the measured values of runtime rows are the only
/// run-dependent fields, and both are dropped when `with_timing` is false.
inline json report_json(const RunReport& r, bool with_timing = true) {
    json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["input_hash"] = r.input_hash;
    j["environment"] = environment_stamp();
    j["ok"] = r.ok();
    json checks = json::array();
    for (const auto& o : r.outcomes) {
        json c{{"check", o.check}, {"expect", o.expect}, {"met", o.met}, {"rows", o.rows}, {"failed", o.failed}};
        if (!o.error.empty()) c["error"] = o.error;
        checks.push_back(c);
    }
    j["checks"] = checks;
    json rows = json::array();
    for (const auto& row : r.rows) {
        const bool hide = row.runtime && !with_timing;
        rows.push_back({{"check", row.check},
                        {"subject", row.subject},
                        {"step", row.step},
                        {"measured", hide ? json(nullptr) : num_json(row.measured)},
                        {"bound", num_json(row.bound)},
                        {"slack", hide ? json(nullptr) : num_json(row.bound - row.measured)},
                        {"pass", row.pass},
                        {"required", row.required},
                        {"witness", row.witness}});
    }
    j["rows"] = rows;
    if (with_timing) {
        json t = json::array();
        for (const auto& row : r.rows) t.push_back(row.runtime_ms);
        j["timing"] = {{"runtime_ms", t}};
    }
    return j;
}

inline std::string csv_field(const std::string& s) {
    std::string o = "\"";
    for (char c : s) {
        if (c == '"') o += '"';
        o += c;
    }
    return o + "\"";
}

inline std::string report_csv(const RunReport& r) {
    std::ostringstream os;
    os << "check,subject,step,measured,bound,slack,pass,required,runtime_ms,witness\n";
    for (const auto& row : r.rows)
        os << csv_field(row.check) << ',' << csv_field(row.subject) << ',' << csv_field(row.step) << ','
           << fmt_num(row.measured) << ',' << fmt_num(row.bound) << ',' << fmt_num(row.bound - row.measured) << ','
           << (row.pass ? "true" : "false") << ',' << (row.required ? "true" : "false") << ','
           << fmt_num(row.runtime_ms) << ',' << csv_field(row.witness) << '\n';
    return os.str();
}

}  // namespace homspace
