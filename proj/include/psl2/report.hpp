// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "error.hpp"
#include "specfun/complex.hpp"

namespace psl2 {

// One line of a structured report: check,inputs,value,residual,tol,pass
struct CheckRecord {
    std::string check;
    std::string inputs;
    cplx value = 0.0;
    double residual = 0.0;
    double tol = 0.0;
    bool pass = false;
};

inline CheckRecord make_check(std::string check, std::string inputs, cplx value, double residual, double tol) {
    // tol = 0 asks for an exact result
    bool ok = std::isfinite(residual) && (residual < tol || (tol == 0.0 && residual == 0.0));
    return {std::move(check), std::move(inputs), value, residual, tol, ok};
}

struct SuiteReport {
    std::string suite;
    std::vector<CheckRecord> records;

    bool pass() const {
        for (auto& r : records)
            if (!r.pass) return false;
        return !records.empty();
    }
    std::vector<std::string> failing() const {
        std::vector<std::string> out;
        for (auto& r : records)
            if (!r.pass) out.push_back(r.check + "[" + r.inputs + "]");
        return out;
    }
    void add(CheckRecord r) { records.push_back(std::move(r)); }
};

inline std::string format_real(double v, int digits = 17) {
    char b[40];
    std::snprintf(b, sizeof b, "%.*g", digits, v);
    return b;
}

// a+bi; a real value prints without the imaginary part
inline std::string format_complex(cplx z, int digits = 17) {
    if (z.imag() == 0.0) return format_real(z.real(), digits);
    char b[96];
    std::snprintf(b, sizeof b, "%.*g%+.*gi", digits, z.real(), digits, z.imag());
    return b;
}

// Parses a, bi, a+bi, a-bi, i, -i (also with j).
inline cplx parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (c != ' ') s += c;
    if (s.empty()) throw precondition_error("complex literal: empty");
    auto num = [&](const std::string& t, const char* what) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &pos);
        } catch (...) {
            pos = 0;
        }
        if (pos != t.size() || !std::isfinite(v))
            throw precondition_error(std::string("complex literal: bad ") + what + " part in '" + text + "'");
        return v;
    };
    char last = s.back();
    if (last != 'i' && last != 'j') return {num(s, "real"), 0.0};
    std::string body = s.substr(0, s.size() - 1);
    // split at the last sign that is not an exponent sign and not leading
    std::size_t cut = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;)
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            cut = k;
            break;
        }
    if (cut == std::string::npos) return {0.0, num(body, "imaginary")};
    return {num(body.substr(0, cut), "real"), num(body.substr(cut), "imaginary")};
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

inline std::string record_line(const CheckRecord& r) {
    return csv_field(r.check) + "," + csv_field(r.inputs) + "," + csv_field(format_complex(r.value)) + "," +
           format_real(r.residual) + "," + format_real(r.tol) + "," + (r.pass ? "true" : "false");
}

inline const char* record_header() { return "check,inputs,value,residual,tol,pass"; }

} // namespace psl2
