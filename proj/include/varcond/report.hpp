#pragma once

// Text and JSON rendering of classification reports. The JSON schema is
// fixed: {problem, residuals, points, verdicts, oracle} with keys always in
// that order, reals printed with 17 significant digits so values round-trip.

#include "varcond/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace varcond {

namespace detail {

inline std::string json_number(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
    return out;
}

template <class T, class F>
std::string json_array(const std::vector<T>& values, F&& render) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += render(values[i]);
    }
    out += "]";
    return out;
}

inline std::string pad(std::string s, std::size_t width) {
    while (s.size() < width) s += ' ';
    return s;
}

/// Compact cell rendering for the human-readable tables; full precision is
/// available in the JSON output.
inline std::string table_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// First grid point that blocks a strict verdict: a point that is neither
// positive nor negative definite if one exists, otherwise the first point
// whose class differs from the first point's.
inline std::size_t first_offending_point(const std::vector<GridPointData>& points) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        const DefinitenessKind k = points[i].definiteness.kind;
        if (k != DefinitenessKind::PositiveDefinite && k != DefinitenessKind::NegativeDefinite)
            return i;
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        if (points[i].definiteness.kind != points[0].definiteness.kind) return i;
    return 0;
}

inline std::string emit_json(const ClassificationReport& r) {
    const ProblemSummary& p = r.problem;
    std::string out = "{\n";

    out += "  \"problem\": {";
    out += "\"independent\": " +
           json_array(p.independent, [](const std::string& s) { return json_string(s); });
    out += ", \"dependent\": " +
           json_array(p.dependent, [](const std::string& s) { return json_string(s); });
    out += ", \"order\": " + std::to_string(p.order);
    out += ", \"lagrangian\": " + json_string(p.lagrangian);
    out += ", \"domain\": " + json_array(p.domain, [](const std::array<double, 2>& b) {
               return "[" + json_number(b[0]) + ", " + json_number(b[1]) + "]";
           });
    out += ", \"candidate\": " +
           json_array(p.candidate, [](const std::string& s) { return json_string(s); });
    out += ", \"numerics\": {\"grid\": " +
           json_array(p.numerics.grid, [](int g) { return std::to_string(g); });
    out += ", \"quad_nodes\": " + std::to_string(p.numerics.quad_nodes);
    out += ", \"tol_pd\": " + json_number(p.numerics.tol_pd);
    out += ", \"tol_residual\": " + json_number(p.numerics.tol_residual);
    out += ", \"seed\": " + std::to_string(p.numerics.seed);
    out += "}},\n";

    out += "  \"residuals\": " +
           json_array(r.residual_max, [](double v) { return json_number(v); }) + ",\n";

    out += "  \"points\": [";
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const GridPointData& pt = r.points[i];
        out += i ? ",\n    " : "\n    ";
        out += "{\"x\": " + json_array(pt.x, [](double v) { return json_number(v); });
        out += ", \"lambda_min\": " + json_number(pt.definiteness.lambda_min);
        out += ", \"lambda_max\": " + json_number(pt.definiteness.lambda_max);
        out += ", \"definiteness\": " +
               json_string(to_string(pt.definiteness.kind));
        out += ", \"B\": " + json_array(pt.B, [](double v) { return json_number(v); });
        out += "}";
    }
    out += r.points.empty() ? "],\n" : "\n  ],\n";

    out += "  \"verdicts\": {\"sufficient\": " + json_string(to_string(r.sufficient));
    out += ", \"necessary\": " +
           json_string(r.necessary ? to_string(*r.necessary) : "Skipped");
    out += ", \"not_critical\": " + std::string(r.critical ? "false" : "true");
    out += "},\n";

    if (r.oracle) {
        const OracleRecord& o = *r.oracle;
        out += "  \"oracle\": {\"fd_second\": " + json_number(o.fd_second);
        out += ", \"quadratic_form\": " + json_number(o.quadratic_form);
        out += ", \"rel_gap\": " + json_number(o.rel_gap);
        out += ", \"first_variation_max\": " + json_number(o.first_variation_max);
        out += ", \"trials\": " + std::to_string(o.trials.size());
        out += "}\n";
    } else {
        out += "  \"oracle\": null\n";
    }
    out += "}\n";
    return out;
}

inline std::string emit_text(const ClassificationReport& r) {
    const ProblemSummary& p = r.problem;
    std::string out;
    out += "problem: n=" + std::to_string(p.independent.size()) +
           " m=" + std::to_string(p.dependent.size()) +
           " s=" + std::to_string(p.order) + "\n";
    out += "lagrangian: " + p.lagrangian + "\n";
    for (std::size_t i = 0; i < p.domain.size(); ++i)
        out += "domain: " + p.independent[i] + " in ]" + format_double(p.domain[i][0]) +
               ", " + format_double(p.domain[i][1]) + "[\n";
    for (std::size_t j = 0; j < p.candidate.size(); ++j)
        out += "candidate: " + p.dependent[j] + " = " + p.candidate[j] + "\n";

    out += "\nresidual max per equation:\n";
    for (std::size_t j = 0; j < r.residual_max.size(); ++j)
        out += "  " + p.dependent[j] + ": " + format_double(r.residual_max[j]) + "\n";
    out += std::string("critical: ") + (r.critical ? "yes" : "NO") +
           " (tol_residual = " + format_double(p.numerics.tol_residual) + ")\n";

    if (!r.critical) {
        out += "\nverdicts skipped: candidate is not critical (NotCritical)\n";
        out += "sufficient: Inconclusive\nnecessary: Skipped\n";
    } else {
        out += "\ngrid spectra (" + std::to_string(r.points.size()) + " points):\n";
        std::string header = "  ";
        for (const std::string& name : p.independent) header += pad(name, 17);
        header += pad("lambda_min", 17) + pad("lambda_max", 17) + pad("definiteness", 22);
        for (std::size_t l = 0; l < (r.points.empty() ? 0 : r.points[0].B.size()); ++l)
            header += pad("B" + std::to_string(l), 17);
        out += header + "\n";
        for (const GridPointData& pt : r.points) {
            std::string row = "  ";
            for (double x : pt.x) row += pad(table_number(x), 17);
            row += pad(table_number(pt.definiteness.lambda_min), 17);
            row += pad(table_number(pt.definiteness.lambda_max), 17);
            row += pad(to_string(pt.definiteness.kind), 22);
            for (double b : pt.B) row += pad(table_number(b), 17);
            out += row + "\n";
        }

        out += "\nsufficient: " + std::string(to_string(r.sufficient)) + "\n";
        if (r.sufficient == SufficientVerdict::Inconclusive && !r.points.empty()) {
            const std::size_t i = first_offending_point(r.points);
            const GridPointData& pt = r.points[i];
            out += "  first offending grid point: #" + std::to_string(i) + " x=" +
                   format_point(pt.x) +
                   " lambda_min=" + format_double(pt.definiteness.lambda_min) +
                   " lambda_max=" + format_double(pt.definiteness.lambda_max) + "\n";
        }
        out += "necessary: " + std::string(r.necessary ? to_string(*r.necessary) : "Skipped") +
               "\n";
        out += "note: verdicts are sampled evidence on the grid, not a proof for all x.\n";
    }

    if (r.oracle) {
        const OracleRecord& o = *r.oracle;
        out += "\nsecond-variation oracle (" + std::to_string(o.trials.size()) +
               " trials, seed " + std::to_string(p.numerics.seed) + "):\n";
        out += "  worst rel gap |FD - QF| / max(1, |QF|) = " + format_double(o.rel_gap) + "\n";
        out += "  fd_second = " + format_double(o.fd_second) +
               "  quadratic_form = " + format_double(o.quadratic_form) + "\n";
        out += "  max |first variation| (boundary-vanishing phi) = " +
               format_double(o.first_variation_max) + "\n";
    }
    return out;
}

} // namespace detail

/// Render a classification report. JSON mode emits the stable schema
/// {problem, residuals, points, verdicts, oracle}.
inline std::string emit_report(const ClassificationReport& r, bool json) {
    return json ? detail::emit_json(r) : detail::emit_text(r);
}

} // namespace varcond
