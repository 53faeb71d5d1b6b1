#pragma once

// Metrics report files: a flat CSV (one row per scenario/method) and
// grouped SVG bar charts, one panel per metric.
//
// CSV header (exact): scenario,method,accuracy,precision,recall,f1,runtime_ms
// Values are written in shortest round-trip form; re-parsing reproduces the
// in-memory numbers exactly.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/metrics.hpp"

namespace fsd {

enum class ReportFormat : std::uint8_t { csv = 0, svg_bar_chart = 1 };

inline constexpr const char* kReportCsvHeader =
    "scenario,method,accuracy,precision,recall,f1,runtime_ms";

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

inline double parse_double_field(std::string_view s, std::size_t line_no) {
    double v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("report line " + std::to_string(line_no) + ": bad number '" +
                         std::string(s) + "'");
    return v;
}

} // namespace detail

inline void emit_report_csv(const std::vector<MetricsReport>& reports, const std::string& path) {
    if (reports.empty()) throw InsufficientData("emit_report: no reports");
    std::string buf = kReportCsvHeader;
    buf += '\n';
    for (const auto& r : reports) {
        buf += r.scenario;
        buf += ',';
        buf += r.method;
        buf += ',';
        detail::append_double(buf, r.accuracy);
        buf += ',';
        detail::append_double(buf, r.precision);
        buf += ',';
        detail::append_double(buf, r.recall);
        buf += ',';
        detail::append_double(buf, r.f1);
        buf += ',';
        detail::append_double(buf, r.runtime_ms);
        buf += '\n';
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report CSV: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write: " + path);
}

inline std::vector<MetricsReport> parse_report_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read report CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty report file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kReportCsvHeader) throw ParseError(path + ": bad report header");

    std::vector<MetricsReport> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            const std::size_t pos = rest.find(',');
            if (pos == std::string_view::npos) {
                fields.push_back(rest);
                break;
            }
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        if (fields.size() != 7)
            throw ParseError("report line " + std::to_string(line_no) + ": expected 7 fields");
        MetricsReport r;
        r.scenario = std::string(fields[0]);
        r.method = std::string(fields[1]);
        r.accuracy = detail::parse_double_field(fields[2], line_no);
        r.precision = detail::parse_double_field(fields[3], line_no);
        r.recall = detail::parse_double_field(fields[4], line_no);
        r.f1 = detail::parse_double_field(fields[5], line_no);
        r.runtime_ms = detail::parse_double_field(fields[6], line_no);
        out.push_back(std::move(r));
    }
    return out;
}

namespace detail {

inline const char* bar_color(std::size_t i) {
    static const char* palette[] = {"#4C78A8", "#F58518", "#54A24B", "#E45756",
                                    "#72B7B2", "#B279A2", "#EECA3B", "#9D755D"};
    return palette[i % 8];
}

} // namespace detail

// One grouped bar panel per metric; groups are scenarios, bars are methods.
inline void emit_report_svg(const std::vector<MetricsReport>& reports, const std::string& path) {
    if (reports.empty()) throw InsufficientData("emit_report: no reports");

    std::vector<std::string> scenarios, methods;
    for (const auto& r : reports) {
        if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end())
            scenarios.push_back(r.scenario);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
    }
    const char* metric_names[4] = {"accuracy", "precision", "recall", "f1"};
    auto metric_of = [](const MetricsReport& r, int m) {
        switch (m) {
            case 0: return r.accuracy;
            case 1: return r.precision;
            case 2: return r.recall;
            default: return r.f1;
        }
    };

    const double bar_w = 28, bar_gap = 6, group_gap = 40, left = 60, top_pad = 34;
    const double panel_h = 190, plot_h = 130, bottom_gap = 26;
    const double group_w = methods.size() * (bar_w + bar_gap) + group_gap;
    const double width = std::max(480.0, left + scenarios.size() * group_w + 180);
    const double height = 4 * panel_h + 20;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string((int)width) +
           "\" height=\"" + std::to_string((int)height) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (int m = 0; m < 4; ++m) {
        const double oy = m * panel_h + top_pad;
        svg += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(oy - 12) +
               "\" font-size=\"14\" font-weight=\"bold\">" + metric_names[m] + "</text>\n";
        // axis and gridlines at 0, 0.5, 1
        for (double tick : {0.0, 0.5, 1.0}) {
            const double y = oy + plot_h - tick * plot_h;
            svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(y) +
                   "\" x2=\"" + std::to_string(width - 150) + "\" y2=\"" + std::to_string(y) +
                   "\" stroke=\"#DDD\"/>\n";
            std::string label;
            detail::append_double(label, tick);
            svg += "<text x=\"" + std::to_string(left - 30) + "\" y=\"" + std::to_string(y + 4) +
                   "\" font-size=\"10\">" + label + "</text>\n";
        }
        for (std::size_t g = 0; g < scenarios.size(); ++g) {
            const double gx = left + g * group_w;
            for (std::size_t b = 0; b < methods.size(); ++b) {
                double value = 0.0;
                for (const auto& r : reports)
                    if (r.scenario == scenarios[g] && r.method == methods[b]) {
                        value = metric_of(r, m);
                        break;
                    }
                const double h = std::clamp(value, 0.0, 1.0) * plot_h;
                const double x = gx + b * (bar_w + bar_gap);
                svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" +
                       std::to_string(oy + plot_h - h) + "\" width=\"" + std::to_string(bar_w) +
                       "\" height=\"" + std::to_string(h) + "\" fill=\"" +
                       detail::bar_color(b) + "\"/>\n";
            }
            svg += "<text x=\"" + std::to_string(gx) + "\" y=\"" +
                   std::to_string(oy + plot_h + bottom_gap - 10) + "\" font-size=\"11\">" +
                   scenarios[g] + "</text>\n";
        }
    }
    // legend
    for (std::size_t b = 0; b < methods.size(); ++b) {
        const double y = top_pad + b * 18;
        svg += "<rect x=\"" + std::to_string(width - 140) + "\" y=\"" + std::to_string(y) +
               "\" width=\"12\" height=\"12\" fill=\"" + detail::bar_color(b) + "\"/>\n";
        svg += "<text x=\"" + std::to_string(width - 122) + "\" y=\"" + std::to_string(y + 10) +
               "\" font-size=\"11\">" + methods[b] + "</text>\n";
    }
    svg += "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report SVG: " + path);
    out.write(svg.data(), static_cast<std::streamsize>(svg.size()));
    if (!out) throw IoError("short write: " + path);
}

inline void emit_report(const std::vector<MetricsReport>& reports, const std::string& path,
                        ReportFormat format) {
    if (format == ReportFormat::csv) emit_report_csv(reports, path);
    else emit_report_svg(reports, path);
}

} // namespace fsd
