#pragma once

// Alert summary over one detection batch: the attack five-tuples, traffic
// volume, and the top attack source IPs, in a structured text form and as a
// CSV of flagged flows.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "fsd/dataset.hpp"
#include "fsd/error.hpp"
#include "fsd/flow.hpp"
#include "fsd/model.hpp"

namespace fsd {

struct AlertSummary {
    struct AttackFlow {
        std::size_t flow_index;
        float probability;
    };
    std::vector<AttackFlow> attack_flows;
    std::size_t total_attack_flows = 0;
    std::uint64_t total_attack_bytes = 0;
    std::vector<std::pair<std::string, std::size_t>> top_sources; // ip, flow count
    std::uint64_t window_start = 0;
    std::uint64_t window_end = 0;
};

inline AlertSummary build_alert_summary(const std::vector<FlowRecord>& flows,
                                        const std::vector<FlowVerdict>& verdicts,
                                        std::size_t top_n = 10) {
    AlertSummary a;
    std::map<std::string, std::size_t> sources; // ordered map keeps ties deterministic
    bool first = true;
    for (const auto& f : flows) {
        if (first || f.timestamp < a.window_start) a.window_start = f.timestamp;
        if (first || f.timestamp > a.window_end) a.window_end = f.timestamp;
        first = false;
    }
    for (const auto& v : verdicts) {
        if (!v.attack) continue;
        const FlowRecord& f = flows[v.flow_index];
        a.attack_flows.push_back({v.flow_index, v.probability});
        a.total_attack_bytes += f.total_bytes;
        ++sources[f.src_ip];
    }
    a.total_attack_flows = a.attack_flows.size();
    a.top_sources.assign(sources.begin(), sources.end());
    std::stable_sort(a.top_sources.begin(), a.top_sources.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    if (a.top_sources.size() > top_n) a.top_sources.resize(top_n);
    return a;
}

inline std::string alert_to_text(const AlertSummary& a, const std::vector<FlowRecord>& flows) {
    std::string out;
    out += "== detection window ==\n";
    out += "start_ms: " + std::to_string(a.window_start) + "\n";
    out += "end_ms: " + std::to_string(a.window_end) + "\n";
    out += "\n== attack volume ==\n";
    out += "attack_flows: " + std::to_string(a.total_attack_flows) + "\n";
    out += "attack_bytes: " + std::to_string(a.total_attack_bytes) + "\n";
    out += "\n== top attack sources ==\n";
    for (const auto& [ip, count] : a.top_sources)
        out += ip + " flows=" + std::to_string(count) + "\n";
    out += "\n== attack five-tuples ==\n";
    for (const auto& af : a.attack_flows) {
        const FlowRecord& f = flows[af.flow_index];
        out += f.src_ip + ":" + std::to_string(f.src_port) + " -> " + f.dst_ip + ":" +
               std::to_string(f.dst_port) + " proto=" + std::to_string(f.proto) +
               " bytes=" + std::to_string(f.total_bytes) + "\n";
    }
    return out;
}

inline constexpr const char* kAlertCsvHeader =
    "src_ip,dst_ip,src_port,dst_port,proto,total_bytes,probability";

inline std::string alert_to_csv(const AlertSummary& a, const std::vector<FlowRecord>& flows) {
    std::string out = kAlertCsvHeader;
    out += '\n';
    for (const auto& af : a.attack_flows) {
        const FlowRecord& f = flows[af.flow_index];
        char prob[32];
        std::snprintf(prob, sizeof(prob), "%.6f", af.probability);
        out += f.src_ip + "," + f.dst_ip + "," + std::to_string(f.src_port) + "," +
               std::to_string(f.dst_port) + "," + std::to_string(f.proto) + "," +
               std::to_string(f.total_bytes) + "," + prob + "\n";
    }
    return out;
}

// Writes <prefix>.txt and <prefix>.csv.
inline void write_alert_files(const AlertSummary& a, const std::vector<FlowRecord>& flows,
                              const std::string& prefix) {
    const std::string text = alert_to_text(a, flows);
    const std::string csv = alert_to_csv(a, flows);
    std::ofstream t(prefix + ".txt", std::ios::binary);
    if (!t) throw IoError("cannot write alert text: " + prefix + ".txt");
    t.write(text.data(), static_cast<std::streamsize>(text.size()));
    std::ofstream c(prefix + ".csv", std::ios::binary);
    if (!c) throw IoError("cannot write alert CSV: " + prefix + ".csv");
    c.write(csv.data(), static_cast<std::streamsize>(csv.size()));
}

} // namespace fsd
