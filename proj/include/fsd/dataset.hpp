#pragma once

// Flow dataset container, CSV ingestion and chronological splitting.
//
// CSV format (exact): header line
//   src_ip,dst_ip,src_port,dst_port,proto,total_bytes,total_pkts,
//   mean_pkt_len,max_pkt_len,min_pkt_len,std_pkt_len,timestamp,label
// with label in {0,1,""}, UTF-8, LF line endings, '.' decimal point.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/flow.hpp"

namespace fsd {

struct Dataset {
    std::vector<FlowRecord> flows;
    FeatureSet feature_set;
    std::string provenance;

    bool fully_labeled() const {
        for (const auto& f : flows)
            if (f.label == Label::unknown) return false;
        return !flows.empty();
    }
    std::size_t count_label(Label l) const {
        std::size_t n = 0;
        for (const auto& f : flows) n += (f.label == l);
        return n;
    }
};

inline constexpr const char* kFlowCsvHeader =
    "src_ip,dst_ip,src_port,dst_port,proto,total_bytes,total_pkts,"
    "mean_pkt_len,max_pkt_len,min_pkt_len,std_pkt_len,timestamp,label";

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

template <typename Int>
Int parse_int(std::string_view s, std::size_t line_no, const char* field) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad integer in field " +
                         field + ": '" + std::string(s) + "'");
    return v;
}

inline double parse_real(std::string_view s, std::size_t line_no, const char* field) {
    double v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad real in field " +
                         field + ": '" + std::string(s) + "'");
    return v;
}

template <typename Int, typename Field>
Field parse_ranged(std::string_view s, std::size_t line_no, const char* field) {
    Int wide = parse_int<Int>(s, line_no, field);
    if (wide < 0 || wide > static_cast<Int>(std::numeric_limits<Field>::max()))
        throw ValidationError("line " + std::to_string(line_no) + ": field " + field +
                              " out of range: " + std::string(s));
    return static_cast<Field>(wide);
}

// shortest round-trip formatting
inline void append_real(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

} // namespace detail

inline FlowRecord parse_flow_row(std::string_view line, std::size_t line_no) {
    auto f = detail::split_fields(line);
    if (f.size() != 13)
        throw ParseError("line " + std::to_string(line_no) + ": expected 13 fields, got " +
                         std::to_string(f.size()));
    FlowRecord r;
    r.src_ip = std::string(f[0]);
    r.dst_ip = std::string(f[1]);
    r.src_port = detail::parse_ranged<std::int64_t, std::uint16_t>(f[2], line_no, "src_port");
    r.dst_port = detail::parse_ranged<std::int64_t, std::uint16_t>(f[3], line_no, "dst_port");
    r.proto = detail::parse_ranged<std::int64_t, std::uint8_t>(f[4], line_no, "proto");
    r.total_bytes = detail::parse_int<std::uint64_t>(f[5], line_no, "total_bytes");
    r.total_pkts = detail::parse_int<std::uint64_t>(f[6], line_no, "total_pkts");
    r.mean_pkt_len = detail::parse_real(f[7], line_no, "mean_pkt_len");
    r.max_pkt_len = detail::parse_int<std::uint32_t>(f[8], line_no, "max_pkt_len");
    r.min_pkt_len = detail::parse_int<std::uint32_t>(f[9], line_no, "min_pkt_len");
    r.std_pkt_len = detail::parse_real(f[10], line_no, "std_pkt_len");
    r.timestamp = detail::parse_int<std::uint64_t>(f[11], line_no, "timestamp");
    if (f[12].empty()) {
        r.label = Label::unknown;
    } else if (f[12] == "0") {
        r.label = Label::benign;
    } else if (f[12] == "1") {
        r.label = Label::attack;
    } else {
        throw ParseError("line " + std::to_string(line_no) + ": label must be 0, 1 or empty, got '" +
                         std::string(f[12]) + "'");
    }
    try {
        validate_flow(r);
    } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    return r;
}

inline Dataset parse_csv(const std::string& path, const FeatureSet& fs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open flow CSV: " + path);
    Dataset ds;
    ds.feature_set = fs;
    ds.provenance = "csv:" + path;

    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kFlowCsvHeader)
        throw ParseError(path + ": line 1: bad header");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ds.flows.push_back(parse_flow_row(line, line_no));
    }

    bool any_labeled = false, any_unlabeled = false;
    for (const auto& f : ds.flows) {
        (f.label == Label::unknown ? any_unlabeled : any_labeled) = true;
    }
    if (any_labeled && any_unlabeled)
        throw ValidationError(path + ": dataset mixes labeled and unlabeled flows");
    return ds;
}

inline void append_flow_row(std::string& out, const FlowRecord& r) {
    out += r.src_ip;
    out += ',';
    out += r.dst_ip;
    out += ',';
    out += std::to_string(r.src_port);
    out += ',';
    out += std::to_string(r.dst_port);
    out += ',';
    out += std::to_string(static_cast<unsigned>(r.proto));
    out += ',';
    out += std::to_string(r.total_bytes);
    out += ',';
    out += std::to_string(r.total_pkts);
    out += ',';
    detail::append_real(out, r.mean_pkt_len);
    out += ',';
    out += std::to_string(r.max_pkt_len);
    out += ',';
    out += std::to_string(r.min_pkt_len);
    out += ',';
    detail::append_real(out, r.std_pkt_len);
    out += ',';
    out += std::to_string(r.timestamp);
    out += ',';
    if (r.label == Label::benign) out += '0';
    else if (r.label == Label::attack) out += '1';
    out += '\n';
}

inline void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write flow CSV: " + path);
    std::string buf;
    buf.reserve(ds.flows.size() * 96 + 128);
    buf += kFlowCsvHeader;
    buf += '\n';
    for (const auto& f : ds.flows) append_flow_row(buf, f);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write: " + path);
}

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

// Chronological split: flows are stable-sorted by timestamp (ties keep
// input order), then cut contiguously into floor(train*F) / floor(val*F) /
// remainder.
inline std::array<Dataset, 3> split(const Dataset& ds, SplitRatios ratios = {}) {
    if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0))
        throw ConfigError("split ratios must be positive");
    if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1");
    if (!ds.fully_labeled())
        throw ValidationError("split requires a fully labeled dataset");

    std::vector<std::size_t> order(ds.flows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds.flows[a].timestamp < ds.flows[b].timestamp;
    });

    const std::size_t F = ds.flows.size();
    const std::size_t n_train = static_cast<std::size_t>(ratios.train * static_cast<double>(F));
    const std::size_t n_val = static_cast<std::size_t>(ratios.val * static_cast<double>(F));

    std::array<Dataset, 3> parts;
    const char* names[3] = {"train", "val", "test"};
    std::size_t bounds[4] = {0, n_train, n_train + n_val, F};
    for (int p = 0; p < 3; ++p) {
        parts[p].feature_set = ds.feature_set;
        parts[p].provenance = ds.provenance + ":" + names[p];
        parts[p].flows.reserve(bounds[p + 1] - bounds[p]);
        for (std::size_t i = bounds[p]; i < bounds[p + 1]; ++i)
            parts[p].flows.push_back(ds.flows[order[i]]);
    }
    return parts;
}

} // namespace fsd
