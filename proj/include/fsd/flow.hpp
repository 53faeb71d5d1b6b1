#pragma once

// Flow records and the feature sets used by every stage of the pipeline.
//
// A flow is the set of packets sharing one five-tuple, summarized by byte
// and packet-length statistics. IP addresses are carried for reporting only
// and never enter the feature pipeline: destination IPs are random under
// subnet-spread floods and source IPs are unreliable under spoofing.

#include <cstdint>
#include <string>
#include <vector>

#include "fsd/error.hpp"

namespace fsd {

enum class Label : std::uint8_t { benign = 0, attack = 1, unknown = 2 };

struct FlowRecord {
    std::string src_ip;
    std::string dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t proto = 0;          // IANA protocol number
    std::uint64_t total_bytes = 0;
    std::uint64_t total_pkts = 0;
    double mean_pkt_len = 0.0;
    std::uint32_t max_pkt_len = 0;
    std::uint32_t min_pkt_len = 0;
    double std_pkt_len = 0.0;
    std::uint64_t timestamp = 0;     // milliseconds since epoch
    Label label = Label::unknown;
};

enum class FeatureMode : std::uint8_t { full9 = 0, netflow6 = 1 };

// Ordered feature layout for one mode. Categorical features come first,
// numerical features after; the order is fixed and identical between
// training and inference.
struct FeatureSet {
    FeatureMode mode = FeatureMode::full9;

    static constexpr std::size_t n_categorical = 3; // src_port, dst_port, proto

    std::size_t n_numerical() const {
        return mode == FeatureMode::full9 ? 6 : 3;
    }
    std::size_t size() const { return n_categorical + n_numerical(); }

    static const char* categorical_name(std::size_t i) {
        static const char* names[] = {"src_port", "dst_port", "proto"};
        return names[i];
    }
    const char* numerical_name(std::size_t i) const {
        static const char* names[] = {"total_bytes", "total_pkts", "mean_pkt_len",
                                      "max_pkt_len", "min_pkt_len", "std_pkt_len"};
        return names[i];
    }
};

inline FeatureSet feature_set(FeatureMode mode) { return FeatureSet{mode}; }

inline const char* to_string(FeatureMode mode) {
    return mode == FeatureMode::full9 ? "full9" : "netflow6";
}

inline FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "full9") return FeatureMode::full9;
    if (s == "netflow6") return FeatureMode::netflow6;
    throw ConfigError("unknown feature mode: " + s);
}

// Checks the record invariants and returns the record unchanged.
// Throws ValidationError naming the violated invariant and the field values.
inline const FlowRecord& validate_flow(const FlowRecord& r) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("flow invariant violated: " + what);
    };
    if (r.total_pkts == 0)
        fail("total_pkts must be positive");
    if (r.total_pkts >= 1) {
        if (!(static_cast<double>(r.min_pkt_len) <= r.mean_pkt_len))
            fail("min_pkt_len <= mean_pkt_len (min=" + std::to_string(r.min_pkt_len) +
                 ", mean=" + std::to_string(r.mean_pkt_len) + ")");
        if (!(r.mean_pkt_len <= static_cast<double>(r.max_pkt_len)))
            fail("mean_pkt_len <= max_pkt_len (mean=" + std::to_string(r.mean_pkt_len) +
                 ", max=" + std::to_string(r.max_pkt_len) + ")");
    }
    if (r.total_pkts == 1 && r.std_pkt_len != 0.0)
        fail("std_pkt_len must be 0 for single-packet flows (std=" +
             std::to_string(r.std_pkt_len) + ")");
    if (r.std_pkt_len < 0.0)
        fail("std_pkt_len must be non-negative");
    if (r.total_bytes < r.total_pkts * static_cast<std::uint64_t>(r.min_pkt_len))
        fail("total_bytes >= total_pkts * min_pkt_len (bytes=" + std::to_string(r.total_bytes) +
             ", pkts=" + std::to_string(r.total_pkts) + ", min=" + std::to_string(r.min_pkt_len) + ")");
    if (r.total_bytes > r.total_pkts * static_cast<std::uint64_t>(r.max_pkt_len))
        fail("total_bytes <= total_pkts * max_pkt_len (bytes=" + std::to_string(r.total_bytes) +
             ", pkts=" + std::to_string(r.total_pkts) + ", max=" + std::to_string(r.max_pkt_len) + ")");
    return r;
}

// Raw (pre-encoding) feature values in FeatureSet order: categorical values
// as plain numbers, then numerical values.
inline std::vector<double> raw_feature_vector(const FlowRecord& r, const FeatureSet& fs) {
    std::vector<double> v;
    v.reserve(fs.size());
    v.push_back(static_cast<double>(r.src_port));
    v.push_back(static_cast<double>(r.dst_port));
    v.push_back(static_cast<double>(r.proto));
    v.push_back(static_cast<double>(r.total_bytes));
    v.push_back(static_cast<double>(r.total_pkts));
    v.push_back(r.mean_pkt_len);
    if (fs.mode == FeatureMode::full9) {
        v.push_back(static_cast<double>(r.max_pkt_len));
        v.push_back(static_cast<double>(r.min_pkt_len));
        v.push_back(r.std_pkt_len);
    }
    return v;
}

} // namespace fsd
