#pragma once

// Feature normalization: min-max scaling for numerical features and
// frequency encoding for categorical ones (a value is replaced by its
// occurrence count over the batch divided by the batch size). Frequent
// ports or protocols are themselves a signal here, so the default scope
// recomputes statistics per detection batch; a fitted scope reuses
// training-set statistics and clamps instead.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/flow.hpp"

namespace fsd {

enum class NormScope : std::uint8_t { per_batch = 0, fitted = 1 };

inline const char* to_string(NormScope s) {
    return s == NormScope::per_batch ? "batch" : "fitted";
}

inline NormScope norm_scope_from_string(const std::string& s) {
    if (s == "batch" || s == "per_batch") return NormScope::per_batch;
    if (s == "fitted") return NormScope::fitted;
    throw ConfigError("unknown normalization scope: " + s);
}

struct NormalizationStats {
    FeatureSet feature_set;
    NormScope scope = NormScope::per_batch;
    std::uint64_t total_flows = 0;
    // per numerical feature, in FeatureSet order
    std::vector<double> num_min;
    std::vector<double> num_max;
    // per categorical feature: value -> count
    std::array<std::unordered_map<std::uint32_t, std::uint64_t>, FeatureSet::n_categorical> cat_counts;
};

inline NormalizationStats compute_stats(const std::vector<FlowRecord>& batch,
                                        const FeatureSet& fs,
                                        NormScope scope = NormScope::per_batch) {
    if (batch.empty()) throw InsufficientData("compute_stats: empty batch");
    NormalizationStats st;
    st.feature_set = fs;
    st.scope = scope;
    st.total_flows = batch.size();
    const std::size_t n_num = fs.n_numerical();
    st.num_min.assign(n_num, std::numeric_limits<double>::infinity());
    st.num_max.assign(n_num, -std::numeric_limits<double>::infinity());

    for (const auto& f : batch) {
        ++st.cat_counts[0][f.src_port];
        ++st.cat_counts[1][f.dst_port];
        ++st.cat_counts[2][f.proto];
        const auto raw = raw_feature_vector(f, fs);
        for (std::size_t i = 0; i < n_num; ++i) {
            const double x = raw[FeatureSet::n_categorical + i];
            st.num_min[i] = std::min(st.num_min[i], x);
            st.num_max[i] = std::max(st.num_max[i], x);
        }
    }
    return st;
}

// One flow to a feature vector in [0,1]^d. Degenerate numerical features
// (max == min) map to 0; under fitted scope out-of-range values clamp and
// unseen categorical values encode as 0.
inline std::vector<float> normalize(const FlowRecord& r, const NormalizationStats& st,
                                    const FeatureSet& fs) {
    std::vector<float> out;
    out.reserve(fs.size());
    const double F = static_cast<double>(st.total_flows);

    const std::uint32_t cat_vals[FeatureSet::n_categorical] = {r.src_port, r.dst_port, r.proto};
    for (std::size_t c = 0; c < FeatureSet::n_categorical; ++c) {
        auto it = st.cat_counts[c].find(cat_vals[c]);
        const double count = it == st.cat_counts[c].end() ? 0.0
                                                          : static_cast<double>(it->second);
        out.push_back(static_cast<float>(count / F));
    }

    const auto raw = raw_feature_vector(r, fs);
    for (std::size_t i = 0; i < fs.n_numerical(); ++i) {
        const double x = raw[FeatureSet::n_categorical + i];
        const double lo = st.num_min[i], hi = st.num_max[i];
        double v = 0.0;
        if (hi > lo) v = (x - lo) / (hi - lo);
        if (st.scope == NormScope::fitted) v = std::clamp(v, 0.0, 1.0);
        out.push_back(static_cast<float>(v));
    }
    return out;
}

// Row-major [batch.size() x fs.size()] feature matrix.
inline std::vector<float> normalize_batch(const std::vector<FlowRecord>& batch,
                                          const NormalizationStats& st, const FeatureSet& fs) {
    std::vector<float> out;
    out.reserve(batch.size() * fs.size());
    for (const auto& f : batch) {
        const auto v = normalize(f, st, fs);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

} // namespace fsd
