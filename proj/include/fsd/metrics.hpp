#pragma once

// Confusion-matrix metrics with attack as the positive class.

#include <cstdint>
#include <string>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/flow.hpp"
#include "fsd/model.hpp"

namespace fsd {

struct MetricsReport {
    std::string scenario;
    std::string method;
    std::string config_echo;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double runtime_ms = 0.0; // per-flow inference time in milliseconds
};

// predicted/labels: 1 = attack, 0 = benign. Ratios with a zero denominator
// are 0 by convention.
inline MetricsReport compute_metrics(const std::vector<std::uint8_t>& predicted,
                                     const std::vector<std::uint8_t>& labels) {
    if (predicted.size() != labels.size())
        throw LengthMismatch("compute_metrics: " + std::to_string(predicted.size()) +
                             " predictions vs " + std::to_string(labels.size()) + " labels");
    MetricsReport r;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0, y = labels[i] != 0;
        if (p && y) ++r.tp;
        else if (p && !y) ++r.fp;
        else if (!p && y) ++r.fn;
        else ++r.tn;
    }
    const std::size_t total = r.tp + r.fp + r.tn + r.fn;
    r.accuracy = total ? static_cast<double>(r.tp + r.tn) / static_cast<double>(total) : 0.0;
    r.precision = (r.tp + r.fp) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
    r.recall = (r.tp + r.fn) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

inline MetricsReport metrics_from_verdicts(const std::vector<FlowVerdict>& verdicts,
                                           const std::vector<FlowRecord>& flows) {
    std::vector<std::uint8_t> pred(verdicts.size()), truth(verdicts.size());
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        pred[i] = verdicts[i].attack ? 1 : 0;
        truth[i] = flows[verdicts[i].flow_index].label == Label::attack ? 1 : 0;
    }
    return compute_metrics(pred, truth);
}

} // namespace fsd
