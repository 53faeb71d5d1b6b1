#pragma once

// Flow sequencing: turns a temporally unordered batch of flows into
// fixed-length sequences whose positions carry consistent meaning.
//
// Flows are sorted by a five-key lexicographic order, dealt into N bins of
// near-equal size (equal-frequency binning), padded by duplicating the last
// genuine flow of short bins, and read out column-wise. Every flow appears
// in exactly one column as a genuine (non-duplicate) cell.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/flow.hpp"

namespace fsd {

struct FlowMatrix {
    std::size_t n_bins = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> cells;    // n_bins x n_cols, row-major flow indices
    std::vector<std::uint8_t> dup_mask; // 1 = duplicated padding copy
    std::vector<std::size_t> bin_fill;  // genuine flows per bin

    std::size_t cell(std::size_t bin, std::size_t col) const { return cells[bin * n_cols + col]; }
    bool is_dup(std::size_t bin, std::size_t col) const { return dup_mask[bin * n_cols + col] != 0; }
};

struct FlowSequence {
    std::vector<std::size_t> positions;    // flow index per bin
    std::vector<std::uint8_t> dup_mask;    // 1 = padding copy, excluded from loss/verdicts
    std::optional<std::vector<std::uint8_t>> labels;

    std::size_t size() const { return positions.size(); }
};

// Stable ascending sort of flow indices on the key tuple
// (mean_pkt_len, total_pkts, proto, src_port, dst_port).
inline std::vector<std::size_t> sort_flows(const std::vector<FlowRecord>& batch) {
    if (batch.empty()) throw BatchTooSmall("sort_flows: empty batch");
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](std::size_t i) {
        const FlowRecord& f = batch[i];
        return std::make_tuple(f.mean_pkt_len, f.total_pkts, f.proto, f.src_port, f.dst_port);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    return order;
}

// Bin occupancies for F flows over N bins: the first (F mod N) bins hold
// floor(F/N)+1 flows, the rest floor(F/N).
inline std::vector<std::size_t> bin_sizes(std::size_t F, std::size_t N) {
    if (F < 1 || N < 1) throw ConfigError("bin_sizes: F and N must be positive");
    const std::size_t q = F / N;
    const std::size_t r = F % N;
    std::vector<std::size_t> m(N, q);
    for (std::size_t i = 0; i < r; ++i) m[i] = q + 1;
    return m;
}

// Deals sorted flows into N bins sequentially, then pads every bin to
// ceil(F/N) columns by repeating its last genuine flow.
inline FlowMatrix build_matrix(const std::vector<std::size_t>& sorted, std::size_t N) {
    const std::size_t F = sorted.size();
    if (N < 1) throw ConfigError("build_matrix: N must be positive");
    if (F < N)
        throw BatchTooSmall("build_matrix: batch of " + std::to_string(F) +
                            " flows is smaller than " + std::to_string(N) + " bins");

    FlowMatrix m;
    m.n_bins = N;
    m.n_cols = (F + N - 1) / N;
    m.cells.assign(N * m.n_cols, 0);
    m.dup_mask.assign(N * m.n_cols, 0);
    m.bin_fill = bin_sizes(F, N);

    std::size_t next = 0;
    for (std::size_t bin = 0; bin < N; ++bin) {
        const std::size_t fill = m.bin_fill[bin];
        for (std::size_t col = 0; col < fill; ++col)
            m.cells[bin * m.n_cols + col] = sorted[next++];
        const std::size_t last = m.cells[bin * m.n_cols + fill - 1];
        for (std::size_t col = fill; col < m.n_cols; ++col) {
            m.cells[bin * m.n_cols + col] = last;
            m.dup_mask[bin * m.n_cols + col] = 1;
        }
    }
    return m;
}

// Column read-out: sequence j takes the cell in column j of every bin.
inline std::vector<FlowSequence> assemble_sequences(const FlowMatrix& m) {
    std::vector<FlowSequence> seqs(m.n_cols);
    for (std::size_t col = 0; col < m.n_cols; ++col) {
        FlowSequence& s = seqs[col];
        s.positions.resize(m.n_bins);
        s.dup_mask.resize(m.n_bins);
        for (std::size_t bin = 0; bin < m.n_bins; ++bin) {
            s.positions[bin] = m.cell(bin, col);
            s.dup_mask[bin] = m.dup_mask[bin * m.n_cols + col];
        }
    }
    return seqs;
}

// Training augmentation: the column sequences first, then (count - n_cols)
// randomized sequences whose position i is drawn uniformly from bin i's
// genuine flows. Sampling is with replacement per position.
inline std::vector<FlowSequence> sample_training_sequences(const FlowMatrix& m,
                                                           std::size_t count,
                                                           std::uint64_t seed) {
    std::vector<FlowSequence> seqs = assemble_sequences(m);
    if (count <= seqs.size()) {
        seqs.resize(count);
        return seqs;
    }
    std::mt19937_64 rng(seed);
    seqs.reserve(count);
    for (std::size_t k = seqs.size(); k < count; ++k) {
        FlowSequence s;
        s.positions.resize(m.n_bins);
        s.dup_mask.assign(m.n_bins, 0);
        for (std::size_t bin = 0; bin < m.n_bins; ++bin) {
            std::uniform_int_distribution<std::size_t> pick(0, m.bin_fill[bin] - 1);
            s.positions[bin] = m.cell(bin, pick(rng));
        }
        seqs.push_back(std::move(s));
    }
    return seqs;
}

// Time-ordered sliding windows (ablation arm). Flows are sorted by
// timestamp; windows start at offsets 0, stride, 2*stride, ...
inline std::vector<FlowSequence> sliding_window_sequences(const std::vector<FlowRecord>& batch,
                                                          std::size_t window,
                                                          std::size_t stride) {
    if (window < 1 || stride < 1)
        throw ConfigError("sliding_window_sequences: window and stride must be positive");
    if (batch.size() < window)
        throw BatchTooSmall("sliding_window_sequences: batch of " + std::to_string(batch.size()) +
                            " flows is smaller than window " + std::to_string(window));

    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return batch[a].timestamp < batch[b].timestamp;
    });

    std::vector<FlowSequence> seqs;
    for (std::size_t off = 0; off + window <= batch.size(); off += stride) {
        FlowSequence s;
        s.positions.assign(order.begin() + static_cast<std::ptrdiff_t>(off),
                           order.begin() + static_cast<std::ptrdiff_t>(off + window));
        s.dup_mask.assign(window, 0);
        seqs.push_back(std::move(s));
    }
    return seqs;
}

// Copies per-position labels from the source flows into a sequence.
inline void attach_labels(FlowSequence& s, const std::vector<FlowRecord>& flows) {
    std::vector<std::uint8_t> labels(s.positions.size());
    for (std::size_t i = 0; i < s.positions.size(); ++i)
        labels[i] = flows[s.positions[i]].label == Label::attack ? 1 : 0;
    s.labels = std::move(labels);
}

} // namespace fsd
