#pragma once

// End-to-end training: sequence generation from the train split, mini-batch
// forward/backward with the backbone optionally frozen, and per-epoch
// validation-F1 model selection. Whole runs are deterministic for a fixed
// seed, down to the checkpoint bytes.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fsd/checkpoint.hpp"
#include "fsd/dataset.hpp"
#include "fsd/error.hpp"
#include "fsd/head.hpp"
#include "fsd/metrics.hpp"
#include "fsd/model.hpp"
#include "fsd/optim.hpp"
#include "fsd/sequencer.hpp"

namespace fsd {

enum class SequenceMode : std::uint8_t { binned = 0, sliding_window = 1 };

struct TrainConfig {
    ModelConfig model;
    std::size_t epochs = 20;
    OptimizerConfig optimizer; // adam, lr 1e-3
    std::size_t batch_sequences = 32;
    std::size_t train_sequence_count = 15000;
    std::uint64_t rng_seed = 42;
    SequenceMode sequence_mode = SequenceMode::binned;
    std::size_t sliding_stride = 1; // training stride for the sliding ablation

    void validate() const {
        if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
        if (optimizer.learning_rate <= 0.0f) throw ConfigError("train: learning rate must be > 0");
        if (batch_sequences < 1) throw ConfigError("train: batch_sequences must be >= 1");
    }
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

} // namespace detail

// Sliding-window inference keeps coverage without stride-1 overlap: windows
// at offsets 0, w, 2w, ... plus one tail window ending at the last flow.
inline std::vector<FlowSequence> coverage_windows(const std::vector<FlowRecord>& flows,
                                                  std::size_t window) {
    std::vector<FlowSequence> seqs = sliding_window_sequences(flows, window, window);
    if (flows.size() % window != 0) {
        auto tail = sliding_window_sequences(flows, window, 1);
        seqs.push_back(tail.back());
    }
    return seqs;
}

// One verdict per flow for either sequencing mode.
inline std::vector<FlowVerdict> infer_with_mode(const DetectionModel& model,
                                                const std::vector<FlowRecord>& flows,
                                                const NormalizationStats& stats,
                                                SequenceMode mode,
                                                std::size_t batch_sequences = 64) {
    if (mode == SequenceMode::binned)
        return run_inference(model, flows, stats, batch_sequences);
    const std::size_t window = model.config().n_bins;
    if (flows.size() < window)
        throw BatchTooSmall("inference: batch of " + std::to_string(flows.size()) +
                            " flows is smaller than the window of " + std::to_string(window));
    const FeatureSet fs = feature_set(model.config().feature_mode);
    const std::vector<float> features = normalize_batch(flows, stats, fs);
    return run_inference_sequences(model, flows.size(), features, coverage_windows(flows, window),
                                   batch_sequences);
}

inline NormalizationStats inference_stats(const ModelCheckpoint& ckpt,
                                          const std::vector<FlowRecord>& flows) {
    if (ckpt.config.norm_scope == NormScope::fitted) return ckpt.stats;
    return compute_stats(flows, feature_set(ckpt.config.feature_mode), NormScope::per_batch);
}

struct TrainResult {
    ModelCheckpoint checkpoint;
    std::vector<double> val_f1_history;
};

inline TrainResult train_detailed(const Dataset& train_ds, const Dataset& val_ds,
                                  TrainConfig cfg) {
    cfg.validate();
    if (!train_ds.fully_labeled() || !val_ds.fully_labeled())
        throw ValidationError("train: datasets must be fully labeled");
    if (train_ds.feature_set.mode != cfg.model.feature_mode)
        throw FeatureModeMismatch("train: dataset is " +
                                  std::string(to_string(train_ds.feature_set.mode)) +
                                  ", config wants " +
                                  std::string(to_string(cfg.model.feature_mode)));
    const std::size_t n_attack = train_ds.count_label(Label::attack);
    if (n_attack == 0 || n_attack == train_ds.flows.size())
        throw DegenerateLabels("train: training set has a single class");
    if (train_ds.flows.size() < cfg.model.n_bins)
        throw BatchTooSmall("train: " + std::to_string(train_ds.flows.size()) +
                            " flows is fewer than " + std::to_string(cfg.model.n_bins) +
                            " bins");

    const FeatureSet fs = train_ds.feature_set;
    NormalizationStats stats = compute_stats(train_ds.flows, fs, cfg.model.norm_scope);
    const std::vector<float> features = normalize_batch(train_ds.flows, stats, fs);

    // one fixed pool of training sequences per run
    std::vector<FlowSequence> seqs;
    if (cfg.sequence_mode == SequenceMode::binned) {
        auto matrix = build_matrix(sort_flows(train_ds.flows), cfg.model.n_bins);
        seqs = sample_training_sequences(matrix, cfg.train_sequence_count,
                                         detail::mix_seed(cfg.rng_seed, 1));
    } else {
        seqs = sliding_window_sequences(train_ds.flows, cfg.model.n_bins, cfg.sliding_stride);
        if (seqs.size() > cfg.train_sequence_count) {
            std::mt19937_64 pick(detail::mix_seed(cfg.rng_seed, 1));
            std::shuffle(seqs.begin(), seqs.end(), pick);
            seqs.resize(cfg.train_sequence_count);
        }
    }
    for (auto& s : seqs) attach_labels(s, train_ds.flows);

    ModelConfig mc = cfg.model;
    mc.rng_seed = cfg.rng_seed;
    DetectionModel model(mc);
    Optimizer opt(model.parameters(), cfg.optimizer);

    const NormalizationStats val_stats =
        cfg.model.norm_scope == NormScope::fitted
            ? stats
            : compute_stats(val_ds.flows, fs, NormScope::per_batch);
    std::vector<std::uint8_t> val_labels; // filled on first evaluation

    TrainResult result;
    double best_f1 = -1.0;
    std::vector<std::size_t> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(detail::mix_seed(cfg.rng_seed, 1000 + epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_sequences) {
            const std::size_t count = std::min(cfg.batch_sequences, order.size() - start);
            const std::size_t seq_len = seqs[order[start]].size();
            const std::size_t d_feat = fs.size();
            FloatVec x(count * seq_len * d_feat);
            std::vector<std::vector<std::uint8_t>> labels(count), dups(count);
            for (std::size_t s = 0; s < count; ++s) {
                const FlowSequence& seq = seqs[order[start + s]];
                for (std::size_t i = 0; i < seq_len; ++i)
                    std::copy_n(features.data() + seq.positions[i] * d_feat, d_feat,
                                x.data() + (s * seq_len + i) * d_feat);
                labels[s] = *seq.labels;
                dups[s] = seq.dup_mask;
            }
            Tensor input = Tensor::from_data({count, seq_len, d_feat}, std::move(x));
            Tensor probs = model.forward_probs(input);
            Tensor loss = batch_loss(probs, labels, dups);
            model.zero_grad();
            backward(loss);
            opt.step();
        }

        auto verdicts = infer_with_mode(model, val_ds.flows, val_stats, cfg.sequence_mode);
        if (val_labels.empty()) {
            val_labels.resize(verdicts.size());
            for (std::size_t i = 0; i < verdicts.size(); ++i)
                val_labels[i] =
                    val_ds.flows[verdicts[i].flow_index].label == Label::attack ? 1 : 0;
        }
        std::vector<std::uint8_t> pred(verdicts.size());
        for (std::size_t i = 0; i < verdicts.size(); ++i) pred[i] = verdicts[i].attack ? 1 : 0;
        const double f1 = compute_metrics(pred, val_labels).f1;
        result.val_f1_history.push_back(f1);

        if (f1 > best_f1) {
            best_f1 = f1;
            result.checkpoint = snapshot_model(model, stats,
                                               {epoch, f1, cfg.rng_seed});
        }
    }
    return result;
}

inline ModelCheckpoint train(const Dataset& train_ds, const Dataset& val_ds,
                             const TrainConfig& cfg) {
    return train_detailed(train_ds, val_ds, cfg).checkpoint;
}

// Inference against a stored checkpoint; one verdict per input flow.
inline std::vector<FlowVerdict> infer(const Dataset& batch, const ModelCheckpoint& ckpt,
                                      std::size_t batch_sequences = 64) {
    if (batch.feature_set.mode != ckpt.config.feature_mode)
        throw FeatureModeMismatch("infer: dataset is " +
                                  std::string(to_string(batch.feature_set.mode)) +
                                  ", checkpoint wants " +
                                  std::string(to_string(ckpt.config.feature_mode)));
    DetectionModel model = restore_model(ckpt);
    const NormalizationStats stats = inference_stats(ckpt, batch.flows);
    return run_inference(model, batch.flows, stats, batch_sequences);
}

} // namespace fsd
