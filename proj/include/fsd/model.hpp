#pragma once

// Full detection model: tokenizer -> encoder backbone -> classification
// head, plus the batched inference path that sequences a flow batch,
// runs it through the model and collapses duplicate positions back to
// one verdict per input flow.

#include <cstdint>
#include <random>
#include <vector>

#include "fsd/backbone.hpp"
#include "fsd/error.hpp"
#include "fsd/flow.hpp"
#include "fsd/head.hpp"
#include "fsd/normalize.hpp"
#include "fsd/sequencer.hpp"
#include "fsd/tokenizer.hpp"

namespace fsd {

struct ModelConfig {
    FeatureMode feature_mode = FeatureMode::full9;
    NormScope norm_scope = NormScope::per_batch;
    std::size_t n_bins = 64;
    std::size_t tok_hidden = 0; // 0 -> 2 * d_feat
    std::size_t d_proj = 0;     // 0 -> d_model / 2
    BackboneConfig backbone;
    std::uint64_t rng_seed = 42;

    std::size_t d_feat() const { return feature_mode == FeatureMode::full9 ? 9 : 6; }
    std::size_t tok_hidden_dim() const { return tok_hidden ? tok_hidden : 2 * d_feat(); }
    std::size_t d_proj_dim() const {
        return d_proj ? d_proj : std::max<std::size_t>(1, backbone.d_model / 2);
    }
};

class DetectionModel {
public:
    DetectionModel() = default;

    explicit DetectionModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.n_bins == 0) throw ConfigError("model: n_bins must be positive");
        cfg_.backbone.max_seq = std::max(cfg_.backbone.max_seq, cfg_.n_bins);
        cfg_.backbone.validate();
        std::mt19937_64 rng(cfg_.rng_seed);
        tokenizer_ = FlowTokenizer(
            TokenizerConfig{cfg_.d_feat(), cfg_.tok_hidden_dim(), cfg_.backbone.d_model}, rng);
        backbone_ = TransformerBackbone(cfg_.backbone, rng);
        head_ = ClassificationHead(cfg_.backbone.d_model, cfg_.d_proj_dim(), rng);
    }

    // [batch, seq, d_feat] normalized features -> [batch, seq] probabilities
    Tensor forward_probs(const Tensor& features) const {
        return head_.classify(backbone_.forward(tokenizer_.embed(features)));
    }

    const ModelConfig& config() const { return cfg_; }
    FlowTokenizer& tokenizer() { return tokenizer_; }
    TransformerBackbone& backbone() { return backbone_; }
    ClassificationHead& head() { return head_; }

    void set_backbone_frozen(bool frz) {
        cfg_.backbone.frozen = frz;
        backbone_.set_frozen(frz);
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        tokenizer_.collect_parameters(out);
        backbone_.collect_parameters(out);
        head_.collect_parameters(out);
        return out;
    }

    void zero_grad() {
        for (Parameter* p : parameters()) p->tensor.zero_grad();
    }

private:
    ModelConfig cfg_;
    FlowTokenizer tokenizer_;
    TransformerBackbone backbone_;
    ClassificationHead head_;
};

struct FlowVerdict {
    std::size_t flow_index = 0;
    float probability = 0.0f;
    bool attack = false;
};

// Gathers per-sequence feature rows from a row-major [n_flows x d_feat]
// matrix into a [n_seqs, seq_len, d_feat] tensor.
inline Tensor gather_sequence_features(const std::vector<float>& features, std::size_t d_feat,
                                       const std::vector<FlowSequence>& seqs,
                                       std::size_t first, std::size_t count) {
    const std::size_t seq_len = seqs[first].size();
    FloatVec out(count * seq_len * d_feat);
    for (std::size_t s = 0; s < count; ++s) {
        const FlowSequence& seq = seqs[first + s];
        for (std::size_t i = 0; i < seq_len; ++i)
            std::copy_n(features.data() + seq.positions[i] * d_feat, d_feat,
                        out.data() + (s * seq_len + i) * d_feat);
    }
    return Tensor::from_data({count, seq_len, d_feat}, std::move(out));
}

// Runs the model over pre-built sequences and returns one verdict per flow
// index touched by a genuine position; the first genuine occurrence wins.
inline std::vector<FlowVerdict> run_inference_sequences(const DetectionModel& model,
                                                        std::size_t n_flows,
                                                        const std::vector<float>& features,
                                                        const std::vector<FlowSequence>& seqs,
                                                        std::size_t batch_sequences = 64) {
    const std::size_t d_feat = model.config().d_feat();
    std::vector<float> prob(n_flows, -1.0f);
    for (std::size_t start = 0; start < seqs.size(); start += batch_sequences) {
        const std::size_t count = std::min(batch_sequences, seqs.size() - start);
        Tensor x = gather_sequence_features(features, d_feat, seqs, start, count);
        Tensor p = model.forward_probs(x);
        const std::size_t seq_len = seqs[start].size();
        for (std::size_t s = 0; s < count; ++s)
            for (std::size_t i = 0; i < seq_len; ++i) {
                const FlowSequence& seq = seqs[start + s];
                if (seq.dup_mask[i]) continue;
                float& slot = prob[seq.positions[i]];
                if (slot < 0.0f) slot = p.data()[s * seq_len + i];
            }
    }
    std::vector<FlowVerdict> out;
    out.reserve(n_flows);
    for (std::size_t i = 0; i < n_flows; ++i) {
        if (prob[i] < 0.0f) continue; // not covered by any genuine position
        out.push_back({i, prob[i], verdict_from_probability(prob[i])});
    }
    return out;
}

// Standard inference path: sort, bin, read out columns, classify.
inline std::vector<FlowVerdict> run_inference(const DetectionModel& model,
                                              const std::vector<FlowRecord>& flows,
                                              const NormalizationStats& stats,
                                              std::size_t batch_sequences = 64) {
    const std::size_t n_bins = model.config().n_bins;
    if (flows.size() < n_bins)
        throw BatchTooSmall("inference: batch of " + std::to_string(flows.size()) +
                            " flows is smaller than the minimum of " + std::to_string(n_bins) +
                            " (one per bin)");
    const FeatureSet fs = feature_set(model.config().feature_mode);
    const std::vector<float> features = normalize_batch(flows, stats, fs);
    auto matrix = build_matrix(sort_flows(flows), n_bins);
    auto seqs = assemble_sequences(matrix);
    return run_inference_sequences(model, flows.size(), features, seqs, batch_sequences);
}

} // namespace fsd
