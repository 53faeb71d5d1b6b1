#pragma once

// Per-flow MLP baseline: same normalized features, same loss and optimizer,
// same best-validation-F1 selection as the sequence model, but every flow is
// classified in isolation with no cross-flow context.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "fsd/dataset.hpp"
#include "fsd/error.hpp"
#include "fsd/head.hpp"
#include "fsd/metrics.hpp"
#include "fsd/normalize.hpp"
#include "fsd/optim.hpp"
#include "fsd/tensor.hpp"

namespace fsd {

struct BaselineConfig {
    FeatureMode feature_mode = FeatureMode::full9;
    NormScope norm_scope = NormScope::per_batch;
    std::size_t d_hidden = 32;
    std::size_t epochs = 20;
    OptimizerConfig optimizer;
    std::size_t batch_size = 256;
    std::uint64_t rng_seed = 42;
};

class MlpBaseline {
public:
    MlpBaseline() = default;

    MlpBaseline(const BaselineConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
        const std::size_t d = feature_set(cfg.feature_mode).size();
        const float s1 = 1.0f / std::sqrt(static_cast<float>(d));
        const float s2 = 1.0f / std::sqrt(static_cast<float>(cfg.d_hidden));
        w1_ = Parameter(uniform_tensor({d, cfg.d_hidden}, -s1, s1, rng), "baseline.w1");
        b1_ = Parameter(Tensor::zeros({cfg.d_hidden}), "baseline.b1");
        w2_ = Parameter(uniform_tensor({cfg.d_hidden, 1}, -s2, s2, rng), "baseline.w2");
        b2_ = Parameter(Tensor::zeros({1}), "baseline.b2");
    }

    // [n, d_feat] -> [n] probabilities
    Tensor forward(const Tensor& x) const {
        Tensor h = silu(add(matmul(x, w1_.tensor), b1_.tensor));
        Tensor logits = add(matmul(h, w2_.tensor), b2_.tensor);
        return reshape(sigmoid(logits), {x.dim(0)});
    }

    const BaselineConfig& config() const { return cfg_; }

    std::vector<Parameter*> parameters() {
        return {&w1_, &b1_, &w2_, &b2_};
    }

    void load_values(const std::vector<FloatVec>& values) {
        auto params = parameters();
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->tensor.data() = values[i];
    }
    std::vector<FloatVec> dump_values() {
        std::vector<FloatVec> out;
        for (Parameter* p : parameters()) out.push_back(p->tensor.data());
        return out;
    }

private:
    BaselineConfig cfg_;
    Parameter w1_, b1_, w2_, b2_;
};

inline std::vector<FlowVerdict> mlp_predict(const MlpBaseline& model,
                                            const std::vector<FlowRecord>& flows,
                                            const NormalizationStats& stats) {
    const FeatureSet fs = feature_set(model.config().feature_mode);
    const std::vector<float> features = normalize_batch(flows, stats, fs);
    Tensor x = Tensor::from_data({flows.size(), fs.size()},
                                 FloatVec(features.begin(), features.end()));
    Tensor p = model.forward(x);
    std::vector<FlowVerdict> out(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i)
        out[i] = {i, p.data()[i], verdict_from_probability(p.data()[i])};
    return out;
}

inline MlpBaseline train_mlp_baseline(const Dataset& train_ds, const Dataset& val_ds,
                                      const BaselineConfig& cfg) {
    if (!train_ds.fully_labeled() || !val_ds.fully_labeled())
        throw ValidationError("baseline: datasets must be fully labeled");
    const std::size_t n_attack = train_ds.count_label(Label::attack);
    if (n_attack == 0 || n_attack == train_ds.flows.size())
        throw DegenerateLabels("baseline: training set has a single class");

    const FeatureSet fs = feature_set(cfg.feature_mode);
    const NormalizationStats stats = compute_stats(train_ds.flows, fs, cfg.norm_scope);
    const std::vector<float> features = normalize_batch(train_ds.flows, stats, fs);
    const NormalizationStats val_stats =
        cfg.norm_scope == NormScope::fitted
            ? stats
            : compute_stats(val_ds.flows, fs, NormScope::per_batch);

    std::mt19937_64 rng(cfg.rng_seed);
    MlpBaseline model(cfg, rng);
    Optimizer opt(model.parameters(), cfg.optimizer);

    std::vector<std::uint8_t> val_labels(val_ds.flows.size());
    for (std::size_t i = 0; i < val_ds.flows.size(); ++i)
        val_labels[i] = val_ds.flows[i].label == Label::attack ? 1 : 0;

    const std::size_t d = fs.size();
    std::vector<std::size_t> order(train_ds.flows.size());
    std::iota(order.begin(), order.end(), 0);

    double best_f1 = -1.0;
    std::vector<FloatVec> best_values = model.dump_values();
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - start);
            FloatVec x(count * d);
            std::vector<std::vector<std::uint8_t>> labels(1);
            labels[0].resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                std::copy_n(features.data() + order[start + i] * d, d, x.data() + i * d);
                labels[0][i] =
                    train_ds.flows[order[start + i]].label == Label::attack ? 1 : 0;
            }
            Tensor input = Tensor::from_data({count, d}, std::move(x));
            Tensor p = reshape(model.forward(input), {1, count});
            std::vector<std::vector<std::uint8_t>> dups(1);
            dups[0].assign(count, 0);
            Tensor loss = batch_loss(p, labels, dups);
            for (Parameter* prm : model.parameters()) prm->tensor.zero_grad();
            backward(loss);
            opt.step();
        }
        auto verdicts = mlp_predict(model, val_ds.flows, val_stats);
        std::vector<std::uint8_t> pred(verdicts.size());
        for (std::size_t i = 0; i < verdicts.size(); ++i) pred[i] = verdicts[i].attack ? 1 : 0;
        const double f1 = compute_metrics(pred, val_labels).f1;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_values = model.dump_values();
        }
    }
    model.load_values(best_values);
    return model;
}

} // namespace fsd
