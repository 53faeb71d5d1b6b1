#pragma once

// Scenario runners: balanced, imbalanced, zero-shot, sequencer ablation,
// hidden-layer sweep and six-feature NetFlow mode, each on synthetic data
// with the per-flow MLP baseline alongside where a comparison is meaningful.
// Runs are reproducible for fixed seeds; runtime_ms is wall time and is the
// only field allowed to vary.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "fsd/baseline.hpp"
#include "fsd/metrics.hpp"
#include "fsd/synth.hpp"
#include "fsd/trainer.hpp"

namespace fsd {

enum class ScenarioKind : std::uint8_t {
    balanced = 0,
    imbalanced = 1,
    zeroshot = 2,
    ablation_sequencer = 3,
    layer_sweep = 4,
    netflow6 = 5,
};

inline const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::balanced: return "balanced";
        case ScenarioKind::imbalanced: return "imbalanced";
        case ScenarioKind::zeroshot: return "zeroshot";
        case ScenarioKind::ablation_sequencer: return "ablation_sequencer";
        case ScenarioKind::layer_sweep: return "layer_sweep";
        default: return "netflow6";
    }
}

inline ScenarioKind scenario_from_string(const std::string& s) {
    if (s == "balanced") return ScenarioKind::balanced;
    if (s == "imbalanced") return ScenarioKind::imbalanced;
    if (s == "zeroshot") return ScenarioKind::zeroshot;
    if (s == "ablation" || s == "ablation_sequencer") return ScenarioKind::ablation_sequencer;
    if (s == "sweep" || s == "layer_sweep") return ScenarioKind::layer_sweep;
    if (s == "netflow6") return ScenarioKind::netflow6;
    throw ConfigError("unknown scenario: " + s);
}

struct ScenarioSizes {
    std::size_t n_attack = 0; // 0 -> scenario default
    std::size_t n_benign = 0;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::imbalanced;
    std::vector<std::uint64_t> seeds = {7};
    ScenarioSizes sizes;
    TrainConfig train;
    std::vector<std::size_t> sweep_layers = {1, 2, 4, 8};
};

// FSD_THREADS caps worker parallelism for independent runs (default 1).
inline std::size_t worker_cap() {
    if (const char* env = std::getenv("FSD_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return 1;
}

namespace detail {

inline void run_tasks(std::vector<std::function<void()>>& tasks) {
    const std::size_t cap = worker_cap();
    if (cap <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    for (std::size_t start = 0; start < tasks.size(); start += cap) {
        std::vector<std::thread> pool;
        for (std::size_t i = start; i < std::min(start + cap, tasks.size()); ++i)
            pool.emplace_back(tasks[i]);
        for (auto& t : pool) t.join();
    }
}

inline ScenarioSizes default_sizes(ScenarioKind kind, ScenarioSizes s) {
    if (s.n_attack == 0 || s.n_benign == 0) {
        switch (kind) {
            case ScenarioKind::balanced:
            case ScenarioKind::zeroshot:
                return {4000, 4000};
            default:
                return {2000, 20000}; // paper-shaped imbalanced mixture
        }
    }
    return s;
}

struct EvaluatedModel {
    MetricsReport metrics;
    double per_flow_ms = 0.0;
};

inline EvaluatedModel evaluate_pipeline(const ModelCheckpoint& ckpt, const Dataset& test,
                                        SequenceMode mode) {
    DetectionModel model = restore_model(ckpt);
    const NormalizationStats stats =
        ckpt.config.norm_scope == NormScope::fitted
            ? ckpt.stats
            : compute_stats(test.flows, feature_set(ckpt.config.feature_mode));
    const auto t0 = std::chrono::steady_clock::now();
    auto verdicts = infer_with_mode(model, test.flows, stats, mode);
    const auto t1 = std::chrono::steady_clock::now();
    EvaluatedModel out;
    out.metrics = metrics_from_verdicts(verdicts, test.flows);
    out.per_flow_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() /
                      static_cast<double>(test.flows.size());
    out.metrics.runtime_ms = out.per_flow_ms;
    return out;
}

inline MetricsReport evaluate_baseline(MlpBaseline& mlp, const Dataset& test) {
    const FeatureSet fs = feature_set(mlp.config().feature_mode);
    const NormalizationStats stats = compute_stats(test.flows, fs);
    const auto t0 = std::chrono::steady_clock::now();
    auto verdicts = mlp_predict(mlp, test.flows, stats);
    const auto t1 = std::chrono::steady_clock::now();
    MetricsReport m = metrics_from_verdicts(verdicts, test.flows);
    m.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() /
                   static_cast<double>(test.flows.size());
    return m;
}

inline BaselineConfig baseline_from_train(const TrainConfig& t) {
    BaselineConfig b;
    b.feature_mode = t.model.feature_mode;
    b.norm_scope = t.model.norm_scope;
    b.epochs = t.epochs;
    b.optimizer = t.optimizer;
    b.rng_seed = t.rng_seed;
    return b;
}

inline std::string echo(const ScenarioConfig& cfg, std::uint64_t seed, const ScenarioSizes& sz) {
    return std::string("kind=") + to_string(cfg.kind) + " seed=" + std::to_string(seed) +
           " attack=" + std::to_string(sz.n_attack) + " benign=" + std::to_string(sz.n_benign) +
           " epochs=" + std::to_string(cfg.train.epochs) +
           " sequences=" + std::to_string(cfg.train.train_sequence_count) +
           " bins=" + std::to_string(cfg.train.model.n_bins) +
           " layers=" + std::to_string(cfg.train.model.backbone.n_layers) +
           " dmodel=" + std::to_string(cfg.train.model.backbone.d_model);
}

} // namespace detail

inline std::vector<MetricsReport> run_scenario(const ScenarioConfig& cfg) {
    const ScenarioSizes sizes = detail::default_sizes(cfg.kind, cfg.sizes);
    const FeatureMode mode = cfg.kind == ScenarioKind::netflow6 ? FeatureMode::netflow6
                                                                : cfg.train.model.feature_mode;
    std::vector<std::vector<MetricsReport>> per_seed(cfg.seeds.size());
    std::vector<std::function<void()>> tasks;

    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
        tasks.emplace_back([&, si] {
            const std::uint64_t seed = cfg.seeds[si];
            std::vector<MetricsReport>& out = per_seed[si];

            TrainConfig tc = cfg.train;
            tc.model.feature_mode = mode;
            tc.rng_seed = seed;
            const std::string config_echo = detail::echo(cfg, seed, sizes);

            SynthesisConfig sc;
            sc.n_attack = sizes.n_attack;
            sc.n_benign = sizes.n_benign;
            sc.rng_seed = seed;
            sc.feature_mode = mode;

            auto push = [&](MetricsReport m, const std::string& method) {
                m.scenario = to_string(cfg.kind);
                m.method = method + "/seed" + std::to_string(seed);
                m.config_echo = config_echo;
                out.push_back(std::move(m));
            };

            switch (cfg.kind) {
                case ScenarioKind::balanced:
                case ScenarioKind::imbalanced:
                case ScenarioKind::netflow6: {
                    Dataset ds = synthesize(sc);
                    auto parts = split(ds);
                    ModelCheckpoint ckpt = train(parts[0], parts[1], tc);
                    push(detail::evaluate_pipeline(ckpt, parts[2], SequenceMode::binned).metrics,
                         "flow_transformer");
                    MlpBaseline mlp = train_mlp_baseline(parts[0], parts[1],
                                                         detail::baseline_from_train(tc));
                    push(detail::evaluate_baseline(mlp, parts[2]), "mlp_baseline");
                    break;
                }
                case ScenarioKind::zeroshot: {
                    SynthesisConfig sa = sc;
                    sa.attack_vectors = zero_shot_train_vectors();
                    SynthesisConfig sb = sc;
                    sb.attack_vectors = zero_shot_test_vectors();
                    sb.rng_seed = seed + 10007; // different benign draw for dataset B
                    Dataset da = synthesize(sa);
                    Dataset db = synthesize(sb);
                    auto parts_a = split(da);
                    auto parts_b = split(db);
                    ModelCheckpoint ckpt = train(parts_a[0], parts_a[1], tc);
                    push(detail::evaluate_pipeline(ckpt, parts_b[2], SequenceMode::binned)
                             .metrics,
                         "flow_transformer");
                    MlpBaseline mlp = train_mlp_baseline(parts_a[0], parts_a[1],
                                                         detail::baseline_from_train(tc));
                    push(detail::evaluate_baseline(mlp, parts_b[2]), "mlp_baseline");
                    break;
                }
                case ScenarioKind::ablation_sequencer: {
                    Dataset ds = synthesize(sc);
                    auto parts = split(ds);
                    TrainConfig binned = tc;
                    binned.sequence_mode = SequenceMode::binned;
                    ModelCheckpoint ck_binned = train(parts[0], parts[1], binned);
                    push(detail::evaluate_pipeline(ck_binned, parts[2], SequenceMode::binned)
                             .metrics,
                         "flow_sequencer");
                    TrainConfig sliding = tc;
                    sliding.sequence_mode = SequenceMode::sliding_window;
                    ModelCheckpoint ck_sliding = train(parts[0], parts[1], sliding);
                    push(detail::evaluate_pipeline(ck_sliding, parts[2],
                                                   SequenceMode::sliding_window)
                             .metrics,
                         "sliding_window");
                    break;
                }
                case ScenarioKind::layer_sweep: {
                    Dataset ds = synthesize(sc);
                    auto parts = split(ds);
                    for (std::size_t layers : cfg.sweep_layers) {
                        TrainConfig swept = tc;
                        swept.model.backbone.n_layers = layers;
                        ModelCheckpoint ckpt = train(parts[0], parts[1], swept);
                        auto ev = detail::evaluate_pipeline(ckpt, parts[2], SequenceMode::binned);
                        push(ev.metrics, "flow_transformer_l" + std::to_string(layers));
                    }
                    break;
                }
            }
        });
    }
    detail::run_tasks(tasks);

    std::vector<MetricsReport> out;
    for (auto& v : per_seed)
        for (auto& m : v) out.push_back(std::move(m));
    return out;
}

} // namespace fsd
