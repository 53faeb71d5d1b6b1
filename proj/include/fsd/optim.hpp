#pragma once

// Named parameters and optimizers. Frozen parameters keep conducting
// gradients to upstream modules but are skipped by every optimizer step.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/tensor.hpp"

namespace fsd {

struct Parameter {
    Tensor tensor;
    bool frozen = false;
    std::string name;

    Parameter() = default;
    Parameter(Tensor t, std::string n, bool frz = false)
        : tensor(std::move(t)), frozen(frz), name(std::move(n)) {
        tensor.set_requires_grad(!frozen);
    }

    void set_frozen(bool frz) {
        frozen = frz;
        // skipping gradient accumulation for frozen weights; gradients still
        // pass through the ops that consume them
        tensor.set_requires_grad(!frz);
    }
};

enum class OptimizerKind : std::uint8_t { adam = 0, sgd = 1 };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    float learning_rate = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

class Optimizer {
public:
    Optimizer(std::vector<Parameter*> params, OptimizerConfig cfg)
        : params_(std::move(params)), cfg_(cfg) {}

    void zero_grad() {
        for (Parameter* p : params_) p->tensor.zero_grad();
    }

    void step() {
        ++t_;
        for (Parameter* p : params_) {
            if (p->frozen) continue;
            auto& w = p->tensor.data();
            const auto& g = p->tensor.grad();
            if (cfg_.kind == OptimizerKind::sgd) {
                for (std::size_t i = 0; i < w.size(); ++i)
                    w[i] -= cfg_.learning_rate * g[i];
                continue;
            }
            State& st = state_[p->tensor.node().get()];
            if (st.m.size() != w.size()) {
                st.m.assign(w.size(), 0.0f);
                st.v.assign(w.size(), 0.0f);
            }
            const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(t_));
            const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(t_));
            for (std::size_t i = 0; i < w.size(); ++i) {
                st.m[i] = cfg_.beta1 * st.m[i] + (1.0f - cfg_.beta1) * g[i];
                st.v[i] = cfg_.beta2 * st.v[i] + (1.0f - cfg_.beta2) * g[i] * g[i];
                const float mhat = st.m[i] / bc1;
                const float vhat = st.v[i] / bc2;
                w[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

private:
    struct State {
        std::vector<float> m, v;
    };
    std::vector<Parameter*> params_;
    OptimizerConfig cfg_;
    std::unordered_map<TensorNode*, State> state_;
    std::uint64_t t_ = 0;
};

} // namespace fsd
