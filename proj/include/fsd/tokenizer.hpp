#pragma once

// Flow tokenizer: a trainable two-layer MLP that lifts a normalized flow
// feature vector into the encoder embedding space, one flow per token.

#include <cstdint>
#include <random>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/optim.hpp"
#include "fsd/tensor.hpp"

namespace fsd {

struct TokenizerConfig {
    std::size_t d_feat = 9;
    std::size_t d_hidden = 18; // defaults to 2 * d_feat
    std::size_t d_model = 64;
};

class FlowTokenizer {
public:
    FlowTokenizer() = default;

    FlowTokenizer(const TokenizerConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
        const float s1 = 1.0f / std::sqrt(static_cast<float>(cfg.d_feat));
        const float s2 = 1.0f / std::sqrt(static_cast<float>(cfg.d_hidden));
        w1_ = Parameter(uniform_tensor({cfg.d_feat, cfg.d_hidden}, -s1, s1, rng), "tokenizer.w1");
        b1_ = Parameter(Tensor::zeros({cfg.d_hidden}), "tokenizer.b1");
        w2_ = Parameter(uniform_tensor({cfg.d_hidden, cfg.d_model}, -s2, s2, rng), "tokenizer.w2");
        b2_ = Parameter(Tensor::zeros({cfg.d_model}), "tokenizer.b2");
    }

    // [..., d_feat] -> [..., d_model], applied independently per position
    Tensor embed(const Tensor& x) const {
        if (x.dim(x.ndim() - 1) != cfg_.d_feat)
            throw ShapeError("tokenizer: expected trailing dim " + std::to_string(cfg_.d_feat) +
                             ", got " + shape_str(x.shape()));
        Tensor h = silu(add(matmul(x, w1_.tensor), b1_.tensor));
        return add(matmul(h, w2_.tensor), b2_.tensor);
    }

    const TokenizerConfig& config() const { return cfg_; }

    void collect_parameters(std::vector<Parameter*>& out) {
        out.push_back(&w1_);
        out.push_back(&b1_);
        out.push_back(&w2_);
        out.push_back(&b2_);
    }

private:
    TokenizerConfig cfg_;
    Parameter w1_, b1_, w2_, b2_;
};

} // namespace fsd
