#pragma once

// Transformer encoder over flow-token embeddings: pre-normalization blocks
// with rotary position phases, multi-head self-attention under a causal or
// bidirectional mask, and a gated feed-forward. Decoder-style stacks mask
// future positions for generation; token classification wants connections
// between every pair of positions, so the mask is configurable and the
// bidirectional mode simply drops the causal restriction.
//
// The backbone here is small and randomly initialized. By default its
// parameters are frozen: it then acts as a fixed feature mixer while the
// tokenizer and classification head learn around it; unfreezing is a flag.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/optim.hpp"
#include "fsd/tensor.hpp"

namespace fsd {

enum class MaskMode : std::uint8_t { causal = 0, bidirectional = 1 };

inline const char* to_string(MaskMode m) {
    return m == MaskMode::causal ? "causal" : "bidirectional";
}

inline MaskMode mask_mode_from_string(const std::string& s) {
    if (s == "causal") return MaskMode::causal;
    if (s == "bidirectional") return MaskMode::bidirectional;
    throw ConfigError("unknown mask mode: " + s);
}

struct BackboneConfig {
    std::size_t d_model = 64;
    std::size_t n_layers = 4;
    std::size_t n_heads = 4;
    std::size_t max_seq = 64;
    MaskMode mask_mode = MaskMode::bidirectional;
    bool rope_enabled = true;
    bool frozen = true;
    double rope_base = 10000.0;

    std::size_t head_dim() const { return d_model / n_heads; }
    std::size_t ffn_hidden() const {
        const std::size_t raw = 8 * d_model / 3;
        return (raw + 7) / 8 * 8;
    }
    void validate() const {
        if (d_model == 0 || n_layers == 0 || n_heads == 0 || max_seq == 0)
            throw ConfigError("backbone: dims must be positive");
        if (d_model % n_heads != 0)
            throw ConfigError("backbone: d_model " + std::to_string(d_model) +
                              " not divisible by n_heads " + std::to_string(n_heads));
        if (head_dim() % 2 != 0)
            throw ConfigError("backbone: head dim must be even for rotary phases");
    }
};

// Additive attention mask [seq, seq]: 0 on allowed pairs, -inf on masked
// ones. Causal allows key j <= query i; bidirectional allows all pairs.
inline Tensor attention_mask_tensor(MaskMode mode, std::size_t seq) {
    FloatVec m(seq * seq, 0.0f);
    if (mode == MaskMode::causal) {
        const float neg_inf = -std::numeric_limits<float>::infinity();
        for (std::size_t i = 0; i < seq; ++i)
            for (std::size_t j = i + 1; j < seq; ++j) m[i * seq + j] = neg_inf;
    }
    return Tensor::from_data({seq, seq}, std::move(m));
}

// softmax(q k^T / sqrt(head_dim) + mask) per head; masked pairs are exactly 0.
inline Tensor attention_weights(const Tensor& q, const Tensor& k, const Tensor& mask) {
    const std::size_t hd = q.dim(q.ndim() - 1);
    Tensor scores = scale(matmul(q, transpose(k, -2, -1)),
                          1.0f / std::sqrt(static_cast<float>(hd)));
    return softmax(add(scores, mask), -1);
}

class TransformerBackbone {
public:
    TransformerBackbone() = default;

    TransformerBackbone(const BackboneConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
        cfg_.validate();
        const std::size_t d = cfg_.d_model;
        const std::size_t h = cfg_.ffn_hidden();
        const float sd = 1.0f / std::sqrt(static_cast<float>(d));
        const float sh = 1.0f / std::sqrt(static_cast<float>(h));
        layers_.resize(cfg_.n_layers);
        for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
            const std::string p = "backbone.layer" + std::to_string(l) + ".";
            Layer& L = layers_[l];
            L.attn_gain = Parameter(Tensor::filled({d}, 1.0f), p + "attn_norm.gain");
            L.wq = Parameter(uniform_tensor({d, d}, -sd, sd, rng), p + "wq");
            L.wk = Parameter(uniform_tensor({d, d}, -sd, sd, rng), p + "wk");
            L.wv = Parameter(uniform_tensor({d, d}, -sd, sd, rng), p + "wv");
            L.wo = Parameter(uniform_tensor({d, d}, -sd, sd, rng), p + "wo");
            L.ffn_gain = Parameter(Tensor::filled({d}, 1.0f), p + "ffn_norm.gain");
            L.w_gate = Parameter(uniform_tensor({d, h}, -sd, sd, rng), p + "ffn.w_gate");
            L.w_up = Parameter(uniform_tensor({d, h}, -sd, sd, rng), p + "ffn.w_up");
            L.w_down = Parameter(uniform_tensor({h, d}, -sh, sh, rng), p + "ffn.w_down");
        }
        final_gain_ = Parameter(Tensor::filled({d}, 1.0f), "backbone.final_norm.gain");
        set_frozen(cfg_.frozen);
    }

    // [batch, seq, d_model] -> [batch, seq, d_model]
    Tensor forward(const Tensor& emb) const {
        if (emb.ndim() != 3 || emb.dim(2) != cfg_.d_model)
            throw ShapeError("backbone: expected [batch, seq, " + std::to_string(cfg_.d_model) +
                             "], got " + shape_str(emb.shape()));
        const std::size_t seq = emb.dim(1);
        if (seq > cfg_.max_seq)
            throw SeqTooLong("backbone: sequence of " + std::to_string(seq) +
                             " exceeds max_seq " + std::to_string(cfg_.max_seq));

        const Tensor mask = attention_mask_tensor(cfg_.mask_mode, seq);
        Tensor h = emb;
        for (const Layer& L : layers_) {
            h = add(h, attention(mul(rmsnorm(h), L.attn_gain.tensor), L, mask));
            Tensor f = mul(rmsnorm(h), L.ffn_gain.tensor);
            Tensor gated = mul(silu(matmul(f, L.w_gate.tensor)), matmul(f, L.w_up.tensor));
            h = add(h, matmul(gated, L.w_down.tensor));
        }
        return mul(rmsnorm(h), final_gain_.tensor);
    }

    void set_frozen(bool frz) {
        cfg_.frozen = frz;
        for (Layer& L : layers_)
            for (Parameter* p : L.all()) p->set_frozen(frz);
        final_gain_.set_frozen(frz);
    }
    void freeze() { set_frozen(true); }

    const BackboneConfig& config() const { return cfg_; }

    void collect_parameters(std::vector<Parameter*>& out) {
        for (Layer& L : layers_)
            for (Parameter* p : L.all()) out.push_back(p);
        out.push_back(&final_gain_);
    }

private:
    struct Layer {
        Parameter attn_gain, wq, wk, wv, wo, ffn_gain, w_gate, w_up, w_down;
        std::array<Parameter*, 9> all() {
            return {&attn_gain, &wq, &wk, &wv, &wo, &ffn_gain, &w_gate, &w_up, &w_down};
        }
    };

    Tensor attention(const Tensor& x, const Layer& L, const Tensor& mask) const {
        const std::size_t b = x.dim(0), s = x.dim(1);
        const std::size_t nh = cfg_.n_heads, hd = cfg_.head_dim();
        auto heads = [&](const Tensor& t) {
            // [b, s, d] -> [b, nh, s, hd]
            return transpose(reshape(t, {b, s, nh, hd}), 1, 2);
        };
        Tensor q = heads(matmul(x, L.wq.tensor));
        Tensor k = heads(matmul(x, L.wk.tensor));
        Tensor v = heads(matmul(x, L.wv.tensor));
        if (cfg_.rope_enabled) {
            q = rope(q, 2, cfg_.rope_base);
            k = rope(k, 2, cfg_.rope_base);
        }
        Tensor att = attention_weights(q, k, mask);
        Tensor ctx = reshape(transpose(matmul(att, v), 1, 2), {b, s, cfg_.d_model});
        return matmul(ctx, L.wo.tensor);
    }

    BackboneConfig cfg_;
    std::vector<Layer> layers_;
    Parameter final_gain_;
};

} // namespace fsd
