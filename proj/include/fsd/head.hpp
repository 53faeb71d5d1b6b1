#pragma once

// Classification head: projects per-flow hidden states into a small space,
// then a second linear layer emits one attack logit per flow. The loss is
// mean binary cross-entropy over the genuine (non-duplicate) positions of a
// sequence; padding copies contribute exactly nothing.

#include <cstdint>
#include <random>
#include <vector>

#include "fsd/error.hpp"
#include "fsd/optim.hpp"
#include "fsd/tensor.hpp"

namespace fsd {

class ClassificationHead {
public:
    ClassificationHead() = default;

    ClassificationHead(std::size_t d_model, std::size_t d_proj, std::mt19937_64& rng)
        : d_model_(d_model), d_proj_(d_proj) {
        const float sm = 1.0f / std::sqrt(static_cast<float>(d_model));
        const float sp = 1.0f / std::sqrt(static_cast<float>(d_proj));
        wp_ = Parameter(uniform_tensor({d_model, d_proj}, -sm, sm, rng), "head.wp");
        bp_ = Parameter(Tensor::zeros({d_proj}), "head.bp");
        wc_ = Parameter(uniform_tensor({d_proj, 1}, -sp, sp, rng), "head.wc");
        bc_ = Parameter(Tensor::zeros({1}), "head.bc");
    }

    // [batch, seq, d_model] -> attack probabilities [batch, seq] in (0,1)
    Tensor classify(const Tensor& hidden) const {
        if (hidden.ndim() != 3 || hidden.dim(2) != d_model_)
            throw ShapeError("head: expected [batch, seq, " + std::to_string(d_model_) +
                             "], got " + shape_str(hidden.shape()));
        Tensor proj = add(matmul(hidden, wp_.tensor), bp_.tensor);
        Tensor logits = add(matmul(proj, wc_.tensor), bc_.tensor);
        return reshape(sigmoid(logits), {hidden.dim(0), hidden.dim(1)});
    }

    std::size_t d_proj() const { return d_proj_; }

    void collect_parameters(std::vector<Parameter*>& out) {
        out.push_back(&wp_);
        out.push_back(&bp_);
        out.push_back(&wc_);
        out.push_back(&bc_);
    }

private:
    std::size_t d_model_ = 0, d_proj_ = 0;
    Parameter wp_, bp_, wc_, bc_;
};

inline bool verdict_from_probability(float p) { return p > 0.5f; }

// Cross-entropy over one sequence:
//   L = -(1/N') sum over non-duplicate i of [y_i log p_i + (1-y_i) log(1-p_i)]
// where N' counts the non-duplicate positions.
inline Tensor sequence_loss(const Tensor& p, const std::vector<std::uint8_t>& labels,
                            const std::vector<std::uint8_t>& dup_mask) {
    if (p.ndim() != 1 || p.size() != labels.size() || labels.size() != dup_mask.size())
        throw LengthMismatch("sequence_loss: probabilities " + shape_str(p.shape()) + ", " +
                             std::to_string(labels.size()) + " labels, " +
                             std::to_string(dup_mask.size()) + " mask entries");
    const std::size_t n = labels.size();
    FloatVec y(n), keep(n);
    std::size_t genuine = 0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = labels[i] ? 1.0f : 0.0f;
        keep[i] = dup_mask[i] ? 0.0f : 1.0f;
        genuine += dup_mask[i] ? 0 : 1;
    }
    if (genuine == 0) throw LengthMismatch("sequence_loss: no genuine positions");
    Tensor yt = Tensor::from_data({n}, std::move(y));
    Tensor kt = Tensor::from_data({n}, std::move(keep));
    Tensor term = add(mul(yt, log(p)), mul(affine(yt, -1.0f, 1.0f), log(affine(p, -1.0f, 1.0f))));
    return scale(sum(mul(kt, term)), -1.0f / static_cast<float>(genuine));
}

// Mean of per-sequence losses over a [batch, seq] probability tensor.
inline Tensor batch_loss(const Tensor& p, const std::vector<std::vector<std::uint8_t>>& labels,
                         const std::vector<std::vector<std::uint8_t>>& dup_masks) {
    if (p.ndim() != 2 || p.dim(0) != labels.size() || labels.size() != dup_masks.size())
        throw LengthMismatch("batch_loss: shape " + shape_str(p.shape()) + " vs " +
                             std::to_string(labels.size()) + " label rows");
    const std::size_t b = p.dim(0), s = p.dim(1);
    FloatVec y(b * s), w(b * s);
    for (std::size_t r = 0; r < b; ++r) {
        if (labels[r].size() != s || dup_masks[r].size() != s)
            throw LengthMismatch("batch_loss: row " + std::to_string(r) + " length mismatch");
        std::size_t genuine = 0;
        for (std::size_t i = 0; i < s; ++i) genuine += dup_masks[r][i] ? 0 : 1;
        if (genuine == 0) throw LengthMismatch("batch_loss: row with no genuine positions");
        const float rw = -1.0f / (static_cast<float>(genuine) * static_cast<float>(b));
        for (std::size_t i = 0; i < s; ++i) {
            y[r * s + i] = labels[r][i] ? 1.0f : 0.0f;
            w[r * s + i] = dup_masks[r][i] ? 0.0f : rw;
        }
    }
    Tensor yt = Tensor::from_data({b, s}, std::move(y));
    Tensor wt = Tensor::from_data({b, s}, std::move(w));
    Tensor term = add(mul(yt, log(p)), mul(affine(yt, -1.0f, 1.0f), log(affine(p, -1.0f, 1.0f))));
    return sum(mul(wt, term));
}

} // namespace fsd
