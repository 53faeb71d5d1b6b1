// Rough timing of one training step at the default desk scale.
#include <chrono>
#include <cstdio>
#include <random>

#include "fsd/head.hpp"
#include "fsd/model.hpp"
#include "fsd/optim.hpp"

using namespace fsd;

int main() {
    ModelConfig cfg;
    cfg.n_bins = 64;
    cfg.backbone.d_model = 64;
    cfg.backbone.n_layers = 4;
    cfg.backbone.n_heads = 4;
    cfg.backbone.frozen = true;
    DetectionModel model(cfg);

    const std::size_t B = 32, S = 64, D = cfg.d_feat();
    std::mt19937_64 rng(1);
    Tensor x = uniform_tensor({B, S, D}, 0.0f, 1.0f, rng);
    std::vector<std::vector<std::uint8_t>> labels(B, std::vector<std::uint8_t>(S));
    std::vector<std::vector<std::uint8_t>> dups(B, std::vector<std::uint8_t>(S, 0));
    for (auto& row : labels)
        for (auto& v : row) v = rng() & 1;

    Optimizer opt(model.parameters(), {});

    auto t0 = std::chrono::steady_clock::now();
    const int iters = 20;
    float last = 0;
    for (int i = 0; i < iters; ++i) {
        Tensor p = model.forward_probs(x);
        Tensor loss = batch_loss(p, labels, dups);
        model.zero_grad();
        backward(loss);
        opt.step();
        last = loss.item();
    }
    auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
    std::printf("loss %.5f, %.2f ms/step (frozen backbone)\n", last, ms);

    model.set_backbone_frozen(false);
    Optimizer opt2(model.parameters(), {});
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) {
        Tensor p = model.forward_probs(x);
        Tensor loss = batch_loss(p, labels, dups);
        model.zero_grad();
        backward(loss);
        opt2.step();
        last = loss.item();
    }
    t1 = std::chrono::steady_clock::now();
    const double ms2 = std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
    std::printf("loss %.5f, %.2f ms/step (trainable backbone)\n", last, ms2);

    // inference-only timing
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) {
        Tensor p = model.forward_probs(x);
        last = p.data()[0];
    }
    t1 = std::chrono::steady_clock::now();
    std::printf("p0 %.4f, %.2f ms/forward\n", last,
                std::chrono::duration<double, std::milli>(t1 - t0).count() / iters);
    return 0;
}
