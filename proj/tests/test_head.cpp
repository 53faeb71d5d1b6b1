#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fsd/head.hpp"

using namespace fsd;
using Catch::Approx;

TEST_CASE("classify with zero weights gives p = 0.5 everywhere") {
    std::mt19937_64 rng(1);
    ClassificationHead head(16, 8, rng);
    std::vector<Parameter*> params;
    head.collect_parameters(params);
    for (Parameter* p : params)
        std::fill(p->tensor.data().begin(), p->tensor.data().end(), 0.0f);
    Tensor h = uniform_tensor({2, 5, 16}, -1.0f, 1.0f, rng);
    Tensor p = head.classify(h);
    REQUIRE(p.shape() == Shape{2, 5});
    for (float v : p.data()) CHECK(v == 0.5f);
}

TEST_CASE("probability is monotone in the logit") {
    std::mt19937_64 rng(2);
    ClassificationHead head(4, 2, rng);
    std::vector<Parameter*> params;
    head.collect_parameters(params);
    // identity-ish single path: wp picks feature 0, wc scales positively
    std::fill(params[0]->tensor.data().begin(), params[0]->tensor.data().end(), 0.0f);
    params[0]->tensor.data()[0] = 1.0f; // wp[0][0]
    std::fill(params[2]->tensor.data().begin(), params[2]->tensor.data().end(), 0.0f);
    params[2]->tensor.data()[0] = 1.0f; // wc[0][0]
    std::fill(params[1]->tensor.data().begin(), params[1]->tensor.data().end(), 0.0f);
    std::fill(params[3]->tensor.data().begin(), params[3]->tensor.data().end(), 0.0f);

    float prev = -1.0f;
    for (float x : {-3.0f, -1.0f, 0.0f, 1.0f, 3.0f}) {
        Tensor h = Tensor::zeros({1, 1, 4});
        h.data()[0] = x;
        const float p = head.classify(h).data()[0];
        CHECK(p > prev);
        prev = p;
    }
    CHECK(verdict_from_probability(0.51f));
    CHECK_FALSE(verdict_from_probability(0.5f));
}

TEST_CASE("head gradients match finite differences") {
    std::mt19937_64 rng(5);
    ClassificationHead head(8, 4, rng);
    std::vector<Parameter*> params;
    head.collect_parameters(params);
    Tensor h = uniform_tensor({1, 4, 8}, -2.0f, 2.0f, rng);

    auto f = [&](const Tensor&) { return sum(head.classify(h)); };
    for (Parameter* prm : params) {
        auto rep = grad_check(f, prm->tensor);
        INFO("param " << prm->name << " rel err " << rep.max_rel_err);
        CHECK(rep.pass);
    }
}

TEST_CASE("sequence_loss matches hand-computed cross entropy") {
    Tensor p = Tensor::from_data({2}, {0.9f, 0.1f});
    const double want = -(std::log(0.9) + std::log(0.9)) / 2.0;
    Tensor loss = sequence_loss(p, {1, 0}, {0, 0});
    CHECK(loss.item() == Approx(want).margin(1e-5));
    CHECK(loss.item() == Approx(0.10536).margin(1e-5));

    Tensor p2 = Tensor::from_data({1}, {0.5f});
    CHECK(sequence_loss(p2, {1}, {0}).item() == Approx(std::log(2.0)).margin(1e-6));

    // perfect confident prediction drives the loss to ~0
    Tensor p3 = Tensor::from_data({1}, {0.999999f});
    CHECK(sequence_loss(p3, {1}, {0}).item() == Approx(0.0).margin(1e-5));
}

TEST_CASE("loss is non-negative on random inputs") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 16;
        std::vector<float> pv(n);
        std::vector<std::uint8_t> y(n), dup(n, 0);
        std::uniform_real_distribution<float> u(0.001f, 0.999f);
        for (std::size_t i = 0; i < n; ++i) {
            pv[i] = u(rng);
            y[i] = rng() & 1;
        }
        dup[rng() % n] = n > 1 ? 1 : 0;
        Tensor p = Tensor::from_data({n}, pv);
        CHECK(sequence_loss(p, y, dup).item() >= 0.0f);
    }
}

TEST_CASE("duplicate positions contribute exactly nothing") {
    Tensor p = Tensor::from_data({3}, {0.9f, 0.42f, 0.1f});
    Tensor a = sequence_loss(p, {1, 0, 0}, {0, 1, 0});
    Tensor b = sequence_loss(p, {1, 1, 0}, {0, 1, 0}); // flip the duplicate's label
    CHECK(a.item() == b.item());

    // masking a position equals dropping it from the sequence entirely
    Tensor q = Tensor::from_data({2}, {0.9f, 0.1f});
    Tensor c = sequence_loss(q, {1, 0}, {0, 0});
    Tensor d = sequence_loss(p, {1, 0, 0}, {0, 1, 0});
    CHECK(c.item() == Approx(d.item()).margin(1e-6));
}

TEST_CASE("loss gradient has the closed form (p - y) / N' at the logit") {
    // with p = sigmoid(z), dL/dz = (p - y)/N' per genuine position
    std::mt19937_64 rng(5);
    const std::size_t n = 5;
    Tensor z = uniform_tensor({n}, -2.0f, 2.0f, rng, true);
    std::vector<std::uint8_t> y = {1, 0, 1, 0, 1};
    std::vector<std::uint8_t> dup = {0, 0, 1, 0, 0};
    Tensor p = sigmoid(z);
    Tensor loss = sequence_loss(p, y, dup);
    backward(loss);
    const double n_genuine = 4.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double want = dup[i] ? 0.0 : (p.data()[i] - static_cast<double>(y[i])) / n_genuine;
        CHECK(z.grad()[i] == Approx(want).margin(1e-5));
    }
}

TEST_CASE("batch_loss averages per-sequence losses") {
    Tensor p = Tensor::from_data({2, 2}, {0.9f, 0.1f, 0.5f, 0.5f});
    std::vector<std::vector<std::uint8_t>> y = {{1, 0}, {1, 0}};
    std::vector<std::vector<std::uint8_t>> dup = {{0, 0}, {0, 0}};
    const double l1 = -(std::log(0.9) + std::log(0.9)) / 2.0;
    const double l2 = std::log(2.0);
    CHECK(batch_loss(p, y, dup).item() == Approx((l1 + l2) / 2.0).margin(1e-5));
}

TEST_CASE("loss rejects mismatched lengths") {
    Tensor p = Tensor::from_data({2}, {0.5f, 0.5f});
    CHECK_THROWS_AS(sequence_loss(p, {1}, {0, 0}), LengthMismatch);
    CHECK_THROWS_AS(sequence_loss(p, {1, 0}, {0}), LengthMismatch);
}
