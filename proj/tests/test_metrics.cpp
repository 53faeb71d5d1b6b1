#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fsd/metrics.hpp"

using namespace fsd;
using Catch::Approx;

namespace {

// independent confusion counting: explicit truth-table walk
MetricsReport oracle(const std::vector<std::uint8_t>& pred,
                     const std::vector<std::uint8_t>& truth) {
    MetricsReport r;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int cell = (pred[i] ? 2 : 0) + (truth[i] ? 1 : 0);
        switch (cell) {
            case 3: r.tp++; break;
            case 2: r.fp++; break;
            case 1: r.fn++; break;
            default: r.tn++; break;
        }
    }
    const double total = static_cast<double>(pred.size());
    r.accuracy = total > 0 ? (r.tp + r.tn) / total : 0.0;
    r.precision = (r.tp + r.fp) ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
    r.recall = (r.tp + r.fn) ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0
               ? 2 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

} // namespace

TEST_CASE("compute_metrics closed-form example") {
    // tp=8, fp=2, fn=2, tn=8
    std::vector<std::uint8_t> pred, truth;
    for (int i = 0; i < 8; ++i) { pred.push_back(1); truth.push_back(1); }
    for (int i = 0; i < 2; ++i) { pred.push_back(1); truth.push_back(0); }
    for (int i = 0; i < 2; ++i) { pred.push_back(0); truth.push_back(1); }
    for (int i = 0; i < 8; ++i) { pred.push_back(0); truth.push_back(0); }
    auto r = compute_metrics(pred, truth);
    CHECK(r.tp == 8);
    CHECK(r.fp == 2);
    CHECK(r.fn == 2);
    CHECK(r.tn == 8);
    CHECK(r.precision == Approx(0.8));
    CHECK(r.recall == Approx(0.8));
    CHECK(r.f1 == Approx(0.8));
    CHECK(r.accuracy == Approx(0.8));
}

TEST_CASE("all-correct predictions give accuracy and f1 of 1") {
    std::vector<std::uint8_t> v = {1, 0, 1, 1, 0};
    auto r = compute_metrics(v, v);
    CHECK(r.accuracy == 1.0);
    CHECK(r.f1 == 1.0);
}

TEST_CASE("zero-denominator conventions") {
    // no predicted positives -> precision 0
    auto r = compute_metrics({0, 0, 0}, {1, 0, 1});
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);
    // no actual positives -> recall 0
    auto r2 = compute_metrics({1, 0}, {0, 0});
    CHECK(r2.recall == 0.0);
}

TEST_CASE("compute_metrics rejects mismatched lengths") {
    CHECK_THROWS_AS(compute_metrics({1, 0}, {1}), LengthMismatch);
}

TEST_CASE("compute_metrics equals the brute-force oracle on random vectors") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 1000;
        std::vector<std::uint8_t> pred(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = rng() & 1;
            truth[i] = rng() & 1;
        }
        auto got = compute_metrics(pred, truth);
        auto want = oracle(pred, truth);
        REQUIRE(got.tp == want.tp);
        REQUIRE(got.fp == want.fp);
        REQUIRE(got.tn == want.tn);
        REQUIRE(got.fn == want.fn);
        REQUIRE(got.accuracy == Approx(want.accuracy).margin(1e-12));
        REQUIRE(got.precision == Approx(want.precision).margin(1e-12));
        REQUIRE(got.recall == Approx(want.recall).margin(1e-12));
        REQUIRE(got.f1 == Approx(want.f1).margin(1e-12));
    }
}
