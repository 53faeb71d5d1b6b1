#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "fsd/synth.hpp"

using namespace fsd;
using Catch::Approx;

TEST_CASE("synthesize emits the requested mixture with labels") {
    SynthesisConfig cfg;
    cfg.n_attack = 200;
    cfg.n_benign = 2000;
    cfg.rng_seed = 7;
    Dataset ds = synthesize(cfg);
    REQUIRE(ds.flows.size() == 2200);
    CHECK(ds.count_label(Label::attack) == 200);
    CHECK(ds.count_label(Label::benign) == 2000);
    CHECK(ds.fully_labeled());
    for (const auto& f : ds.flows) CHECK_NOTHROW(validate_flow(f));
}

TEST_CASE("attack destinations stay inside the victim subnets") {
    SynthesisConfig cfg;
    cfg.n_attack = 3000;
    cfg.n_benign = 10;
    cfg.victim_subnets = 10;
    cfg.rng_seed = 3;
    Dataset ds = synthesize(cfg);
    std::set<std::string> dsts;
    for (const auto& f : ds.flows)
        if (f.label == Label::attack) {
            CHECK(f.dst_ip.rfind("10.77.", 0) == 0);
            dsts.insert(f.dst_ip);
        }
    // 10 class C segments expose 2560 addresses; 3000 draws should hit many
    CHECK(dsts.size() > 1500);
    CHECK(dsts.size() <= 2560);

    // every timestamp inside the configured window
    for (const auto& f : ds.flows) {
        CHECK(f.timestamp >= cfg.ts_start);
        CHECK(f.timestamp < cfg.ts_end);
    }
}

TEST_CASE("synthesize is bit-reproducible under a fixed seed") {
    SynthesisConfig cfg;
    cfg.n_attack = 100;
    cfg.n_benign = 300;
    cfg.rng_seed = 1234;
    Dataset a = synthesize(cfg);
    Dataset b = synthesize(cfg);
    REQUIRE(a.flows.size() == b.flows.size());
    for (std::size_t i = 0; i < a.flows.size(); ++i) {
        CHECK(a.flows[i].src_ip == b.flows[i].src_ip);
        CHECK(a.flows[i].dst_ip == b.flows[i].dst_ip);
        CHECK(a.flows[i].total_bytes == b.flows[i].total_bytes);
        CHECK(a.flows[i].mean_pkt_len == b.flows[i].mean_pkt_len);
        CHECK(a.flows[i].std_pkt_len == b.flows[i].std_pkt_len);
        CHECK(a.flows[i].timestamp == b.flows[i].timestamp);
    }
    cfg.rng_seed = 1235;
    Dataset c = synthesize(cfg);
    bool differs = false;
    for (std::size_t i = 0; i < a.flows.size() && !differs; ++i)
        differs = a.flows[i].timestamp != c.flows[i].timestamp;
    CHECK(differs);
}

TEST_CASE("synthesize validates its configuration") {
    SynthesisConfig cfg;
    cfg.victim_subnets = 0;
    CHECK_THROWS_AS(synthesize(cfg), ConfigError);
    cfg = SynthesisConfig{};
    cfg.attack_vectors = {"no_such_vector"};
    CHECK_THROWS_AS(synthesize(cfg), ConfigError);
    cfg = SynthesisConfig{};
    cfg.ts_start = cfg.ts_end;
    CHECK_THROWS_AS(synthesize(cfg), ConfigError);
}

TEST_CASE("cosine similarity basics") {
    const float a[3] = {1.0f, 0.0f, 0.0f};
    const float b[3] = {0.0f, 1.0f, 0.0f};
    CHECK(cosine_similarity(a, a, 3) == Approx(1.0));
    CHECK(cosine_similarity(a, b, 3) == Approx(0.0));

    // two identical flows normalize to identical vectors -> similarity 1
    std::vector<float> vecs = {0.3f, 0.1f, 0.5f, 0.3f, 0.1f, 0.5f};
    auto s = pairwise_similarity_summary(vecs, 3);
    CHECK(s.n_pairs == 1);
    CHECK(s.max_sim == Approx(1.0));
    CHECK(s.min_sim == Approx(1.0));
}

TEST_CASE("attack flows are mutually similar, benign flows much less so") {
    SynthesisConfig cfg;
    cfg.n_attack = 500;
    cfg.n_benign = 5000;
    cfg.rng_seed = 7;
    Dataset ds = synthesize(cfg);
    auto stats = attack_similarity_stats(ds, ds.feature_set);

    CHECK(stats.attack.n_pairs == 500 * 499 / 2);
    CHECK(stats.attack.fraction_above_095() >= 0.80);
    CHECK(stats.benign.fraction_above_095() < stats.attack.fraction_above_095());
    // CDF shape: mass concentrated near 1 for attacks
    CHECK(stats.attack.cdf(0.9) < 0.2);
}

TEST_CASE("attack_similarity_stats demands labels and two flows per class") {
    SynthesisConfig cfg;
    cfg.n_attack = 1;
    cfg.n_benign = 50;
    Dataset ds = synthesize(cfg);
    CHECK_THROWS_AS(attack_similarity_stats(ds, ds.feature_set), InsufficientData);
}

TEST_CASE("attack flows are low-rate against the benign byte median") {
    SynthesisConfig cfg;
    cfg.n_attack = 400;
    cfg.n_benign = 4000;
    cfg.rng_seed = 11;
    Dataset ds = synthesize(cfg);
    std::vector<std::uint64_t> benign_bytes;
    for (const auto& f : ds.flows)
        if (f.label == Label::benign) benign_bytes.push_back(f.total_bytes);
    std::sort(benign_bytes.begin(), benign_bytes.end());
    const std::uint64_t median = benign_bytes[benign_bytes.size() / 2];
    std::size_t low = 0, total = 0;
    for (const auto& f : ds.flows)
        if (f.label == Label::attack) {
            ++total;
            low += f.total_bytes < median;
        }
    CHECK(static_cast<double>(low) / static_cast<double>(total) >= 0.80);
}

TEST_CASE("zero-shot template split is disjoint and covers the default set") {
    auto train = zero_shot_train_vectors();
    auto test = zero_shot_test_vectors();
    std::set<std::string> train_set(train.begin(), train.end());
    for (const auto& t : test) CHECK(train_set.count(t) == 0);
    std::set<std::string> all(train.begin(), train.end());
    all.insert(test.begin(), test.end());
    CHECK(all.size() == default_attack_vectors().size());
}
