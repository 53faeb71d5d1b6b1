#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "fsd/sequencer.hpp"

using namespace fsd;

namespace {

FlowRecord flow_with(double mean_len, std::uint64_t pkts, std::uint8_t proto = 6,
                     std::uint16_t sport = 1000, std::uint16_t dport = 80) {
    FlowRecord r;
    r.mean_pkt_len = mean_len;
    r.total_pkts = pkts;
    r.proto = proto;
    r.src_port = sport;
    r.dst_port = dport;
    r.min_pkt_len = static_cast<std::uint32_t>(mean_len);
    r.max_pkt_len = static_cast<std::uint32_t>(mean_len);
    r.total_bytes = static_cast<std::uint64_t>(mean_len) * pkts;
    return r;
}

std::vector<FlowRecord> random_batch(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> len(40.0, 1500.0);
    std::uniform_int_distribution<std::uint64_t> pkts(1, 50);
    std::uniform_int_distribution<int> port(0, 65535);
    std::vector<FlowRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        FlowRecord r = flow_with(len(rng), pkts(rng));
        r.src_port = static_cast<std::uint16_t>(port(rng));
        r.dst_port = static_cast<std::uint16_t>(port(rng));
        r.timestamp = rng();
        out.push_back(r);
    }
    return out;
}

// round-robin deal: hand F cards to N players in index order
std::vector<std::size_t> deal_oracle(std::size_t F, std::size_t N) {
    std::vector<std::size_t> counts(N, 0);
    std::size_t player = 0;
    for (std::size_t card = 0; card < F; ++card) {
        counts[player]++;
        player = (player + 1) % N;
    }
    return counts;
}

} // namespace

TEST_CASE("sort_flows orders by the five-key priority") {
    std::vector<FlowRecord> batch;
    batch.push_back(flow_with(100.0, 5));
    batch.push_back(flow_with(40.0, 9));
    auto order = sort_flows(batch);
    CHECK(order == std::vector<std::size_t>{1, 0}); // smaller mean first

    batch.clear();
    batch.push_back(flow_with(40.0, 5));
    batch.push_back(flow_with(40.0, 2));
    order = sort_flows(batch);
    CHECK(order == std::vector<std::size_t>{1, 0}); // second key breaks tie
}

TEST_CASE("sort_flows is stable on identical keys") {
    std::vector<FlowRecord> batch(3, flow_with(64.0, 2));
    batch[0].timestamp = 30;
    batch[1].timestamp = 10;
    batch[2].timestamp = 20;
    auto order = sort_flows(batch);
    CHECK(order == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("bin_sizes matches the closed form") {
    CHECK(bin_sizes(10, 3) == std::vector<std::size_t>{4, 3, 3});
    CHECK(bin_sizes(6, 3) == std::vector<std::size_t>{2, 2, 2});
    CHECK(bin_sizes(3, 5) == std::vector<std::size_t>{1, 1, 1, 0, 0});
}

TEST_CASE("bin_sizes matches the round-robin deal oracle") {
    for (std::size_t F = 1; F <= 200; ++F)
        for (std::size_t N = 1; N <= 16; ++N) {
            auto got = bin_sizes(F, N);
            auto want = deal_oracle(F, N);
            REQUIRE(got == want);
        }
}

TEST_CASE("build_matrix fills bins sequentially and pads short bins") {
    auto batch = random_batch(10, 7);
    auto order = sort_flows(batch);
    auto m = build_matrix(order, 3);
    REQUIRE(m.n_bins == 3);
    REQUIRE(m.n_cols == 4);
    // bin 0: sorted ranks 0..3; bin 1: ranks 4..6 plus dup of 6; bin 2: 7..9 plus dup of 9
    for (std::size_t c = 0; c < 4; ++c) CHECK(m.cell(0, c) == order[c]);
    for (std::size_t c = 0; c < 3; ++c) CHECK(m.cell(1, c) == order[4 + c]);
    CHECK(m.cell(1, 3) == order[6]);
    CHECK(m.is_dup(1, 3));
    for (std::size_t c = 0; c < 3; ++c) CHECK(m.cell(2, c) == order[7 + c]);
    CHECK(m.cell(2, 3) == order[9]);
    CHECK(m.is_dup(2, 3));
}

TEST_CASE("build_matrix with F == N is a single genuine column") {
    auto batch = random_batch(5, 3);
    auto m = build_matrix(sort_flows(batch), 5);
    CHECK(m.n_cols == 1);
    for (std::size_t b = 0; b < 5; ++b) CHECK_FALSE(m.is_dup(b, 0));
}

TEST_CASE("build_matrix rejects batches smaller than the bin count") {
    auto batch = random_batch(4, 3);
    CHECK_THROWS_AS(build_matrix(sort_flows(batch), 5), BatchTooSmall);
}

TEST_CASE("assemble_sequences returns the matrix columns") {
    auto batch = random_batch(10, 11);
    auto m = build_matrix(sort_flows(batch), 3);
    auto seqs = assemble_sequences(m);
    REQUIRE(seqs.size() == 4);
    for (const auto& s : seqs) CHECK(s.size() == 3);
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t b = 0; b < 3; ++b) {
            CHECK(seqs[c].positions[b] == m.cell(b, c));
            CHECK(seqs[c].dup_mask[b] == (m.is_dup(b, c) ? 1 : 0));
        }
}

TEST_CASE("coverage: non-duplicate cells partition the batch") {
    std::mt19937_64 seed_rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t F = 64 + seed_rng() % 1000;
        auto batch = random_batch(F, seed_rng());
        auto m = build_matrix(sort_flows(batch), 64);
        auto seqs = assemble_sequences(m);
        std::map<std::size_t, int> seen;
        std::size_t dups = 0;
        for (const auto& s : seqs)
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s.dup_mask[i]) ++dups;
                else seen[s.positions[i]]++;
            }
        REQUIRE(seen.size() == F);
        for (const auto& [idx, cnt] : seen) CHECK(cnt == 1);
        CHECK(dups == 64 * m.n_cols - F);
    }
}

TEST_CASE("homogeneity: bins are contiguous runs of the sort order") {
    auto batch = random_batch(333, 5);
    auto order = sort_flows(batch);
    std::vector<std::size_t> rank(batch.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    auto m = build_matrix(order, 64);
    std::size_t prev_max = 0;
    for (std::size_t b = 0; b < m.n_bins; ++b) {
        std::size_t lo = batch.size(), hi = 0;
        for (std::size_t c = 0; c < m.bin_fill[b]; ++c) {
            lo = std::min(lo, rank[m.cell(b, c)]);
            hi = std::max(hi, rank[m.cell(b, c)]);
        }
        if (b > 0) CHECK(lo > prev_max);
        prev_max = hi;
    }
}

TEST_CASE("sample_training_sequences emits columns first then bin-respecting samples") {
    auto batch = random_batch(100, 21);
    auto m = build_matrix(sort_flows(batch), 10);
    const std::size_t n_cols = m.n_cols;

    auto only_cols = sample_training_sequences(m, n_cols, 1);
    auto plain = assemble_sequences(m);
    REQUIRE(only_cols.size() == plain.size());
    for (std::size_t i = 0; i < plain.size(); ++i)
        CHECK(only_cols[i].positions == plain[i].positions);

    auto many = sample_training_sequences(m, 500, 1);
    REQUIRE(many.size() == 500);
    // membership: position i of every sampled sequence must come from bin i
    for (std::size_t k = n_cols; k < many.size(); ++k)
        for (std::size_t b = 0; b < m.n_bins; ++b) {
            bool in_bin = false;
            for (std::size_t c = 0; c < m.bin_fill[b]; ++c)
                if (m.cell(b, c) == many[k].positions[b]) { in_bin = true; break; }
            REQUIRE(in_bin);
        }

    auto again = sample_training_sequences(m, 500, 1);
    for (std::size_t k = 0; k < many.size(); ++k)
        CHECK(again[k].positions == many[k].positions);
    auto other_seed = sample_training_sequences(m, 500, 2);
    bool any_diff = false;
    for (std::size_t k = 0; k < many.size(); ++k)
        if (other_seed[k].positions != many[k].positions) { any_diff = true; break; }
    CHECK(any_diff);
}

TEST_CASE("sliding_window_sequences walks timestamp order") {
    auto batch = random_batch(5, 31);
    auto seqs = sliding_window_sequences(batch, 3, 1);
    REQUIRE(seqs.size() == 3);

    auto one = sliding_window_sequences(random_batch(64, 32), 64, 1);
    CHECK(one.size() == 1);

    auto many = sliding_window_sequences(random_batch(100, 33), 64, 1);
    CHECK(many.size() == 37);

    CHECK_THROWS_AS(sliding_window_sequences(random_batch(10, 34), 64, 1), BatchTooSmall);

    // positions within a window are timestamp-ordered
    auto b2 = random_batch(50, 35);
    auto s2 = sliding_window_sequences(b2, 10, 5);
    for (const auto& s : s2)
        for (std::size_t i = 1; i < s.size(); ++i)
            CHECK(b2[s.positions[i - 1]].timestamp <= b2[s.positions[i]].timestamp);
}

TEST_CASE("attach_labels copies per-position labels") {
    auto batch = random_batch(12, 41);
    for (std::size_t i = 0; i < batch.size(); ++i)
        batch[i].label = i % 3 == 0 ? Label::attack : Label::benign;
    auto m = build_matrix(sort_flows(batch), 4);
    auto seqs = assemble_sequences(m);
    attach_labels(seqs[0], batch);
    REQUIRE(seqs[0].labels.has_value());
    for (std::size_t b = 0; b < 4; ++b)
        CHECK((*seqs[0].labels)[b] ==
              (batch[seqs[0].positions[b]].label == Label::attack ? 1 : 0));
}
