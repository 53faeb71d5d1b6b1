#pragma once

// Synthetic carpet-bombing dataset generation: parametric attack templates
// mixed with broad benign traffic profiles, random arrival timestamps, and
// victim addresses sprayed across a handful of class C subnets.
//
// Attack templates are scripted traffic: one protocol, a narrow service
// port set and a tight small-packet profile per vector. That makes attack
// flows of one batch strongly similar to each other under the tokenizer's
// frequency/min-max encoding while benign flows stay spread out, which is
// the correlation structure this detector feeds on.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fsd/dataset.hpp"
#include "fsd/error.hpp"
#include "fsd/flow.hpp"
#include "fsd/normalize.hpp"

namespace fsd {

struct SynthesisConfig {
    std::size_t n_attack = 2000;
    std::size_t n_benign = 20000;
    std::vector<std::string> attack_vectors; // empty -> default_attack_vectors()
    std::size_t victim_subnets = 10;         // class C segments, 256 addresses each
    std::uint64_t rng_seed = 1;
    std::uint64_t ts_start = 1700000000000ull;
    std::uint64_t ts_end = 1700000060000ull;
    FeatureMode feature_mode = FeatureMode::full9;
};

inline const std::vector<std::string>& default_attack_vectors() {
    static const std::vector<std::string> v = {"syn_flood",  "dns_amp",       "ntp_amp",
                                               "ssdp_amp",   "memcached_amp", "ack_flood"};
    return v;
}

// Template split used by the zero-shot scenario: train on the first three
// vectors, test on the remaining three.
inline std::vector<std::string> zero_shot_train_vectors() {
    return {"syn_flood", "dns_amp", "ntp_amp"};
}
inline std::vector<std::string> zero_shot_test_vectors() {
    return {"ssdp_amp", "memcached_amp", "ack_flood"};
}

namespace detail {

struct AttackTemplate {
    const char* name;
    std::uint8_t proto;
    int src_port;                      // -1 -> random ephemeral
    std::array<std::uint16_t, 2> dst_ports;
    std::uint32_t len_lo, len_hi;      // per-packet length range
    std::uint32_t pkts_lo, pkts_hi;    // packets per flow
};

inline const AttackTemplate* find_template(const std::string& name) {
    static const AttackTemplate templates[] = {
        {"syn_flood", 6, -1, {80, 443}, 40, 52, 1, 3},
        {"ack_flood", 6, -1, {80, 443}, 40, 60, 1, 4},
        {"dns_amp", 17, 53, {80, 443}, 60, 90, 1, 4},
        {"ntp_amp", 17, 123, {80, 443}, 48, 76, 1, 4},
        {"ssdp_amp", 17, 1900, {80, 443}, 60, 100, 1, 3},
        {"memcached_amp", 17, 11211, {80, 443}, 60, 100, 1, 4},
    };
    for (const auto& t : templates)
        if (name == t.name) return &t;
    return nullptr;
}

inline std::string random_ipv4(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> octet(1, 254);
    return std::to_string(octet(rng)) + "." + std::to_string(octet(rng)) + "." +
           std::to_string(octet(rng)) + "." + std::to_string(octet(rng));
}

// Builds one flow from explicit per-packet lengths so every record
// invariant holds by construction.
inline FlowRecord flow_from_packets(const std::vector<std::uint32_t>& lens) {
    FlowRecord r;
    r.total_pkts = lens.size();
    std::uint64_t total = 0;
    std::uint32_t mn = lens[0], mx = lens[0];
    for (std::uint32_t l : lens) {
        total += l;
        mn = std::min(mn, l);
        mx = std::max(mx, l);
    }
    r.total_bytes = total;
    r.min_pkt_len = mn;
    r.max_pkt_len = mx;
    r.mean_pkt_len = static_cast<double>(total) / static_cast<double>(lens.size());
    if (lens.size() == 1) {
        r.std_pkt_len = 0.0;
    } else {
        double ss = 0.0;
        for (std::uint32_t l : lens) {
            const double d = static_cast<double>(l) - r.mean_pkt_len;
            ss += d * d;
        }
        r.std_pkt_len = std::sqrt(ss / static_cast<double>(lens.size()));
    }
    return r;
}

inline FlowRecord make_attack_flow(const AttackTemplate& t, const SynthesisConfig& cfg,
                                   std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint32_t> n_pkts(t.pkts_lo, t.pkts_hi);
    std::uniform_int_distribution<std::uint32_t> len(t.len_lo, t.len_hi);
    std::vector<std::uint32_t> lens(n_pkts(rng));
    for (auto& l : lens) l = len(rng);
    FlowRecord r = flow_from_packets(lens);

    r.proto = t.proto;
    if (t.src_port >= 0) {
        r.src_port = static_cast<std::uint16_t>(t.src_port);
    } else {
        std::uniform_int_distribution<int> eph(1024, 65535);
        r.src_port = static_cast<std::uint16_t>(eph(rng));
    }
    std::uniform_int_distribution<std::size_t> pick(0, t.dst_ports.size() - 1);
    r.dst_port = t.dst_ports[pick(rng)];

    r.src_ip = random_ipv4(rng); // spoofed
    std::uniform_int_distribution<std::size_t> subnet(0, cfg.victim_subnets - 1);
    std::uniform_int_distribution<int> host(0, 255);
    r.dst_ip = "10.77." + std::to_string(subnet(rng)) + "." + std::to_string(host(rng));
    r.label = Label::attack;
    return r;
}

struct BenignProfile {
    double weight;
    std::uint8_t proto;
    int src_port;  // -1 ephemeral, -2 service {80,443}
    int dst_port;  // -1 ephemeral, -2 service {80,443}, else fixed
    double len_mu, len_sigma;    // lognormal per-packet length, clamped [40, 1500]
    double pkts_mu, pkts_sigma;  // lognormal packets per flow, clamped [1, 600]
};

inline const std::vector<BenignProfile>& benign_profiles() {
    static const std::vector<BenignProfile> profiles = {
        // web requests and responses
        {0.25, 6, -1, -2, 5.3, 0.7, 1.6, 1.0},
        {0.20, 6, -2, -1, 6.6, 0.5, 2.3, 1.2},
        // dns queries and responses
        {0.08, 17, -1, 53, 4.4, 0.3, 0.4, 0.6},
        {0.08, 17, 53, -1, 5.0, 0.5, 0.4, 0.6},
        // generic tcp / udp mixes
        {0.22, 6, -1, -1, 5.8, 0.9, 1.9, 1.3},
        {0.13, 17, -1, -1, 5.4, 0.9, 1.2, 1.1},
        // icmp noise
        {0.04, 1, 0, 0, 4.2, 0.2, 0.8, 0.8},
    };
    return profiles;
}

inline FlowRecord make_benign_flow(const SynthesisConfig&, std::mt19937_64& rng) {
    const auto& profiles = benign_profiles();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng), acc = 0.0;
    const BenignProfile* prof = &profiles.back();
    for (const auto& p : profiles) {
        acc += p.weight;
        if (x < acc) { prof = &p; break; }
    }

    std::lognormal_distribution<double> pkts_dist(prof->pkts_mu, prof->pkts_sigma);
    const auto n = static_cast<std::size_t>(std::clamp(pkts_dist(rng), 1.0, 600.0));
    std::lognormal_distribution<double> len_dist(prof->len_mu, prof->len_sigma);
    std::vector<std::uint32_t> lens(n);
    for (auto& l : lens)
        l = static_cast<std::uint32_t>(std::clamp(len_dist(rng), 40.0, 1500.0));
    FlowRecord r = flow_from_packets(lens);

    r.proto = prof->proto;
    auto port_of = [&](int kind) -> std::uint16_t {
        if (kind >= 0) return static_cast<std::uint16_t>(kind);
        if (kind == -2) {
            std::uniform_int_distribution<int> svc(0, 1);
            return svc(rng) ? 443 : 80;
        }
        std::uniform_int_distribution<int> eph(1024, 65535);
        return static_cast<std::uint16_t>(eph(rng));
    };
    r.src_port = port_of(prof->src_port);
    r.dst_port = port_of(prof->dst_port);
    r.src_ip = random_ipv4(rng);
    r.dst_ip = random_ipv4(rng);
    r.label = Label::benign;
    return r;
}

} // namespace detail

// Deterministic for a fixed config: same seed, same bytes.
inline Dataset synthesize(const SynthesisConfig& cfg) {
    if (cfg.victim_subnets < 1) throw ConfigError("synthesize: victim_subnets must be >= 1");
    if (cfg.ts_start >= cfg.ts_end) throw ConfigError("synthesize: timestamp range is empty");
    std::vector<std::string> vectors =
        cfg.attack_vectors.empty() ? default_attack_vectors() : cfg.attack_vectors;
    if (cfg.n_attack > 0 && vectors.empty())
        throw ConfigError("synthesize: no attack vectors configured");
    std::vector<const detail::AttackTemplate*> templates;
    for (const auto& name : vectors) {
        const auto* t = detail::find_template(name);
        if (!t) throw ConfigError("synthesize: unknown attack vector '" + name + "'");
        templates.push_back(t);
    }

    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_int_distribution<std::uint64_t> ts(cfg.ts_start, cfg.ts_end - 1);

    Dataset ds;
    ds.feature_set = feature_set(cfg.feature_mode);
    ds.provenance = "synthetic(seed=" + std::to_string(cfg.rng_seed) + ")";
    ds.flows.reserve(cfg.n_attack + cfg.n_benign);

    std::uniform_int_distribution<std::size_t> pick_template(0, templates.size() - 1);
    for (std::size_t i = 0; i < cfg.n_attack; ++i) {
        FlowRecord r = detail::make_attack_flow(*templates[pick_template(rng)], cfg, rng);
        r.timestamp = ts(rng);
        ds.flows.push_back(validate_flow(r));
    }
    for (std::size_t i = 0; i < cfg.n_benign; ++i) {
        FlowRecord r = detail::make_benign_flow(cfg, rng);
        r.timestamp = ts(rng);
        ds.flows.push_back(validate_flow(r));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// pairwise cosine similarity summaries

struct SimilaritySummary {
    std::size_t n_vectors = 0;
    std::size_t n_pairs = 0;
    double min_sim = 0.0;
    double max_sim = 0.0;
    double mean_sim = 0.0;
    std::size_t above_090 = 0;
    std::size_t above_095 = 0;
    std::size_t above_099 = 0;
    std::vector<std::uint64_t> histogram; // 2001 bins over [-1, 1]

    double fraction_above_095() const {
        return n_pairs ? static_cast<double>(above_095) / static_cast<double>(n_pairs) : 0.0;
    }
    // empirical CDF at x, from the histogram
    double cdf(double x) const {
        if (!n_pairs) return 0.0;
        const auto bin = static_cast<std::size_t>(
            std::clamp((x + 1.0) / 2.0 * 2000.0, 0.0, 2000.0));
        std::uint64_t below = 0;
        for (std::size_t i = 0; i <= bin; ++i) below += histogram[i];
        return static_cast<double>(below) / static_cast<double>(n_pairs);
    }
};

inline double cosine_similarity(const float* a, const float* b, std::size_t d) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// All unordered pairs of the given row-major [n x d] vectors.
inline SimilaritySummary pairwise_similarity_summary(const std::vector<float>& vecs,
                                                     std::size_t d) {
    SimilaritySummary s;
    s.histogram.assign(2001, 0);
    s.n_vectors = d ? vecs.size() / d : 0;
    if (s.n_vectors < 2) throw InsufficientData("pairwise similarity needs >= 2 vectors");
    s.min_sim = 2.0;
    s.max_sim = -2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < s.n_vectors; ++i)
        for (std::size_t j = i + 1; j < s.n_vectors; ++j) {
            const double sim = cosine_similarity(vecs.data() + i * d, vecs.data() + j * d, d);
            ++s.n_pairs;
            total += sim;
            s.min_sim = std::min(s.min_sim, sim);
            s.max_sim = std::max(s.max_sim, sim);
            if (sim > 0.90) ++s.above_090;
            if (sim > 0.95) ++s.above_095;
            if (sim > 0.99) ++s.above_099;
            const auto bin = static_cast<std::size_t>(
                std::clamp((sim + 1.0) / 2.0 * 2000.0, 0.0, 2000.0));
            ++s.histogram[bin];
        }
    s.mean_sim = total / static_cast<double>(s.n_pairs);
    return s;
}

struct AttackSimilarityStats {
    SimilaritySummary attack;
    SimilaritySummary benign;
};

// Pairwise cosine similarity of tokenizer-normalized feature vectors,
// separately for the attack and benign classes. Statistics are computed
// over the whole dataset, matching the tokenizer's batch scope.
inline AttackSimilarityStats attack_similarity_stats(const Dataset& ds, const FeatureSet& fs) {
    if (!ds.fully_labeled())
        throw ValidationError("attack_similarity_stats: dataset must be fully labeled");
    const NormalizationStats st = compute_stats(ds.flows, fs);
    std::vector<float> attack_vecs, benign_vecs;
    for (const auto& f : ds.flows) {
        const auto v = normalize(f, st, fs);
        auto& dst = f.label == Label::attack ? attack_vecs : benign_vecs;
        dst.insert(dst.end(), v.begin(), v.end());
    }
    const std::size_t d = fs.size();
    if (attack_vecs.size() < 2 * d || benign_vecs.size() < 2 * d)
        throw InsufficientData("attack_similarity_stats: need >= 2 flows in each class");
    AttackSimilarityStats out;
    out.attack = pairwise_similarity_summary(attack_vecs, d);
    out.benign = pairwise_similarity_summary(benign_vecs, d);
    return out;
}

} // namespace fsd
