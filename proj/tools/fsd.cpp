// Command-line front end for the flow-sequence DDoS detector.
//
// Subcommands: synth, train, detect, eval, report. Every subcommand is
// deterministic under --seed. Configuration precedence is command-line
// flags over a `key = value` config file (--config) over built-in
// defaults. Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsd/fsd.hpp"

namespace {

struct ModelFlags {
    std::size_t bins = 64;
    std::size_t layers = 4;
    std::size_t dmodel = 64;
    std::size_t heads = 4;
    std::string mask = "bidirectional";
    std::string feature_mode = "full9";
    std::string norm_scope = "batch";
    bool frozen = true;
    bool rope = true;
    std::size_t epochs = 20;
    double lr = 1e-3;
    std::size_t sequences = 15000;
    std::size_t batch_sequences = 32;
    std::uint64_t seed = 42;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
    cmd->add_option("--seed", f.seed, "RNG seed; fixes the whole run");
    cmd->add_option("--bins", f.bins, "bins per flow matrix (= sequence length)");
    cmd->add_option("--layers", f.layers, "encoder layers");
    cmd->add_option("--dmodel", f.dmodel, "embedding width");
    cmd->add_option("--heads", f.heads, "attention heads");
    cmd->add_option("--mask", f.mask, "attention mask: causal|bidirectional");
    cmd->add_option("--feature-mode", f.feature_mode, "flow features: full9|netflow6");
    cmd->add_option("--norm-scope", f.norm_scope, "normalization statistics: batch|fitted");
    cmd->add_option("--frozen", f.frozen, "freeze the encoder (true|false)");
    cmd->add_option("--rope", f.rope, "rotary position phases (true|false)");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--sequences", f.sequences, "training sequences per run");
    cmd->add_option("--batch", f.batch_sequences, "sequences per optimizer step");
}

fsd::TrainConfig train_config_from(const ModelFlags& f) {
    fsd::TrainConfig tc;
    tc.model.feature_mode = fsd::feature_mode_from_string(f.feature_mode);
    tc.model.norm_scope = fsd::norm_scope_from_string(f.norm_scope);
    tc.model.n_bins = f.bins;
    tc.model.backbone.d_model = f.dmodel;
    tc.model.backbone.n_layers = f.layers;
    tc.model.backbone.n_heads = f.heads;
    tc.model.backbone.max_seq = f.bins;
    tc.model.backbone.mask_mode = fsd::mask_mode_from_string(f.mask);
    tc.model.backbone.rope_enabled = f.rope;
    tc.model.backbone.frozen = f.frozen;
    tc.epochs = f.epochs;
    tc.optimizer.learning_rate = static_cast<float>(f.lr);
    tc.train_sequence_count = f.sequences;
    tc.batch_sequences = f.batch_sequences;
    tc.rng_seed = f.seed;
    return tc;
}

int run(int argc, char** argv) {
    CLI::App app{"flow-sequence DDoS detection pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "",
                   "key = value config file; keys are <subcommand>.<flag>, e.g. synth.attack");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic flow CSV");
    std::size_t n_attack = 2000, n_benign = 20000, subnets = 10;
    std::uint64_t synth_seed = 1;
    std::vector<std::string> vectors;
    std::string synth_mode = "full9", synth_out = "flows.csv";
    std::uint64_t ts_start = 1700000000000ull, ts_end = 1700000060000ull;
    synth->add_option("--attack", n_attack, "attack flow count");
    synth->add_option("--benign", n_benign, "benign flow count");
    synth->add_option("--vectors", vectors,
                      "attack templates (default: all six)")->delimiter(',');
    synth->add_option("--subnets", subnets, "victim class C subnet count");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--feature-mode", synth_mode, "full9|netflow6");
    synth->add_option("--ts-start", ts_start, "window start, ms since epoch");
    synth->add_option("--ts-end", ts_end, "window end, ms since epoch");
    synth->add_option("--out", synth_out, "output CSV path")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train a detector on a labeled flow CSV");
    ModelFlags tf;
    std::string train_in, train_out = "model.ckpt";
    train_cmd->add_option("--in", train_in, "labeled flow CSV")->required();
    train_cmd->add_option("--out", train_out, "checkpoint path");
    add_model_flags(train_cmd, tf);

    // detect
    auto* detect = app.add_subcommand("detect", "classify a flow batch with a saved model");
    std::string det_model, det_in, det_alerts = "alerts";
    std::size_t top_n = 10;
    detect->add_option("--model", det_model, "checkpoint path")->required();
    detect->add_option("--in", det_in, "flow CSV to classify")->required();
    detect->add_option("--alerts", det_alerts, "alert file prefix (writes .txt and .csv)");
    detect->add_option("--top", top_n, "top attack source IPs to report");

    // eval
    auto* eval = app.add_subcommand("eval", "run an experiment scenario end to end");
    ModelFlags ef;
    ef.epochs = 6;        // desk-scale evaluation defaults; raise via flags
    ef.sequences = 6000;
    std::string scenario = "imbalanced", eval_out = "eval";
    std::vector<std::uint64_t> seeds;
    std::size_t eval_attack = 0, eval_benign = 0;
    std::vector<std::size_t> sweep_layers = {1, 2, 4, 8};
    eval->add_option("--scenario", scenario,
                     "balanced|imbalanced|zeroshot|ablation|sweep|netflow6");
    eval->add_option("--seeds", seeds, "seeds, one full run each")->delimiter(',');
    eval->add_option("--attack", eval_attack, "attack flows (0 = scenario default)");
    eval->add_option("--benign", eval_benign, "benign flows (0 = scenario default)");
    eval->add_option("--sweep-layers", sweep_layers, "layer counts for sweep")->delimiter(',');
    eval->add_option("--out", eval_out, "output prefix (writes .csv and .svg)");
    add_model_flags(eval, ef);

    // report
    auto* report = app.add_subcommand("report", "render charts from a metrics CSV");
    std::string rep_in, rep_out = "report.svg", rep_format = "svg";
    report->add_option("--in", rep_in, "metrics CSV produced by eval")->required();
    report->add_option("--out", rep_out, "output path");
    report->add_option("--format", rep_format, "svg|csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage errors exit 1; --help exits 0
    }

    if (*synth) {
        fsd::SynthesisConfig sc;
        sc.n_attack = n_attack;
        sc.n_benign = n_benign;
        sc.attack_vectors = vectors;
        sc.victim_subnets = subnets;
        sc.rng_seed = synth_seed;
        sc.ts_start = ts_start;
        sc.ts_end = ts_end;
        sc.feature_mode = fsd::feature_mode_from_string(synth_mode);
        fsd::Dataset ds = fsd::synthesize(sc);
        fsd::write_csv(ds, synth_out);
        std::printf("wrote %zu flows (%zu attack, %zu benign) to %s\n", ds.flows.size(),
                    ds.count_label(fsd::Label::attack), ds.count_label(fsd::Label::benign),
                    synth_out.c_str());
        return 0;
    }

    if (*train_cmd) {
        fsd::TrainConfig tc = train_config_from(tf);
        fsd::Dataset ds = fsd::parse_csv(train_in, fsd::feature_set(tc.model.feature_mode));
        auto parts = fsd::split(ds);
        std::printf("training on %zu flows, validating on %zu, holding out %zu\n",
                    parts[0].flows.size(), parts[1].flows.size(), parts[2].flows.size());
        fsd::TrainResult res = fsd::train_detailed(parts[0], parts[1], tc);
        fsd::save_checkpoint(res.checkpoint, train_out);
        std::printf("best val F1 %.4f at epoch %llu; checkpoint: %s\n",
                    res.checkpoint.meta.val_f1,
                    static_cast<unsigned long long>(res.checkpoint.meta.epoch),
                    train_out.c_str());
        auto verdicts = fsd::infer(parts[2], res.checkpoint);
        auto m = fsd::metrics_from_verdicts(verdicts, parts[2].flows);
        std::printf("held-out test: accuracy %.4f precision %.4f recall %.4f f1 %.4f\n",
                    m.accuracy, m.precision, m.recall, m.f1);
        return 0;
    }

    if (*detect) {
        fsd::ModelCheckpoint ckpt = fsd::load_checkpoint(det_model);
        fsd::Dataset ds =
            fsd::parse_csv(det_in, fsd::feature_set(ckpt.config.feature_mode));
        auto verdicts = fsd::infer(ds, ckpt);
        fsd::AlertSummary alert = fsd::build_alert_summary(ds.flows, verdicts, top_n);
        fsd::write_alert_files(alert, ds.flows, det_alerts);
        std::fputs(fsd::alert_to_text(alert, ds.flows).c_str(), stdout);
        std::printf("\nwrote %s.txt and %s.csv\n", det_alerts.c_str(), det_alerts.c_str());
        return 0;
    }

    if (*eval) {
        fsd::ScenarioConfig sc;
        sc.kind = fsd::scenario_from_string(scenario);
        if (!seeds.empty()) sc.seeds = seeds;
        else sc.seeds = {ef.seed};
        sc.sizes = {eval_attack, eval_benign};
        sc.train = train_config_from(ef);
        sc.sweep_layers = sweep_layers;
        auto reports = fsd::run_scenario(sc);
        fsd::emit_report(reports, eval_out + ".csv", fsd::ReportFormat::csv);
        fsd::emit_report(reports, eval_out + ".svg", fsd::ReportFormat::svg_bar_chart);
        for (const auto& r : reports)
            std::printf("%s %s: accuracy %.4f precision %.4f recall %.4f f1 %.4f (%.4f ms/flow)\n",
                        r.scenario.c_str(), r.method.c_str(), r.accuracy, r.precision, r.recall,
                        r.f1, r.runtime_ms);
        std::printf("wrote %s.csv and %s.svg\n", eval_out.c_str(), eval_out.c_str());
        return 0;
    }

    if (*report) {
        auto reports = fsd::parse_report_csv(rep_in);
        if (rep_format == "svg") fsd::emit_report(reports, rep_out, fsd::ReportFormat::svg_bar_chart);
        else if (rep_format == "csv") fsd::emit_report(reports, rep_out, fsd::ReportFormat::csv);
        else throw fsd::ConfigError("unknown report format: " + rep_format);
        std::printf("wrote %s\n", rep_out.c_str());
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const fsd::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 2;
    }
}
