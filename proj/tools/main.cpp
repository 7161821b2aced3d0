// sizenet command-line pipeline.
//
// Subcommands map one-to-one onto pipeline stages so any stage can be
// replaced by externally produced files (most usefully: score files from a
// real CNN run elsewhere). All outputs are written atomically; reruns with
// --force are byte-identical given identical inputs.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sizenet/dataset_io.hpp"
#include "sizenet/error.hpp"
#include "sizenet/eval.hpp"
#include "sizenet/files.hpp"
#include "sizenet/gate.hpp"
#include "sizenet/label_set.hpp"
#include "sizenet/scoring.hpp"
#include "sizenet/synth.hpp"
#include "sizenet/text.hpp"

namespace fs = std::filesystem;
using namespace sizenet;

namespace {

struct GenOptions {
    std::string config_path;
    std::string mode = "pairs";
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

struct TrainOptions {
    std::string label_set_path;
    std::string manifest_path;
    std::string features_path;
    std::string out_path;
    double tau = 1.0;
    bool force = false;
};

struct ScoreOptions {
    std::string model_path;
    std::string features_path;
    std::string out_path;
    bool force = false;
};

struct GateOptions {
    std::string label_set_path;
    std::string manifest_path;
    std::string scores_path;   // score source: stored CSV ...
    std::string model_path;    // ... or centroid model + features
    std::string features_path;
    std::string out_path;
    bool force = false;
};

struct EvalOptions {
    std::string label_set_path;
    std::string manifest_path;
    std::string predictions_path;
    std::string out_dir;
    std::string format = "table";
    bool force = false;
};

struct RunOptions {
    std::string config_path;
    std::string mode = "pairs";
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    double tau = 1.0;
    std::string format = "table";
    bool force = false;
};

SynthConfig load_synth_config(const std::string& config_path, const std::string& mode,
                              std::optional<std::uint64_t> seed) {
    SynthConfig cfg;
    if (!config_path.empty()) {
        cfg = parse_synth_config(read_file(config_path));
    } else if (mode == "pairs") {
        cfg = default_pair_config();
    } else if (mode == "interference") {
        cfg = default_interference_config();
    } else {
        throw ValidationError("mode must be 'pairs' or 'interference', got '" + mode + "'");
    }
    if (seed) {
        cfg.seed = *seed;
        validate_synth_config(cfg);
    }
    return cfg;
}

int cmd_gen_synth(const GenOptions& opt) {
    SynthConfig cfg = load_synth_config(opt.config_path, opt.mode, opt.seed);
    require_writable_dir(opt.out_dir, opt.force);
    GeneratedDataset ds = generate(cfg);
    write_dataset(ds, cfg, opt.out_dir);
    std::cout << "wrote dataset (" << ds.label_set.size() << " classes, "
              << ds.train_manifest.rows.size() << " train rows, "
              << ds.test_manifest.rows.size() << " test rows) to " << opt.out_dir << "\n";
    return 0;
}

int cmd_train(const TrainOptions& opt) {
    LabelSet ls = parse_label_set(read_file(opt.label_set_path));
    Manifest manifest = read_manifest(read_file(opt.manifest_path));
    FeatureTable features = read_features(read_file(opt.features_path));
    require_writable_file(opt.out_path, opt.force);
    CentroidModel model = train_centroids(features, manifest, ls, opt.tau);
    atomic_write_file(opt.out_path, write_centroid_model(model));
    std::cout << "trained " << model.labels.size() << "-class centroid model (dim "
              << model.dim() << ") -> " << opt.out_path << "\n";
    return 0;
}

int cmd_score(const ScoreOptions& opt) {
    CentroidModel model = read_centroid_model(read_file(opt.model_path));
    FeatureTable features = read_features(read_file(opt.features_path));
    require_writable_file(opt.out_path, opt.force);
    ScoreTable scores = score_features(model, features);
    atomic_write_file(opt.out_path, write_scores(scores));
    std::cout << "scored " << scores.rows.size() << " rows -> " << opt.out_path << "\n";
    return 0;
}

ScoreTable gate_score_table(const GateOptions& opt, const LabelSet& ls) {
    const bool have_scores = !opt.scores_path.empty();
    const bool have_model = !opt.model_path.empty();
    if (have_scores == have_model) {
        throw ValidationError("pass exactly one of --scores or --model (with --features)");
    }
    if (have_scores) return read_scores(read_file(opt.scores_path), ls);
    if (opt.features_path.empty()) {
        throw ValidationError("--model requires --features");
    }
    CentroidModel model = read_centroid_model(read_file(opt.model_path));
    if (model.labels != ls.labels()) {
        throw ValidationError("centroid model labels do not match label set '" + ls.name + "'");
    }
    return score_features(model, read_features(read_file(opt.features_path)));
}

int cmd_gate(const GateOptions& opt) {
    LabelSet ls = parse_label_set(read_file(opt.label_set_path));
    Manifest manifest = read_manifest(read_file(opt.manifest_path));
    ScoreTable scores = gate_score_table(opt, ls);
    require_writable_file(opt.out_path, opt.force);
    auto preds = gate_batch(ls, manifest, scores);
    atomic_write_file(opt.out_path, write_predictions(preds));
    std::cout << "gated " << preds.size() << " rows (" << count_fallbacks(preds)
              << " fallbacks) -> " << opt.out_path << "\n";
    return 0;
}

struct EvalOutputs {
    ConfusionMatrix baseline_cm;
    ConfusionMatrix gated_cm;
    ComparisonReport comparison;
};

EvalOutputs evaluate(const LabelSet& ls, const Manifest& manifest,
                     const std::vector<GatedPrediction>& preds) {
    if (manifest.rows.empty()) throw ValidationError("empty manifest");
    EvalOutputs out;
    out.baseline_cm = confusion(manifest, preds, ls, Variant::Baseline);
    out.gated_cm = confusion(manifest, preds, ls, Variant::Gated);
    std::size_t fallbacks = count_fallbacks(preds);
    AccuracyReport baseline = accuracies(out.baseline_cm, 0, Variant::Baseline);
    AccuracyReport gated = accuracies(out.gated_cm, fallbacks, Variant::Gated);
    out.comparison = compare_report(baseline, gated);
    return out;
}

void write_eval_outputs(const EvalOutputs& ev, const fs::path& out_dir) {
    atomic_write_file(out_dir / "confusion_baseline.csv", write_confusion(ev.baseline_cm));
    atomic_write_file(out_dir / "confusion_gated.csv", write_confusion(ev.gated_cm));
    atomic_write_file(out_dir / "report.csv", render_comparison_csv(ev.comparison));
    atomic_write_file(out_dir / "report.txt", render_comparison_table(ev.comparison));
}

void print_comparison(const ComparisonReport& cmp, const std::string& format) {
    if (format == "csv") {
        std::cout << render_comparison_csv(cmp);
    } else {
        std::cout << render_comparison_table(cmp);
    }
}

int cmd_eval(const EvalOptions& opt) {
    if (opt.format != "csv" && opt.format != "table") {
        throw ValidationError("--format must be csv or table");
    }
    LabelSet ls = parse_label_set(read_file(opt.label_set_path));
    Manifest manifest = read_manifest(read_file(opt.manifest_path));
    auto preds = read_predictions(read_file(opt.predictions_path));
    EvalOutputs ev = evaluate(ls, manifest, preds);
    if (!opt.out_dir.empty()) {
        require_writable_dir(opt.out_dir, opt.force);
        write_eval_outputs(ev, opt.out_dir);
    }
    print_comparison(ev.comparison, opt.format);
    return 0;
}

int cmd_run(const RunOptions& opt) {
    if (opt.format != "csv" && opt.format != "table") {
        throw ValidationError("--format must be csv or table");
    }
    SynthConfig cfg = load_synth_config(opt.config_path, opt.mode, opt.seed);
    require_writable_dir(opt.out_dir, opt.force);
    const fs::path out_dir = opt.out_dir;

    GeneratedDataset ds = generate(cfg);
    CentroidModel model = train_centroids(ds.train_features, ds.train_manifest, ds.label_set,
                                          opt.tau);
    ScoreTable scores = score_features(model, ds.test_features);
    auto preds = gate_batch(ds.label_set, ds.test_manifest, scores);
    EvalOutputs ev = evaluate(ds.label_set, ds.test_manifest, preds);

    // Everything is computed before the first byte is written.
    write_dataset(ds, cfg, out_dir);
    atomic_write_file(out_dir / "model.json", write_centroid_model(model));
    atomic_write_file(out_dir / "scores.csv", write_scores(scores));
    atomic_write_file(out_dir / "predictions.csv", write_predictions(preds));
    write_eval_outputs(ev, out_dir);

    print_comparison(ev.comparison, opt.format);
    return 0;
}

int cmd_parse_name(const std::string& filename) {
    ParsedName parsed = parse_distance_from_name(filename);
    std::cout << parsed.token << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"size-gated object recognition pipeline"};
    app.require_subcommand(1);

    GenOptions gen_opt;
    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic benchmark dataset");
    gen->add_option("--config", gen_opt.config_path, "synth config JSON");
    gen->add_option("--mode", gen_opt.mode, "bundled config when no --config: pairs|interference");
    gen->add_option("--seed", gen_opt.seed, "override the config seed");
    gen->add_option("--out", gen_opt.out_dir, "output directory")->required();
    gen->add_flag("--force", gen_opt.force, "overwrite non-empty output directory");

    TrainOptions train_opt;
    auto* train = app.add_subcommand("train", "train the centroid scorer");
    train->add_option("--label-set", train_opt.label_set_path)->required();
    train->add_option("--manifest", train_opt.manifest_path, "training manifest")->required();
    train->add_option("--features", train_opt.features_path, "training features")->required();
    train->add_option("--tau", train_opt.tau, "softmax temperature");
    train->add_option("--out", train_opt.out_path, "model JSON path")->required();
    train->add_flag("--force", train_opt.force);

    ScoreOptions score_opt;
    auto* score = app.add_subcommand("score", "score features with a centroid model");
    score->add_option("--model", score_opt.model_path)->required();
    score->add_option("--features", score_opt.features_path)->required();
    score->add_option("--out", score_opt.out_path, "score CSV path")->required();
    score->add_flag("--force", score_opt.force);

    GateOptions gate_opt;
    auto* gate = app.add_subcommand("gate", "size-gate scored predictions");
    gate->add_option("--label-set", gate_opt.label_set_path)->required();
    gate->add_option("--manifest", gate_opt.manifest_path, "test manifest with sizes")->required();
    gate->add_option("--scores", gate_opt.scores_path, "stored score CSV");
    gate->add_option("--model", gate_opt.model_path, "centroid model (needs --features)");
    gate->add_option("--features", gate_opt.features_path);
    gate->add_option("--out", gate_opt.out_path, "predictions CSV path")->required();
    gate->add_flag("--force", gate_opt.force);

    EvalOptions eval_opt;
    auto* eval = app.add_subcommand("eval", "confusion matrices and accuracy comparison");
    eval->add_option("--label-set", eval_opt.label_set_path)->required();
    eval->add_option("--manifest", eval_opt.manifest_path)->required();
    eval->add_option("--predictions", eval_opt.predictions_path)->required();
    eval->add_option("--out", eval_opt.out_dir, "directory for matrices and reports");
    eval->add_option("--format", eval_opt.format, "stdout format: csv|table");
    eval->add_flag("--force", eval_opt.force);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "gen + train + score + gate + eval in one go");
    run->add_option("--config", run_opt.config_path, "synth config JSON");
    run->add_option("--mode", run_opt.mode, "bundled config when no --config: pairs|interference");
    run->add_option("--seed", run_opt.seed, "override the config seed");
    run->add_option("--tau", run_opt.tau, "softmax temperature");
    run->add_option("--out", run_opt.out_dir, "output directory")->required();
    run->add_option("--format", run_opt.format, "stdout format: csv|table");
    run->add_flag("--force", run_opt.force);

    std::string parse_name_arg;
    auto* pn = app.add_subcommand("parse-name", "print the shooting distance encoded in a filename");
    pn->add_option("filename", parse_name_arg)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_synth(gen_opt);
        if (train->parsed()) return cmd_train(train_opt);
        if (score->parsed()) return cmd_score(score_opt);
        if (gate->parsed()) return cmd_gate(gate_opt);
        if (eval->parsed()) return cmd_eval(eval_opt);
        if (run->parsed()) return cmd_run(run_opt);
        if (pn->parsed()) return cmd_parse_name(parse_name_arg);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
