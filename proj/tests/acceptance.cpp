// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line and carries a wall-clock budget; the binary exits non-zero if any
// criterion fails or overruns its budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "sizenet/dataset_io.hpp"
#include "sizenet/eval.hpp"
#include "sizenet/gate.hpp"
#include "sizenet/label_set.hpp"
#include "sizenet/rng.hpp"
#include "sizenet/scoring.hpp"
#include "sizenet/synth.hpp"

#include "test_support.hpp"

using namespace sizenet;
namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string message;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw Failure{message};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. The bundled registries carry the published ranges (11 categories,
//    22 bounds) and round-trip byte-identically through the file format.
// ---------------------------------------------------------------------------
void criterion_range_tables() {
    auto bundled = bundled_label_sets();
    struct Expected {
        const char* label;
        double min_m, max_m;
    };
    const Expected expected1[] = {
        {"police_car", 4.0, 8.0},     {"police_car_model", 0.1, 1.0},
        {"fire_truck", 5.0, 12.0},    {"fire_truck_model", 0.2, 1.0},
        {"bullet_train", 30.0, 90.0}, {"bullet_train_model", 0.3, 2.0},
    };
    const Expected expected2[] = {
        {"pedestrian", 1.0, 3.1}, {"car", 5.0, 8.0},  {"crosswalk", 10.0, 20.0},
        {"pillow", 0.2, 3.0},     {"bed", 1.5, 3.5},
    };
    require(bundled.rsize1.size() == 6, "first registry must have 6 categories");
    require(bundled.rsize2.size() == 5, "second registry must have 5 categories");
    std::size_t checked = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& cat = bundled.rsize1.categories[i];
        require(cat.label == expected1[i].label, "label mismatch: " + cat.label);
        require(cat.range.min_m == expected1[i].min_m && cat.range.max_m == expected1[i].max_m,
                "range mismatch for " + cat.label);
        ++checked;
    }
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& cat = bundled.rsize2.categories[i];
        require(cat.label == expected2[i].label, "label mismatch: " + cat.label);
        require(cat.range.min_m == expected2[i].min_m && cat.range.max_m == expected2[i].max_m,
                "range mismatch for " + cat.label);
        ++checked;
    }
    require(checked == 11, "expected 11 categories in total");

    for (const LabelSet* ls : {&bundled.rsize1, &bundled.rsize2}) {
        std::string text = write_label_set(*ls);
        require(write_label_set(parse_label_set(text)) == text,
                "registry round-trip not byte-identical: " + ls->name);
    }
}

// ---------------------------------------------------------------------------
// 2. Filename grammar: 30 valid/invalid cases, all must behave exactly.
// ---------------------------------------------------------------------------
void criterion_filename_grammar() {
    struct Case {
        const char* name;
        std::variant<double, NameErrorKind> expected;
    };
    const Case cases[] = {
        {"police_car_042_6.5.jpg", 6.5},
        {"bed_2.8.JPG", 2.8},
        {"car_7.png", 7.0},
        {"crosswalk_15.5.jpeg", 15.5},
        {"a_0.1.jpg", 0.1},
        {"bullet_train_model_1.25.jpg", 1.25},
        {"x_1_2_3.jpg", 3.0},
        {"pc__4.5.jpg", 4.5},
        {"pillow_0.4.PNG", 0.4},
        {"pedestrian_2.0.JpEg", 2.0},
        {"car_8.JPEG", 8.0},
        {"train_30.jpg", 30.0},
        {"train_090.jpg", 90.0},
        {"m_0.30.png", 0.3},
        {"tiny_0.0001.jpg", 0.0001},
        {"no_ext_here", NameErrorKind::NoExtension},
        {"almost_4.5.jpg.txt", NameErrorKind::NoExtension},
        {"wrong_4.5.gif", NameErrorKind::NoExtension},
        {"noise_4.5.jpgg", NameErrorKind::NoExtension},
        {"bare_token_.5.tiff", NameErrorKind::NoExtension},
        {"45.jpg", NameErrorKind::NoUnderscore},
        {"police-car-6.5.jpg", NameErrorKind::NoUnderscore},
        {".jpg", NameErrorKind::NoExtension},
        {"car_abc.jpg", NameErrorKind::BadToken},
        {"car_.jpg", NameErrorKind::BadToken},
        {"car_4.5.6.jpg", NameErrorKind::BadToken},
        {"car_4..5.jpg", NameErrorKind::BadToken},
        {"car_-2.jpg", NameErrorKind::BadToken},
        {"car_0.jpg", NameErrorKind::BadToken},
        {"car_3.5e2.jpg", NameErrorKind::BadToken},
    };
    static_assert(sizeof(cases) / sizeof(cases[0]) == 30);

    std::size_t matched = 0;
    for (const Case& c : cases) {
        if (std::holds_alternative<double>(c.expected)) {
            ParsedName parsed = parse_distance_from_name(c.name);
            require(std::abs(parsed.meters - std::get<double>(c.expected)) < 1e-12,
                    std::string("wrong distance for ") + c.name);
        } else {
            bool threw = false;
            try {
                parse_distance_from_name(c.name);
            } catch (const NameFormatError& e) {
                threw = true;
                require(e.kind() == std::get<NameErrorKind>(c.expected),
                        std::string("wrong error kind for ") + c.name);
            }
            require(threw, std::string("expected a parse failure for ") + c.name);
        }
        ++matched;
    }
    require(matched == 30, "all 30 grammar cases must run");
}

// ---------------------------------------------------------------------------
// 3. Gate invariants on 1000 random instances per family: membership,
//    rank-correctness vs a brute-force walk, degenerate-filter equivalence,
//    empty-filter fallback.
// ---------------------------------------------------------------------------
void criterion_gate_invariants() {
    SplitMix64 rng(880001);
    for (int instance = 0; instance < 1000; ++instance) {
        LabelSet ls = testsupport::random_label_set(rng);
        double size = 0.01 + 70.0 * rng.next_unit();
        ScoreVector sv{"img", testsupport::random_probs(rng, ls.size())};
        GatedPrediction p = gate(ls, size, sv);

        auto filtered = filter_indices_by_size(ls, size);
        if (!filtered.empty()) {
            require(!p.fallback_used, "fallback flagged with a non-empty filter");
            bool member = false;
            for (std::size_t idx : filtered) member = member || ls.label(idx) == p.predicted;
            require(member, "prediction escaped the filtered set");

            // brute-force walk: all labels by descending probability
            std::vector<std::size_t> order(ls.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
                if (sv.probs[i] != sv.probs[j]) return sv.probs[i] > sv.probs[j];
                return i < j;
            });
            for (std::size_t pos = 0; pos < order.size(); ++pos) {
                bool in_filter = false;
                for (std::size_t idx : filtered) in_filter = in_filter || idx == order[pos];
                if (in_filter) {
                    require(ls.label(order[pos]) == p.predicted,
                            "brute-force walk disagrees with the gate");
                    require(p.selected_rank == pos + 1, "selected_rank disagrees with the walk");
                    break;
                }
            }
        } else {
            require(p.fallback_used, "empty filter must flag fallback");
            require(p.predicted == p.baseline_top1, "fallback must emit the baseline top-1");
            require(p.filtered_set.empty(), "fallback must report an empty filtered set");
        }

        // degenerate filter: widen every range over the drawn size
        LabelSet wide = ls;
        for (auto& cat : wide.categories) cat.range = {0.001, 1000.0};
        GatedPrediction dp = gate(wide, size, sv);
        require(dp.predicted == dp.baseline_top1 && dp.selected_rank == 1,
                "gate with an all-covering filter must equal the baseline");
    }
}

// ---------------------------------------------------------------------------
// 4. Dominance: when every true label passes its filter, gated accuracy
//    never drops below baseline; at least one instance shows a strict gap.
// ---------------------------------------------------------------------------
void criterion_dominance() {
    SplitMix64 rng(880002);
    int strict = 0;
    for (int instance = 0; instance < 1000; ++instance) {
        LabelSet ls = testsupport::random_label_set(rng);
        const std::size_t k = ls.size();
        Manifest man;
        ScoreTable scores;
        scores.labels = ls.labels();
        std::size_t rows = 5 + rng.next_below(20);
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t c = rng.next_below(k);
            const SizeRange& range = ls.categories[c].range;
            double size = range.min_m + (range.max_m - range.min_m) * rng.next_unit();
            std::string id = "r" + std::to_string(r);
            man.rows.push_back({id, ls.label(c), size});
            scores.rows.push_back({id, testsupport::random_probs(rng, k)});
        }
        auto preds = gate_batch(ls, man, scores);
        std::size_t baseline_ok = 0, gated_ok = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            if (preds[r].baseline_top1 == man.rows[r].true_label) ++baseline_ok;
            if (preds[r].predicted == man.rows[r].true_label) ++gated_ok;
        }
        require(gated_ok >= baseline_ok, "gated accuracy fell below baseline at instance " +
                                             std::to_string(instance));
        if (gated_ok > baseline_ok) ++strict;
    }
    require(strict > 0, "no instance showed a strictly positive gap");
}

struct PipelineResult {
    double baseline_micro;
    double gated_micro;
};

PipelineResult run_pipeline(const SynthConfig& cfg) {
    GeneratedDataset ds = generate(cfg);
    CentroidModel model = train_centroids(ds.train_features, ds.train_manifest, ds.label_set, 1.0);
    ScoreTable scores = score_features(model, ds.test_features);
    auto preds = gate_batch(ds.label_set, ds.test_manifest, scores);
    AccuracyReport baseline =
        accuracies(confusion(ds.test_manifest, preds, ds.label_set, Variant::Baseline), 0,
                   Variant::Baseline);
    AccuracyReport gated =
        accuracies(confusion(ds.test_manifest, preds, ds.label_set, Variant::Gated),
                   count_fallbacks(preds), Variant::Gated);
    return {baseline.micro, gated.micro};
}

// ---------------------------------------------------------------------------
// 5. Object/model pairs at zero feature separation: the feature-only scorer
//    coin-flips within each pair while the gate recovers almost everything.
// ---------------------------------------------------------------------------
void criterion_pairs_phenomenon() {
    SynthConfig cfg = default_pair_config(); // 3 pairs, delta 0, sep 6, sigma 1, 350/100
    PipelineResult r = run_pipeline(cfg);
    require(r.baseline_micro >= 0.40 && r.baseline_micro <= 0.60,
            "baseline must sit in the coin-flip band [0.40, 0.60], got " +
                fmt(r.baseline_micro));
    require(r.gated_micro >= 0.99,
            "gated accuracy must reach 0.99, got " + fmt(r.gated_micro));
}

// ---------------------------------------------------------------------------
// 6. Interference mixtures: contaminated test features drag the baseline
//    down while size gating stays accurate.
// ---------------------------------------------------------------------------
void criterion_interference_phenomenon() {
    SynthConfig cfg = default_interference_config(); // 5 classes, alpha 0.5
    PipelineResult r = run_pipeline(cfg);
    require(r.gated_micro >= 0.95, "gated accuracy must reach 0.95, got " + fmt(r.gated_micro));
    require(r.gated_micro - r.baseline_micro >= 0.15,
            "gated must beat baseline by 0.15, got gap " +
                fmt(r.gated_micro - r.baseline_micro));
}

// ---------------------------------------------------------------------------
// 7. Confusion fixture: synthesized predictions with known cross-counts
//    (31 and 23 of 100) land in exactly the right cells and the emitted
//    matrix file is byte-stable.
// ---------------------------------------------------------------------------
void criterion_confusion_fixture() {
    LabelSet ls = bundled_label_sets().rsize1;
    Manifest man;
    std::vector<GatedPrediction> preds;
    for (const auto& cat : ls.categories) {
        for (int i = 0; i < 100; ++i) {
            char id[64];
            std::snprintf(id, sizeof id, "%s_%03d", cat.label.c_str(), i);
            man.rows.push_back({id, cat.label, 1.0});
            std::string predicted = cat.label;
            if (cat.label == "police_car" && i < 31) predicted = "police_car_model";
            if (cat.label == "police_car_model" && i < 23) predicted = "police_car";
            GatedPrediction p;
            p.image_id = id;
            p.predicted = predicted;
            p.baseline_top1 = predicted;
            p.filtered_set = {predicted};
            preds.push_back(std::move(p));
        }
    }
    ConfusionMatrix cm = confusion(man, preds, ls, Variant::Gated);
    require(cm.at(0, 1) == 31, "police_car -> police_car_model cell must be 31");
    require(cm.at(0, 0) == 69, "police_car diagonal must be 69");
    require(cm.at(1, 0) == 23, "police_car_model -> police_car cell must be 23");
    require(cm.at(1, 1) == 77, "police_car_model diagonal must be 77");
    for (std::size_t i = 0; i < ls.size(); ++i) {
        require(cm.row_sum(i) == 100, "every row must sum to 100");
    }
    AccuracyReport report = accuracies(cm, 0, Variant::Gated);
    require(std::abs(*report.per_class[0] - 0.69) < 1e-14, "police_car accuracy must be 0.69");
    require(std::abs(*report.per_class[1] - 0.77) < 1e-14,
            "police_car_model accuracy must be 0.77");

    std::string first = write_confusion(cm);
    ConfusionMatrix rebuilt = confusion(man, preds, ls, Variant::Gated);
    require(write_confusion(rebuilt) == first, "matrix file must be byte-stable across runs");
    ConfusionMatrix back = read_confusion(first);
    require(back.counts == cm.counts, "matrix file must round-trip");
}

// ---------------------------------------------------------------------------
// 8. Determinism: the all-in-one pipeline executed twice with the same seed
//    produces byte-identical files, end to end.
// ---------------------------------------------------------------------------
void criterion_determinism() {
    testsupport::TempDir dir;
    fs::path a = dir / "a";
    fs::path b = dir / "b";
    for (const fs::path& out : {a, b}) {
        auto r = testsupport::run_cli({"run", "--mode", "pairs", "--out", out.string()});
        require(r.exit_code == 0, "pipeline run failed: " + r.err);
    }
    const char* files[] = {"label_set.json",  "train_manifest.csv", "train_features.csv",
                           "test_manifest.csv", "test_features.csv", "provenance.json",
                           "model.json",       "scores.csv",         "predictions.csv",
                           "confusion_baseline.csv", "confusion_gated.csv", "report.csv",
                           "report.txt"};
    for (const char* name : files) {
        require(testsupport::read_text(a / name) == testsupport::read_text(b / name),
                std::string("reruns differ in ") + name);
    }
}

// ---------------------------------------------------------------------------
// 9. Interop: a hand-written external score file (float32-grade softmax
//    rows) flows through the gate and eval subcommands, and the resulting
//    predictions satisfy the membership and dominance invariants.
// ---------------------------------------------------------------------------
void criterion_external_scores() {
    testsupport::TempDir dir;
    LabelSet ls = bundled_label_sets().rsize1;
    testsupport::write_text(dir / "labels.json", write_label_set(ls));

    // sizes all inside the true label's range, so dominance applies
    testsupport::write_text(dir / "test_manifest.csv",
                            "image_id,true_label,size_m\n"
                            "img01,police_car,5.0\n"
                            "img02,police_car,6.5\n"
                            "img03,police_car_model,0.5\n"
                            "img04,fire_truck,10.0\n"
                            "img05,fire_truck_model,0.9\n"
                            "img06,bullet_train,45.0\n"
                            "img07,bullet_train_model,1.5\n"
                            "img08,police_car,7.5\n");

    // as a foreign CNN would emit them: four-decimal rows, sums off by
    // float-grade error, confidently wrong on the object/model pairs
    testsupport::write_text(
        dir / "external_scores.csv",
        "image_id,police_car,police_car_model,fire_truck,fire_truck_model,bullet_train,"
        "bullet_train_model\n"
        "img01,0.2001,0.6499,0.1,0.03,0.01,0.01\n"
        "img02,0.3,0.55,0.1,0.03,0.01,0.0101\n"
        "img03,0.55,0.35,0.05,0.03,0.01,0.01\n"
        "img04,0.05,0.05,0.35,0.45,0.05,0.05\n"
        "img05,0.02,0.02,0.5,0.44,0.01,0.0099\n"
        "img06,0.01,0.01,0.02,0.02,0.44,0.5\n"
        "img07,0.01,0.01,0.02,0.02,0.55,0.3901\n"
        "img08,0.85,0.05,0.05,0.03,0.01,0.01\n");

    auto gate_run = testsupport::run_cli(
        {"gate", "--label-set", (dir / "labels.json").string(), "--manifest",
         (dir / "test_manifest.csv").string(), "--scores", (dir / "external_scores.csv").string(),
         "--out", (dir / "predictions.csv").string()});
    require(gate_run.exit_code == 0, "gate failed on the external score file: " + gate_run.err);

    auto eval_run = testsupport::run_cli(
        {"eval", "--label-set", (dir / "labels.json").string(), "--manifest",
         (dir / "test_manifest.csv").string(), "--predictions",
         (dir / "predictions.csv").string(), "--out", (dir / "eval").string(), "--format",
         "csv"});
    require(eval_run.exit_code == 0, "eval failed on gated predictions: " + eval_run.err);

    // invariants on the emitted predictions
    auto preds = read_predictions(testsupport::read_text(dir / "predictions.csv"));
    Manifest man = read_manifest(testsupport::read_text(dir / "test_manifest.csv"));
    require(preds.size() == man.rows.size(), "one prediction per manifest row");
    std::size_t baseline_ok = 0, gated_ok = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i];
        require(!p.fallback_used, "no fallback expected: every size matches a category");
        auto admissible = filter_by_size(ls, *man.rows[i].size_m);
        bool member = false;
        for (const auto& label : admissible) member = member || label == p.predicted;
        require(member, "prediction escaped the filtered set for " + p.image_id);
        if (p.baseline_top1 == man.rows[i].true_label) ++baseline_ok;
        if (p.predicted == man.rows[i].true_label) ++gated_ok;
    }
    require(gated_ok >= baseline_ok, "dominance must hold on the external scores");
    require(gated_ok > baseline_ok, "this fixture is built to show a strict correction");
    require(gated_ok == preds.size(), "every row of this fixture is recoverable by size");
}

struct Criterion {
    int number;
    const char* name;
    double limit_seconds; // 0 = no budget
    std::function<void()> body;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "size-range tables and registry round-trip", 1.0, criterion_range_tables},
        {2, "filename grammar (30 cases)", 1.0, criterion_filename_grammar},
        {3, "gate invariants (1000 random instances)", 30.0, criterion_gate_invariants},
        {4, "dominance over random instances", 30.0, criterion_dominance},
        {5, "object/model pairs phenomenon", 60.0, criterion_pairs_phenomenon},
        {6, "interference phenomenon", 60.0, criterion_interference_phenomenon},
        {7, "cross-confusion fixture (31/23 of 100)", 1.0, criterion_confusion_fixture},
        {8, "byte-identical reruns", 0.0, criterion_determinism},
        {9, "external score file interop", 0.0, criterion_external_scores},
    };

    int passed = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        std::string failure;
        try {
            c.body();
        } catch (const Failure& f) {
            failure = f.message;
        } catch (const std::exception& e) {
            failure = std::string("unexpected error: ") + e.what();
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                             .count();
        if (failure.empty() && c.limit_seconds > 0.0 && seconds > c.limit_seconds) {
            failure = "exceeded " + fmt(c.limit_seconds) + "s budget";
        }
        if (failure.empty()) {
            std::printf("[%d] PASS  %-46s %7.3fs\n", c.number, c.name, seconds);
            ++passed;
        } else {
            std::printf("[%d] FAIL  %-46s %7.3fs  %s\n", c.number, c.name, seconds,
                        failure.c_str());
        }
    }
    std::printf("%d/%zu criteria passed\n", passed, criteria.size());
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
