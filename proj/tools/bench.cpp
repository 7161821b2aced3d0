// Compares the OpenMP scoring/gating/evaluation kernels against their serial
// reference implementations on a large generated batch, checking that both
// produce identical results before reporting timings.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sizenet/eval.hpp"
#include "sizenet/gate.hpp"
#include "sizenet/scoring.hpp"
#include "sizenet/synth.hpp"

using namespace sizenet;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& fn, int repeats) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        auto t0 = clock_type::now();
        fn();
        auto t1 = clock_type::now();
        double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

void report(const char* kernel, double serial_ms, double parallel_ms) {
    std::printf("%-16s %10.2f ms %10.2f ms %8.2fx\n", kernel, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

} // namespace

int main(int argc, char** argv) {
    std::size_t rows = 200000;
    int repeats = 3;
    if (argc > 1) rows = static_cast<std::size_t>(std::strtoull(argv[1], nullptr, 10));
    if (argc > 2) repeats = std::atoi(argv[2]);

    SynthConfig cfg = default_interference_config();
    cfg.n_train = 200;
    cfg.n_test = rows / cfg.classes.size();
    cfg.dim = 32;
    GeneratedDataset ds = generate(cfg);
    CentroidModel model = train_centroids(ds.train_features, ds.train_manifest, ds.label_set, 1.0);

#ifdef _OPENMP
    std::printf("rows=%zu dim=%zu classes=%zu threads=%d\n", ds.test_features.image_ids.size(),
                cfg.dim, ds.label_set.size(), omp_get_max_threads());
#else
    std::printf("rows=%zu dim=%zu classes=%zu (built without OpenMP)\n",
                ds.test_features.image_ids.size(), cfg.dim, ds.label_set.size());
#endif
    std::printf("%-16s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    ScoreTable scores_serial, scores_parallel;
    double s_ms = time_ms([&] { scores_serial = score_features_serial(model, ds.test_features); },
                          repeats);
    double p_ms = time_ms([&] { scores_parallel = score_features(model, ds.test_features); },
                          repeats);
    for (std::size_t i = 0; i < scores_serial.rows.size(); ++i) {
        if (scores_serial.rows[i].probs != scores_parallel.rows[i].probs) {
            std::fprintf(stderr, "score mismatch at row %zu\n", i);
            return 1;
        }
    }
    report("score", s_ms, p_ms);

    std::vector<GatedPrediction> preds_serial, preds_parallel;
    s_ms = time_ms(
        [&] { preds_serial = gate_batch_serial(ds.label_set, ds.test_manifest, scores_serial); },
        repeats);
    p_ms = time_ms(
        [&] { preds_parallel = gate_batch(ds.label_set, ds.test_manifest, scores_parallel); },
        repeats);
    for (std::size_t i = 0; i < preds_serial.size(); ++i) {
        if (preds_serial[i].predicted != preds_parallel[i].predicted ||
            preds_serial[i].filtered_set != preds_parallel[i].filtered_set) {
            std::fprintf(stderr, "gate mismatch at row %zu\n", i);
            return 1;
        }
    }
    report("gate", s_ms, p_ms);

    ConfusionMatrix cm_serial, cm_parallel;
    s_ms = time_ms(
        [&] {
            cm_serial = confusion_serial(ds.test_manifest, preds_serial, ds.label_set,
                                         Variant::Gated);
        },
        repeats);
    p_ms = time_ms(
        [&] {
            cm_parallel = confusion(ds.test_manifest, preds_parallel, ds.label_set,
                                    Variant::Gated);
        },
        repeats);
    if (cm_serial.counts != cm_parallel.counts) {
        std::fprintf(stderr, "confusion mismatch\n");
        return 1;
    }
    report("confusion", s_ms, p_ms);

    std::puts("serial and parallel kernels agree");
    return 0;
}
