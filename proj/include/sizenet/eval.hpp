#ifndef SIZENET_EVAL_HPP
#define SIZENET_EVAL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sizenet/dataset_io.hpp"
#include "sizenet/gate.hpp"
#include "sizenet/label_set.hpp"

namespace sizenet {

enum class Variant { Baseline, Gated };
std::string_view variant_name(Variant v);

/// Rows are true labels, columns predicted labels, both in LabelSet order.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::uint64_t> counts; // row-major, labels.size()^2

    std::uint64_t& at(std::size_t true_idx, std::size_t pred_idx) {
        return counts[true_idx * labels.size() + pred_idx];
    }
    std::uint64_t at(std::size_t true_idx, std::size_t pred_idx) const {
        return counts[true_idx * labels.size() + pred_idx];
    }
    std::uint64_t row_sum(std::size_t true_idx) const;
    std::uint64_t total() const;
    std::uint64_t trace() const;
};

/// Counts (true, predicted) pairs for one prediction variant. Predictions
/// must cover the manifest exactly (same ids, no extras). The parallel
/// version merges per-thread partial counts; the serial one is the
/// reference.
ConfusionMatrix confusion(const Manifest& manifest, const std::vector<GatedPrediction>& preds,
                          const LabelSet& ls, Variant variant);
ConfusionMatrix confusion_serial(const Manifest& manifest,
                                 const std::vector<GatedPrediction>& preds, const LabelSet& ls,
                                 Variant variant);

struct AccuracyReport {
    Variant variant = Variant::Baseline;
    std::vector<std::string> labels;
    std::vector<std::optional<double>> per_class; // nullopt for zero-sample classes
    double macro = 0.0; // mean over classes with >= 1 sample
    double micro = 0.0; // trace / total
    double fallback_rate = 0.0;
};

/// fallback_count is carried separately because the matrix cannot encode it
/// (a fallback row still lands in some (true, predicted) cell).
AccuracyReport accuracies(const ConfusionMatrix& cm, std::size_t fallback_count, Variant variant);

std::size_t count_fallbacks(const std::vector<GatedPrediction>& preds);

/// Side-by-side baseline/gated accuracy rows plus a per-column delta row.
/// dominance_violated flags a gated micro below baseline (possible only
/// when some true label failed its own size filter).
struct ComparisonReport {
    std::vector<std::string> labels;
    AccuracyReport baseline;
    AccuracyReport gated;
    bool dominance_violated = false;
};

ComparisonReport compare_report(const AccuracyReport& baseline, const AccuracyReport& gated);

// Renderings. The CSV is the machine table; the text table is the aligned
// human one. Both are deterministic byte-for-byte.
std::string write_confusion(const ConfusionMatrix& cm);
ConfusionMatrix read_confusion(std::string_view text);
std::string render_comparison_csv(const ComparisonReport& r);
std::string render_comparison_table(const ComparisonReport& r);

} // namespace sizenet

#endif
