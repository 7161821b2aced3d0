#ifndef SIZENET_GATE_HPP
#define SIZENET_GATE_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sizenet/dataset_io.hpp"
#include "sizenet/label_set.hpp"
#include "sizenet/scoring.hpp"

namespace sizenet {

/// One gated recognition result with its audit trail.
///
/// Invariants: when fallback_used is false, predicted is a member of
/// filtered_set and selected_rank is its 1-based rank by descending
/// probability (ties by LabelSet order). When fallback_used is true the
/// filtered set was empty and predicted equals baseline_top1.
struct GatedPrediction {
    std::string image_id;
    std::string predicted;
    std::string baseline_top1;
    std::vector<std::string> filtered_set; // LabelSet order
    bool fallback_used = false;
    std::size_t selected_rank = 1;
};

/// Re-ranks one score vector: keep only the labels whose size range covers
/// size_m, then take the highest-probability survivor. Ties resolve by
/// LabelSet order, applied identically to the baseline argmax so gating can
/// never un-correct a correct baseline prediction when the true label
/// survives the filter. An empty filtered set falls back to the baseline
/// top-1 with fallback_used set.
GatedPrediction gate(const LabelSet& ls, double size_m, const ScoreVector& scores);

/// Baseline argmax with the same tie-break (lowest LabelSet index wins).
std::size_t argmax_index(std::span<const double> probs);

/// One prediction per manifest row, in manifest order. Every row needs a
/// score entry and a size annotation; missing either is an error naming
/// the image_id. The parallel version is the default, the serial one the
/// reference implementation the tests compare against.
std::vector<GatedPrediction> gate_batch(const LabelSet& ls, const Manifest& manifest,
                                        const ScoreTable& scores);
std::vector<GatedPrediction> gate_batch_serial(const LabelSet& ls, const Manifest& manifest,
                                               const ScoreTable& scores);

// Predictions CSV:
//   image_id,predicted,baseline_top1,fallback_used,selected_rank,filtered_set
// with filtered_set as '|'-joined labels (empty when the filter matched
// nothing).
std::vector<GatedPrediction> read_predictions(std::string_view text);
std::string write_predictions(const std::vector<GatedPrediction>& preds);

} // namespace sizenet

#endif
