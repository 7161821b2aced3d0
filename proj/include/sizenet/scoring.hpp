#ifndef SIZENET_SCORING_HPP
#define SIZENET_SCORING_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sizenet/dataset_io.hpp"
#include "sizenet/label_set.hpp"

namespace sizenet {

/// Per-image class probabilities, aligned with a LabelSet's category order.
struct ScoreVector {
    std::string image_id;
    std::vector<double> probs;
};

/// Checks the scorer contract: one prob per label, all finite in [0,1],
/// sum within 1e-6 of 1. Applied at the contract boundary.
void validate_score_vector(const LabelSet& ls, const ScoreVector& sv);

struct ScoreTable {
    std::vector<std::string> labels; // LabelSet order
    std::vector<ScoreVector> rows;

    /// id -> row position; built once, throws on duplicates.
    std::unordered_map<std::string, std::size_t> index() const;
};

// ---------------------------------------------------------------------------
// Built-in feature scorer: nearest centroid with a softmax over negative
// squared distances, prob(c) ∝ exp(-||x - centroid_c||^2 / tau).
// ---------------------------------------------------------------------------

struct CentroidModel {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> centroids; // one per label, shared dim
    double tau = 1.0;

    std::size_t dim() const { return centroids.empty() ? 0 : centroids[0].size(); }
};

void validate_centroid_model(const CentroidModel& m);

/// Per-class arithmetic mean of the labeled feature vectors. Deterministic
/// and invariant under sample order.
CentroidModel train_centroids(const FeatureTable& features, const Manifest& labels,
                              const LabelSet& ls, double tau);

/// Softmax of -sq_dists/tau with max-subtraction, so a constant shift of
/// all squared distances leaves the output unchanged.
std::vector<double> softmax_from_sq_distances(std::span<const double> sq_dists, double tau);

ScoreVector centroid_score(const CentroidModel& m, std::string_view image_id,
                           std::span<const double> features);

/// Scores every feature row. The parallel version is the default; the
/// serial one is the reference the tests compare against.
ScoreTable score_features(const CentroidModel& m, const FeatureTable& features);
ScoreTable score_features_serial(const CentroidModel& m, const FeatureTable& features);

// ---------------------------------------------------------------------------
// Pluggable scorer contract. Lets external model outputs (score files)
// stand in for the built-in centroid scorer anywhere downstream.
// ---------------------------------------------------------------------------

class Scorer {
public:
    virtual ~Scorer() = default;
    virtual const std::vector<std::string>& labels() const = 0;
    /// features may be empty for scorers that look the image up by id.
    virtual ScoreVector score(std::string_view image_id,
                              std::span<const double> features) const = 0;
};

/// Replays stored probabilities; errors on unknown image_id.
class FileScorer : public Scorer {
public:
    explicit FileScorer(ScoreTable table);
    const std::vector<std::string>& labels() const override { return table_.labels; }
    ScoreVector score(std::string_view image_id, std::span<const double>) const override;

private:
    ScoreTable table_;
    std::unordered_map<std::string, std::size_t> index_;
};

class CentroidScorer : public Scorer {
public:
    explicit CentroidScorer(CentroidModel model);
    const std::vector<std::string>& labels() const override { return model_.labels; }
    ScoreVector score(std::string_view image_id, std::span<const double> features) const override;

private:
    CentroidModel model_;
};

// ---------------------------------------------------------------------------
// Score CSV: header image_id,<label1>,...,<labelN> in LabelSet order.
// Rows whose sum is within 1e-3 of 1 are renormalized; worse sums are
// rejected (external softmax outputs are float32 and rarely sum exactly).
// ---------------------------------------------------------------------------

ScoreTable read_scores(std::string_view text, const LabelSet& ls);
std::string write_scores(const ScoreTable& t);

// Centroid model JSON: {"labels":[...],"tau":...,"dim":...,"centroids":[[...],...]}
CentroidModel read_centroid_model(std::string_view text);
std::string write_centroid_model(const CentroidModel& m);

} // namespace sizenet

#endif
