#ifndef SIZENET_SYNTH_HPP
#define SIZENET_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sizenet/dataset_io.hpp"
#include "sizenet/label_set.hpp"

namespace sizenet {

enum class SynthMode { Pairs, Interference };

/// Desk-scale synthetic benchmark configuration.
///
/// Pairs mode builds G groups of two classes each (an "object" and its
/// "model"): both classes of a group share the feature mean
/// group_separation * axis(g), the model additionally offset by
/// pair_separation along axis(G+g). With pair_separation 0 the two
/// classes have literally identical feature distributions and only their
/// size ranges tell them apart.
///
/// Interference mode builds K classes at group_separation * axis(c); test
/// features are (1-alpha) * target draw + alpha * draw from a uniformly
/// chosen other class, while the size annotation stays in the target's
/// range.
struct SynthConfig {
    SynthMode mode = SynthMode::Pairs;
    std::uint64_t seed = 1;
    std::size_t dim = 16;
    std::size_t n_train = 350;
    std::size_t n_test = 100;
    double noise_sigma = 1.0;
    double group_separation = 6.0; // distance of each class mean from the origin
    double pair_separation = 0.0;  // pairs mode: within-pair mean offset
    double alpha = 0.5;            // interference mode: mixing weight
    std::vector<CategoryEntry> classes; // labels + size ranges, generation order
};

void validate_synth_config(const SynthConfig& cfg);

/// Bundled configs: three object/model pairs with within-pair-disjoint
/// ranges, and five interference classes with pairwise-disjoint ranges.
SynthConfig default_pair_config();
SynthConfig default_interference_config();

SynthConfig parse_synth_config(std::string_view text);
std::string write_synth_config(const SynthConfig& cfg);

/// Class mean in feature space under cfg; exposed so tests can check the
/// pair geometry directly.
std::vector<double> synth_class_mean(const SynthConfig& cfg, std::size_t class_index);

struct GeneratedDataset {
    LabelSet label_set;
    Manifest train_manifest;
    FeatureTable train_features;
    Manifest test_manifest;
    FeatureTable test_features;
};

/// Deterministic in cfg (including seed): each row draws from its own
/// splitmix64 stream keyed by (seed, class, split, row); see rng.hpp.
/// Row draw order: feature normals (paired, odd tail discarded), then for
/// interference test rows the interferer pick and its feature normals,
/// then one uniform for the size.
GeneratedDataset generate_pairs(const SynthConfig& cfg);
GeneratedDataset generate_interference(const SynthConfig& cfg);
GeneratedDataset generate(const SynthConfig& cfg);

/// Writes label_set.json, {train,test}_manifest.csv, {train,test}_features.csv
/// and provenance.json (the full resolved config) into out_dir.
void write_dataset(const GeneratedDataset& ds, const SynthConfig& cfg,
                   const std::filesystem::path& out_dir);

} // namespace sizenet

#endif
