#include "sizenet/synth.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "sizenet/error.hpp"
#include "sizenet/files.hpp"
#include "sizenet/rng.hpp"
#include "sizenet/text.hpp"

namespace fs = std::filesystem;

namespace sizenet {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kTrainSplit = 0;
constexpr std::uint64_t kTestSplit = 1;

std::string mode_name(SynthMode m) {
    return m == SynthMode::Pairs ? "pairs" : "interference";
}

std::string row_id(const std::string& label, std::string_view split, std::size_t row) {
    char num[16];
    std::snprintf(num, sizeof num, "%04zu", row);
    return label + "_" + std::string(split) + "_" + num;
}

LabelSet label_set_from_config(const SynthConfig& cfg) {
    LabelSet ls;
    ls.name = "synth-" + mode_name(cfg.mode);
    ls.categories = cfg.classes;
    validate_label_set(ls);
    return ls;
}

} // namespace

void validate_synth_config(const SynthConfig& cfg) {
    if (cfg.n_train < 1 || cfg.n_test < 1) {
        throw ValidationError("synth config: n_train and n_test must be >= 1");
    }
    if (!(cfg.noise_sigma > 0.0) || !std::isfinite(cfg.noise_sigma)) {
        throw ValidationError("synth config: noise_sigma must be positive");
    }
    if (cfg.group_separation < 0.0 || !std::isfinite(cfg.group_separation)) {
        throw ValidationError("synth config: group_separation must be >= 0");
    }
    if (cfg.pair_separation < 0.0 || !std::isfinite(cfg.pair_separation)) {
        throw ValidationError("synth config: pair_separation must be >= 0");
    }
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0 || !std::isfinite(cfg.alpha)) {
        throw ValidationError("synth config: alpha must be in [0,1]");
    }
    if (cfg.dim < 1) throw ValidationError("synth config: dim must be >= 1");

    // Label/range invariants are shared with the label-set rules.
    label_set_from_config(cfg);

    if (cfg.mode == SynthMode::Pairs) {
        if (cfg.classes.size() < 2 || cfg.classes.size() % 2 != 0) {
            throw ValidationError("pairs config: classes must come in (object, model) pairs");
        }
        const std::size_t groups = cfg.classes.size() / 2;
        for (std::size_t g = 0; g < groups; ++g) {
            const auto& obj = cfg.classes[2 * g];
            const auto& mod = cfg.classes[2 * g + 1];
            if (obj.range.overlaps(mod.range)) {
                throw ValidationError("pairs config: size ranges of '" + obj.label + "' and '" +
                                      mod.label + "' overlap; within-pair ranges must be disjoint");
            }
        }
        const std::size_t needed = cfg.pair_separation > 0.0 ? 2 * groups : groups;
        if (cfg.dim < needed) {
            throw ValidationError("pairs config: dim must be >= " + std::to_string(needed) +
                                  " for " + std::to_string(groups) + " groups");
        }
    } else {
        if (cfg.classes.size() < 2) {
            throw ValidationError("interference config: need >= 2 classes");
        }
        for (std::size_t i = 0; i < cfg.classes.size(); ++i) {
            for (std::size_t j = i + 1; j < cfg.classes.size(); ++j) {
                if (cfg.classes[i].range.overlaps(cfg.classes[j].range)) {
                    throw ValidationError("interference config: size ranges of '" +
                                          cfg.classes[i].label + "' and '" +
                                          cfg.classes[j].label + "' overlap");
                }
            }
        }
        if (cfg.dim < cfg.classes.size()) {
            throw ValidationError("interference config: dim must be >= class count");
        }
    }
}

SynthConfig default_pair_config() {
    SynthConfig cfg;
    cfg.mode = SynthMode::Pairs;
    cfg.seed = 20250301;
    cfg.dim = 16;
    cfg.n_train = 350;
    cfg.n_test = 100;
    cfg.noise_sigma = 1.0;
    cfg.group_separation = 6.0;
    cfg.pair_separation = 0.0;
    cfg.classes = {
        {"pair1_object", {4.0, 8.0}},   {"pair1_model", {0.1, 1.0}},
        {"pair2_object", {5.0, 12.0}},  {"pair2_model", {0.2, 1.0}},
        {"pair3_object", {30.0, 90.0}}, {"pair3_model", {0.3, 2.0}},
    };
    return cfg;
}

SynthConfig default_interference_config() {
    SynthConfig cfg;
    cfg.mode = SynthMode::Interference;
    cfg.seed = 20250302;
    cfg.dim = 16;
    cfg.n_train = 350;
    cfg.n_test = 100;
    cfg.noise_sigma = 1.0;
    cfg.group_separation = 6.0;
    cfg.alpha = 0.5;
    cfg.classes = {
        {"class_a", {1.0, 3.0}},
        {"class_b", {5.0, 8.0}},
        {"class_c", {10.0, 20.0}},
        {"class_d", {25.0, 40.0}},
        {"class_e", {50.0, 90.0}},
    };
    return cfg;
}

SynthConfig parse_synth_config(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed synth config: ") + e.what());
    }
    if (!j.is_object() || !j.contains("mode") || !j.at("mode").is_string()) {
        throw ValidationError("synth config: missing string field 'mode'");
    }
    std::string mode = j.at("mode").get<std::string>();
    SynthConfig cfg =
        mode == "pairs" ? default_pair_config()
                        : (mode == "interference" ? default_interference_config() : SynthConfig{});
    if (mode != "pairs" && mode != "interference") {
        throw ValidationError("synth config: mode must be \"pairs\" or \"interference\"");
    }

    try {
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("dim")) cfg.dim = j.at("dim").get<std::size_t>();
        if (j.contains("n_train")) cfg.n_train = j.at("n_train").get<std::size_t>();
        if (j.contains("n_test")) cfg.n_test = j.at("n_test").get<std::size_t>();
        if (j.contains("noise_sigma")) cfg.noise_sigma = j.at("noise_sigma").get<double>();
        if (j.contains("group_separation")) {
            cfg.group_separation = j.at("group_separation").get<double>();
        }
        if (j.contains("pair_separation")) {
            cfg.pair_separation = j.at("pair_separation").get<double>();
        }
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("classes")) {
            if (!j.at("classes").is_array()) {
                throw ValidationError("synth config: 'classes' must be an array");
            }
            cfg.classes.clear();
            for (const auto& cj : j.at("classes")) {
                CategoryEntry entry;
                entry.label = to_lower_ascii(trim_ascii(cj.at("label").get<std::string>()));
                entry.range.min_m = cj.at("min_m").get<double>();
                entry.range.max_m = cj.at("max_m").get<double>();
                cfg.classes.push_back(std::move(entry));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("synth config: bad field: ") + e.what());
    }
    validate_synth_config(cfg);
    return cfg;
}

std::string write_synth_config(const SynthConfig& cfg) {
    ordered_json j;
    j["mode"] = mode_name(cfg.mode);
    j["seed"] = cfg.seed;
    j["dim"] = cfg.dim;
    j["n_train"] = cfg.n_train;
    j["n_test"] = cfg.n_test;
    j["noise_sigma"] = cfg.noise_sigma;
    j["group_separation"] = cfg.group_separation;
    if (cfg.mode == SynthMode::Pairs) {
        j["pair_separation"] = cfg.pair_separation;
    } else {
        j["alpha"] = cfg.alpha;
    }
    j["classes"] = ordered_json::array();
    for (const auto& c : cfg.classes) {
        ordered_json cj;
        cj["label"] = c.label;
        cj["min_m"] = c.range.min_m;
        cj["max_m"] = c.range.max_m;
        j["classes"].push_back(std::move(cj));
    }
    return j.dump() + "\n";
}

std::vector<double> synth_class_mean(const SynthConfig& cfg, std::size_t class_index) {
    std::vector<double> mean(cfg.dim, 0.0);
    if (cfg.mode == SynthMode::Pairs) {
        const std::size_t group = class_index / 2;
        const bool is_model = class_index % 2 == 1;
        mean[group] = cfg.group_separation;
        if (is_model && cfg.pair_separation > 0.0) {
            mean[cfg.classes.size() / 2 + group] = cfg.pair_separation;
        }
    } else {
        mean[class_index] = cfg.group_separation;
    }
    return mean;
}

namespace {

// Draw order per row is part of the dataset format; see synth.hpp.
std::vector<double> draw_features(SplitMix64& rng, const std::vector<double>& mean,
                                  double sigma) {
    std::vector<double> x(mean.size());
    rng.fill_normals(x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = mean[i] + sigma * x[i];
    return x;
}

double draw_size(SplitMix64& rng, const SizeRange& range) {
    return range.min_m + rng.next_unit() * (range.max_m - range.min_m);
}

GeneratedDataset generate_impl(const SynthConfig& cfg) {
    validate_synth_config(cfg);
    GeneratedDataset ds;
    ds.label_set = label_set_from_config(cfg);
    ds.train_manifest.label_set_name = ds.label_set.name;
    ds.test_manifest.label_set_name = ds.label_set.name;
    ds.train_features.dim = cfg.dim;
    ds.test_features.dim = cfg.dim;

    std::vector<std::vector<double>> means(cfg.classes.size());
    for (std::size_t c = 0; c < cfg.classes.size(); ++c) means[c] = synth_class_mean(cfg, c);

    for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
        const auto& cls = cfg.classes[c];
        // train split: pure class draws; sizes are known to the generator
        // and recorded, but training ignores them.
        for (std::size_t row = 0; row < cfg.n_train; ++row) {
            SplitMix64 rng(stream_seed(cfg.seed, c, kTrainSplit, row));
            auto x = draw_features(rng, means[c], cfg.noise_sigma);
            double size = draw_size(rng, cls.range);
            std::string id = row_id(cls.label, "train", row);
            ds.train_features.image_ids.push_back(id);
            ds.train_features.rows.push_back(std::move(x));
            ds.train_manifest.rows.push_back({std::move(id), cls.label, size});
        }
        for (std::size_t row = 0; row < cfg.n_test; ++row) {
            SplitMix64 rng(stream_seed(cfg.seed, c, kTestSplit, row));
            std::vector<double> x = draw_features(rng, means[c], cfg.noise_sigma);
            if (cfg.mode == SynthMode::Interference) {
                std::size_t other = rng.next_below(cfg.classes.size() - 1);
                if (other >= c) ++other; // skip the target class
                auto xi = draw_features(rng, means[other], cfg.noise_sigma);
                for (std::size_t i = 0; i < x.size(); ++i) {
                    x[i] = (1.0 - cfg.alpha) * x[i] + cfg.alpha * xi[i];
                }
            }
            double size = draw_size(rng, cls.range);
            std::string id = row_id(cls.label, "test", row);
            ds.test_features.image_ids.push_back(id);
            ds.test_features.rows.push_back(std::move(x));
            ds.test_manifest.rows.push_back({std::move(id), cls.label, size});
        }
    }
    return ds;
}

} // namespace

GeneratedDataset generate_pairs(const SynthConfig& cfg) {
    if (cfg.mode != SynthMode::Pairs) throw ValidationError("config mode is not pairs");
    return generate_impl(cfg);
}

GeneratedDataset generate_interference(const SynthConfig& cfg) {
    if (cfg.mode != SynthMode::Interference) {
        throw ValidationError("config mode is not interference");
    }
    return generate_impl(cfg);
}

GeneratedDataset generate(const SynthConfig& cfg) {
    return cfg.mode == SynthMode::Pairs ? generate_pairs(cfg) : generate_interference(cfg);
}

void write_dataset(const GeneratedDataset& ds, const SynthConfig& cfg, const fs::path& out_dir) {
    atomic_write_file(out_dir / "label_set.json", write_label_set(ds.label_set));
    atomic_write_file(out_dir / "train_manifest.csv", write_manifest(ds.train_manifest));
    atomic_write_file(out_dir / "train_features.csv", write_features(ds.train_features));
    atomic_write_file(out_dir / "test_manifest.csv", write_manifest(ds.test_manifest));
    atomic_write_file(out_dir / "test_features.csv", write_features(ds.test_features));
    atomic_write_file(out_dir / "provenance.json", write_synth_config(cfg));
}

} // namespace sizenet
