#include "sizenet/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "sizenet/text.hpp"

namespace sizenet {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kSumTolerance = 1e-6;   // contract tolerance on emitted vectors
constexpr double kIngestTolerance = 1e-3; // renormalization window for score files

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace

void validate_score_vector(const LabelSet& ls, const ScoreVector& sv) {
    if (sv.probs.size() != ls.size()) {
        throw ValidationError("score vector '" + sv.image_id + "': " +
                              std::to_string(sv.probs.size()) + " probs for " +
                              std::to_string(ls.size()) + " labels");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < sv.probs.size(); ++i) {
        double p = sv.probs[i];
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw ValidationError("score vector '" + sv.image_id + "': prob for '" +
                                  ls.label(i) + "' out of [0,1]: " + format_real(p));
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw ValidationError("score vector '" + sv.image_id + "': probs sum to " +
                              format_real(sum) + ", expected 1 within 1e-6");
    }
}

std::unordered_map<std::string, std::size_t> ScoreTable::index() const {
    std::unordered_map<std::string, std::size_t> idx;
    idx.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!idx.emplace(rows[i].image_id, i).second) {
            throw ValidationError("score table: duplicate image_id '" + rows[i].image_id + "'");
        }
    }
    return idx;
}

void validate_centroid_model(const CentroidModel& m) {
    if (m.labels.size() < 2) throw ValidationError("centroid model: fewer than 2 labels");
    if (m.labels.size() != m.centroids.size()) {
        throw ValidationError("centroid model: label/centroid count mismatch");
    }
    if (!(m.tau > 0.0) || !std::isfinite(m.tau)) {
        throw ValidationError("centroid model: tau must be positive and finite");
    }
    std::size_t d = m.dim();
    if (d == 0) throw ValidationError("centroid model: zero-dimensional centroids");
    for (std::size_t c = 0; c < m.centroids.size(); ++c) {
        if (m.centroids[c].size() != d) {
            throw ValidationError("centroid model: centroid for '" + m.labels[c] +
                                  "' has dimension " + std::to_string(m.centroids[c].size()) +
                                  ", expected " + std::to_string(d));
        }
        for (double v : m.centroids[c]) {
            if (!std::isfinite(v)) {
                throw ValidationError("centroid model: non-finite entry in centroid '" +
                                      m.labels[c] + "'");
            }
        }
    }
}

CentroidModel train_centroids(const FeatureTable& features, const Manifest& labels,
                              const LabelSet& ls, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ValidationError("tau must be positive and finite");
    }
    auto manifest_index = index_by_id([&] {
        std::vector<std::string> ids;
        ids.reserve(labels.rows.size());
        for (const auto& r : labels.rows) ids.push_back(r.image_id);
        return ids;
    }(), "training manifest");
    validate_manifest_labels(labels, ls);

    const std::size_t k = ls.size();
    const std::size_t d = features.dim;
    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(k, 0);

    for (std::size_t i = 0; i < features.rows.size(); ++i) {
        auto it = manifest_index.find(features.image_ids[i]);
        if (it == manifest_index.end()) {
            throw ValidationError("feature row '" + features.image_ids[i] +
                                  "' has no label in the training manifest");
        }
        std::size_t c = *ls.index_of(labels.rows[it->second].true_label);
        for (std::size_t j = 0; j < d; ++j) sums[c][j] += features.rows[i][j];
        ++counts[c];
    }

    CentroidModel m;
    m.tau = tau;
    m.labels = ls.labels();
    m.centroids.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            throw ValidationError("class '" + ls.label(c) + "' has zero training samples");
        }
        m.centroids[c].resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            m.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
    }
    validate_centroid_model(m);
    return m;
}

std::vector<double> softmax_from_sq_distances(std::span<const double> sq_dists, double tau) {
    double best = *std::min_element(sq_dists.begin(), sq_dists.end());
    std::vector<double> probs(sq_dists.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < sq_dists.size(); ++i) {
        probs[i] = std::exp(-(sq_dists[i] - best) / tau);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

ScoreVector centroid_score(const CentroidModel& m, std::string_view image_id,
                           std::span<const double> features) {
    if (features.size() != m.dim()) {
        throw ValidationError("feature vector for '" + std::string(image_id) +
                              "' has dimension " + std::to_string(features.size()) +
                              ", model expects " + std::to_string(m.dim()));
    }
    std::vector<double> sq(m.centroids.size());
    for (std::size_t c = 0; c < m.centroids.size(); ++c) {
        sq[c] = squared_distance(features, m.centroids[c]);
    }
    return {std::string(image_id), softmax_from_sq_distances(sq, m.tau)};
}

ScoreTable score_features_serial(const CentroidModel& m, const FeatureTable& features) {
    ScoreTable t;
    t.labels = m.labels;
    t.rows.resize(features.rows.size());
    for (std::size_t i = 0; i < features.rows.size(); ++i) {
        t.rows[i] = centroid_score(m, features.image_ids[i], features.rows[i]);
    }
    return t;
}

ScoreTable score_features(const CentroidModel& m, const FeatureTable& features) {
    // Dimension checks happen before the parallel region; nothing inside
    // the loop may throw.
    if (features.dim != m.dim()) {
        throw ValidationError("feature table dimension " + std::to_string(features.dim) +
                              " does not match model dimension " + std::to_string(m.dim()));
    }
    for (std::size_t i = 0; i < features.rows.size(); ++i) {
        if (features.rows[i].size() != features.dim) {
            throw ValidationError("feature row '" + features.image_ids[i] + "' is ragged");
        }
    }
    ScoreTable t;
    t.labels = m.labels;
    t.rows.resize(features.rows.size());
    const std::int64_t n = static_cast<std::int64_t>(features.rows.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        auto idx = static_cast<std::size_t>(i);
        t.rows[idx] = centroid_score(m, features.image_ids[idx], features.rows[idx]);
    }
    return t;
}

FileScorer::FileScorer(ScoreTable table) : table_(std::move(table)), index_(table_.index()) {}

ScoreVector FileScorer::score(std::string_view image_id, std::span<const double>) const {
    auto it = index_.find(std::string(image_id));
    if (it == index_.end()) {
        throw ValidationError("no stored scores for image_id '" + std::string(image_id) + "'");
    }
    return table_.rows[it->second];
}

CentroidScorer::CentroidScorer(CentroidModel model) : model_(std::move(model)) {
    validate_centroid_model(model_);
}

ScoreVector CentroidScorer::score(std::string_view image_id,
                                  std::span<const double> features) const {
    return centroid_score(model_, image_id, features);
}

ScoreTable read_scores(std::string_view text, const LabelSet& ls) {
    if (text.find('\r') != std::string_view::npos) {
        throw ValidationError("score file: CR found, files must use LF line endings");
    }
    auto lines = split_lines(text);
    if (lines.empty()) throw ValidationError("score file: empty file");
    auto header = split_csv_line(lines[0]);
    if (header.empty() || header[0] != "image_id") {
        throw ValidationError("score file: first header column must be 'image_id'");
    }
    if (header.size() != ls.size() + 1) {
        throw ValidationError("score file: header has " + std::to_string(header.size() - 1) +
                              " label columns, label set '" + ls.name + "' has " +
                              std::to_string(ls.size()));
    }
    for (std::size_t c = 0; c < ls.size(); ++c) {
        if (header[c + 1] != ls.label(c)) {
            throw ValidationError("score file: header column " + std::to_string(c + 1) +
                                  " is '" + header[c + 1] + "', label set order expects '" +
                                  ls.label(c) + "'");
        }
    }

    ScoreTable t;
    t.labels = ls.labels();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != ls.size() + 1) {
            throw ValidationError("score file row " + std::to_string(i) + ": expected " +
                                  std::to_string(ls.size() + 1) + " fields, got " +
                                  std::to_string(fields.size()));
        }
        ScoreVector sv;
        sv.image_id = fields[0];
        if (!is_plain_field(sv.image_id)) {
            throw ValidationError("score file row " + std::to_string(i) + ": bad image_id");
        }
        sv.probs.resize(ls.size());
        double sum = 0.0;
        for (std::size_t c = 0; c < ls.size(); ++c) {
            auto v = parse_real(fields[c + 1]);
            if (!v || *v < 0.0 || *v > 1.0) {
                throw ValidationError("score file row '" + sv.image_id + "': prob for '" +
                                      ls.label(c) + "' out of [0,1]: '" + fields[c + 1] + "'");
            }
            sv.probs[c] = *v;
            sum += *v;
        }
        if (std::abs(sum - 1.0) > kIngestTolerance) {
            throw ValidationError("score file row '" + sv.image_id + "': probs sum to " +
                                  format_real(sum) + ", outside [1-1e-3, 1+1e-3]");
        }
        for (double& p : sv.probs) p /= sum;
        validate_score_vector(ls, sv);
        t.rows.push_back(std::move(sv));
    }
    t.index(); // reject duplicates
    return t;
}

std::string write_scores(const ScoreTable& t) {
    std::string out = "image_id";
    for (const auto& label : t.labels) {
        out += ',';
        out += label;
    }
    out += '\n';
    for (const auto& row : t.rows) {
        out += row.image_id;
        for (double p : row.probs) {
            out += ',';
            out += format_real(p);
        }
        out += '\n';
    }
    return out;
}

CentroidModel read_centroid_model(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed centroid model file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("labels") || !j.contains("tau") || !j.contains("dim") ||
        !j.contains("centroids")) {
        throw ValidationError("centroid model file: expected fields labels, tau, dim, centroids");
    }
    CentroidModel m;
    try {
        m.labels = j.at("labels").get<std::vector<std::string>>();
        m.tau = j.at("tau").get<double>();
        m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
        auto dim = j.at("dim").get<std::size_t>();
        if (m.dim() != dim) {
            throw ValidationError("centroid model file: 'dim' is " + std::to_string(dim) +
                                  " but centroids have dimension " + std::to_string(m.dim()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("centroid model file: bad field type: ") + e.what());
    }
    validate_centroid_model(m);
    return m;
}

std::string write_centroid_model(const CentroidModel& m) {
    ordered_json j;
    j["labels"] = m.labels;
    j["tau"] = m.tau;
    j["dim"] = m.dim();
    j["centroids"] = m.centroids;
    return j.dump() + "\n";
}

} // namespace sizenet
