#include "sizenet/gate.hpp"

#include <cmath>
#include <cstdint>

#include "sizenet/text.hpp"

namespace sizenet {

namespace {

struct GateIndices {
    std::size_t predicted;
    std::size_t baseline;
    std::vector<std::size_t> filtered;
    bool fallback;
    std::size_t rank;
};

// probs[i] beats probs[j] under the deterministic ordering: higher
// probability first, lower LabelSet index on ties.
bool beats(std::span<const double> probs, std::size_t i, std::size_t j) {
    return probs[i] > probs[j] || (probs[i] == probs[j] && i < j);
}

GateIndices gate_indices(const LabelSet& ls, double size_m, std::span<const double> probs) {
    GateIndices g;
    g.filtered = filter_indices_by_size(ls, size_m);
    g.baseline = argmax_index(probs);
    if (g.filtered.empty()) {
        g.fallback = true;
        g.predicted = g.baseline;
        g.rank = 1;
        return g;
    }
    g.fallback = false;
    std::size_t best = g.filtered[0];
    for (std::size_t idx : g.filtered) {
        if (beats(probs, idx, best)) best = idx;
    }
    g.predicted = best;
    // rank of predicted in the full descending-probability order
    g.rank = 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (i != best && beats(probs, i, best)) ++g.rank;
    }
    return g;
}

} // namespace

std::size_t argmax_index(std::span<const double> probs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return best;
}

GatedPrediction gate(const LabelSet& ls, double size_m, const ScoreVector& scores) {
    validate_score_vector(ls, scores);
    GateIndices g = gate_indices(ls, size_m, scores.probs);
    GatedPrediction p;
    p.image_id = scores.image_id;
    p.predicted = ls.label(g.predicted);
    p.baseline_top1 = ls.label(g.baseline);
    p.fallback_used = g.fallback;
    p.selected_rank = g.rank;
    p.filtered_set.reserve(g.filtered.size());
    for (std::size_t idx : g.filtered) p.filtered_set.push_back(ls.label(idx));
    return p;
}

namespace {

// Shared by the serial and parallel batch versions: validate everything
// up front so the per-row loop cannot throw.
std::vector<std::size_t> resolve_score_rows(const LabelSet& ls, const Manifest& manifest,
                                            const ScoreTable& scores) {
    if (scores.labels != ls.labels()) {
        throw ValidationError("score table labels do not match label set '" + ls.name + "'");
    }
    validate_manifest_labels(manifest, ls);
    auto index = scores.index();
    std::vector<std::size_t> row_of(manifest.rows.size());
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
        const auto& row = manifest.rows[i];
        if (!row.size_m) {
            throw ValidationError("manifest row '" + row.image_id +
                                  "' has no size annotation; cannot gate");
        }
        if (!(*row.size_m > 0.0) || !std::isfinite(*row.size_m)) {
            throw ValidationError("manifest row '" + row.image_id +
                                  "' has a non-positive or non-finite size");
        }
        auto it = index.find(row.image_id);
        if (it == index.end()) {
            throw ValidationError("no score row for image_id '" + row.image_id + "'");
        }
        validate_score_vector(ls, scores.rows[it->second]);
        row_of[i] = it->second;
    }
    return row_of;
}

GatedPrediction prediction_from_indices(const LabelSet& ls, const ScoreVector& sv,
                                        const GateIndices& g) {
    GatedPrediction p;
    p.image_id = sv.image_id;
    p.predicted = ls.label(g.predicted);
    p.baseline_top1 = ls.label(g.baseline);
    p.fallback_used = g.fallback;
    p.selected_rank = g.rank;
    p.filtered_set.reserve(g.filtered.size());
    for (std::size_t idx : g.filtered) p.filtered_set.push_back(ls.label(idx));
    return p;
}

} // namespace

std::vector<GatedPrediction> gate_batch_serial(const LabelSet& ls, const Manifest& manifest,
                                               const ScoreTable& scores) {
    auto row_of = resolve_score_rows(ls, manifest, scores);
    std::vector<GatedPrediction> out(manifest.rows.size());
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
        const ScoreVector& sv = scores.rows[row_of[i]];
        out[i] = prediction_from_indices(
            ls, sv, gate_indices(ls, *manifest.rows[i].size_m, sv.probs));
    }
    return out;
}

std::vector<GatedPrediction> gate_batch(const LabelSet& ls, const Manifest& manifest,
                                        const ScoreTable& scores) {
    auto row_of = resolve_score_rows(ls, manifest, scores);
    std::vector<GatedPrediction> out(manifest.rows.size());
    const std::int64_t n = static_cast<std::int64_t>(manifest.rows.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        auto idx = static_cast<std::size_t>(i);
        const ScoreVector& sv = scores.rows[row_of[idx]];
        out[idx] = prediction_from_indices(
            ls, sv, gate_indices(ls, *manifest.rows[idx].size_m, sv.probs));
    }
    return out;
}

std::vector<GatedPrediction> read_predictions(std::string_view text) {
    if (text.find('\r') != std::string_view::npos) {
        throw ValidationError("predictions file: CR found, files must use LF line endings");
    }
    auto lines = split_lines(text);
    if (lines.empty()) throw ValidationError("predictions file: empty file");
    if (lines[0] != "image_id,predicted,baseline_top1,fallback_used,selected_rank,filtered_set") {
        throw ValidationError("predictions file: unexpected header '" + std::string(lines[0]) +
                              "'");
    }
    std::vector<GatedPrediction> preds;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != 6) {
            throw ValidationError("predictions row " + std::to_string(i) +
                                  ": expected 6 fields, got " + std::to_string(fields.size()));
        }
        GatedPrediction p;
        p.image_id = fields[0];
        p.predicted = fields[1];
        p.baseline_top1 = fields[2];
        if (fields[3] == "true") {
            p.fallback_used = true;
        } else if (fields[3] == "false") {
            p.fallback_used = false;
        } else {
            throw ValidationError("predictions row '" + p.image_id +
                                  "': fallback_used must be true/false");
        }
        auto rank = parse_real(fields[4]);
        if (!rank || *rank < 1.0 || *rank != static_cast<double>(static_cast<std::size_t>(*rank))) {
            throw ValidationError("predictions row '" + p.image_id + "': bad selected_rank '" +
                                  fields[4] + "'");
        }
        p.selected_rank = static_cast<std::size_t>(*rank);
        if (!fields[5].empty()) {
            std::string_view rest = fields[5];
            while (true) {
                std::size_t bar = rest.find('|');
                if (bar == std::string_view::npos) {
                    p.filtered_set.emplace_back(rest);
                    break;
                }
                p.filtered_set.emplace_back(rest.substr(0, bar));
                rest = rest.substr(bar + 1);
            }
        }
        if (p.fallback_used && !p.filtered_set.empty()) {
            throw ValidationError("predictions row '" + p.image_id +
                                  "': fallback with non-empty filtered_set");
        }
        preds.push_back(std::move(p));
    }
    return preds;
}

std::string write_predictions(const std::vector<GatedPrediction>& preds) {
    std::string out = "image_id,predicted,baseline_top1,fallback_used,selected_rank,filtered_set\n";
    for (const auto& p : preds) {
        out += p.image_id;
        out += ',';
        out += p.predicted;
        out += ',';
        out += p.baseline_top1;
        out += ',';
        out += p.fallback_used ? "true" : "false";
        out += ',';
        out += std::to_string(p.selected_rank);
        out += ',';
        for (std::size_t i = 0; i < p.filtered_set.size(); ++i) {
            if (i != 0) out += '|';
            out += p.filtered_set[i];
        }
        out += '\n';
    }
    return out;
}

} // namespace sizenet
