#include "sizenet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sizenet/text.hpp"

namespace sizenet {

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Resolves each manifest row to (true index, predicted index) for the
// chosen variant, validating exact coverage first.
std::vector<std::pair<std::size_t, std::size_t>> resolve_pairs(
    const Manifest& manifest, const std::vector<GatedPrediction>& preds, const LabelSet& ls,
    Variant variant) {
    validate_manifest_labels(manifest, ls);
    if (preds.size() != manifest.rows.size()) {
        throw ValidationError("predictions cover " + std::to_string(preds.size()) +
                              " rows, manifest has " + std::to_string(manifest.rows.size()));
    }
    std::unordered_map<std::string, std::size_t> pred_index;
    pred_index.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!pred_index.emplace(preds[i].image_id, i).second) {
            throw ValidationError("duplicate prediction for image_id '" + preds[i].image_id +
                                  "'");
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(manifest.rows.size());
    for (const auto& row : manifest.rows) {
        auto it = pred_index.find(row.image_id);
        if (it == pred_index.end()) {
            throw ValidationError("missing prediction for image_id '" + row.image_id + "'");
        }
        const GatedPrediction& p = preds[it->second];
        const std::string& predicted =
            variant == Variant::Gated ? p.predicted : p.baseline_top1;
        auto pred_idx = ls.index_of(predicted);
        if (!pred_idx) {
            throw ValidationError("prediction for '" + row.image_id + "' uses unknown label '" +
                                  predicted + "'");
        }
        pairs.emplace_back(*ls.index_of(row.true_label), *pred_idx);
    }
    return pairs;
}

} // namespace

std::string_view variant_name(Variant v) {
    return v == Variant::Baseline ? "baseline" : "gated";
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t true_idx) const {
    std::uint64_t sum = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) sum += at(true_idx, j);
    return sum;
}

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) sum += at(i, i);
    return sum;
}

ConfusionMatrix confusion_serial(const Manifest& manifest,
                                 const std::vector<GatedPrediction>& preds, const LabelSet& ls,
                                 Variant variant) {
    auto pairs = resolve_pairs(manifest, preds, ls, variant);
    ConfusionMatrix cm;
    cm.labels = ls.labels();
    cm.counts.assign(ls.size() * ls.size(), 0);
    for (auto [t, p] : pairs) ++cm.at(t, p);
    return cm;
}

ConfusionMatrix confusion(const Manifest& manifest, const std::vector<GatedPrediction>& preds,
                          const LabelSet& ls, Variant variant) {
    auto pairs = resolve_pairs(manifest, preds, ls, variant);
    ConfusionMatrix cm;
    cm.labels = ls.labels();
    cm.counts.assign(ls.size() * ls.size(), 0);
    const std::size_t cells = cm.counts.size();
    const std::int64_t n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel
    {
        // Per-thread partial counts, merged under a critical section.
        // Integer addition commutes, so the merge order cannot change
        // the result.
        std::vector<std::uint64_t> local(cells, 0);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            auto [t, p] = pairs[static_cast<std::size_t>(i)];
            ++local[t * ls.size() + p];
        }
#pragma omp critical
        {
            for (std::size_t c = 0; c < cells; ++c) cm.counts[c] += local[c];
        }
    }
    return cm;
}

AccuracyReport accuracies(const ConfusionMatrix& cm, std::size_t fallback_count,
                          Variant variant) {
    if (cm.labels.empty() || cm.total() == 0) {
        throw ValidationError("empty confusion matrix");
    }
    AccuracyReport r;
    r.variant = variant;
    r.labels = cm.labels;
    r.per_class.resize(cm.labels.size());
    double macro_sum = 0.0;
    std::size_t macro_classes = 0;
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        std::uint64_t row = cm.row_sum(i);
        if (row == 0) {
            r.per_class[i] = std::nullopt;
            continue;
        }
        double acc = static_cast<double>(cm.at(i, i)) / static_cast<double>(row);
        r.per_class[i] = acc;
        macro_sum += acc;
        ++macro_classes;
    }
    r.macro = macro_sum / static_cast<double>(macro_classes);
    r.micro = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
    r.fallback_rate = static_cast<double>(fallback_count) / static_cast<double>(cm.total());
    return r;
}

std::size_t count_fallbacks(const std::vector<GatedPrediction>& preds) {
    return static_cast<std::size_t>(std::count_if(
        preds.begin(), preds.end(), [](const GatedPrediction& p) { return p.fallback_used; }));
}

ComparisonReport compare_report(const AccuracyReport& baseline, const AccuracyReport& gated) {
    if (baseline.labels != gated.labels) {
        throw ValidationError("comparison: reports use different label sets");
    }
    ComparisonReport r;
    r.labels = baseline.labels;
    r.baseline = baseline;
    r.gated = gated;
    r.dominance_violated = gated.micro < baseline.micro;
    return r;
}

std::string write_confusion(const ConfusionMatrix& cm) {
    std::string out = "true_label";
    for (const auto& label : cm.labels) {
        out += ',';
        out += label;
    }
    out += '\n';
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        out += cm.labels[i];
        for (std::size_t j = 0; j < cm.labels.size(); ++j) {
            out += ',';
            out += std::to_string(cm.at(i, j));
        }
        out += '\n';
    }
    return out;
}

ConfusionMatrix read_confusion(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty()) throw ValidationError("confusion file: empty file");
    auto header = split_csv_line(lines[0]);
    if (header.size() < 3 || header[0] != "true_label") {
        throw ValidationError("confusion file: header must be true_label,<labels...>");
    }
    ConfusionMatrix cm;
    cm.labels.assign(header.begin() + 1, header.end());
    const std::size_t k = cm.labels.size();
    if (lines.size() != k + 1) {
        throw ValidationError("confusion file: expected " + std::to_string(k) + " rows, got " +
                              std::to_string(lines.size() - 1));
    }
    cm.counts.assign(k * k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        auto fields = split_csv_line(lines[i + 1]);
        if (fields.size() != k + 1 || fields[0] != cm.labels[i]) {
            throw ValidationError("confusion file row " + std::to_string(i + 1) +
                                  ": row label must match column order");
        }
        for (std::size_t j = 0; j < k; ++j) {
            auto v = parse_real(fields[j + 1]);
            if (!v || *v < 0 || *v != std::floor(*v)) {
                throw ValidationError("confusion file row " + std::to_string(i + 1) +
                                      ": bad count '" + fields[j + 1] + "'");
            }
            cm.at(i, j) = static_cast<std::uint64_t>(*v);
        }
    }
    return cm;
}

namespace {

std::vector<std::string> report_fields(const AccuracyReport& r) {
    std::vector<std::string> fields;
    fields.emplace_back(variant_name(r.variant));
    for (const auto& acc : r.per_class) fields.push_back(acc ? format_real(*acc) : "");
    fields.push_back(format_real(r.macro));
    fields.push_back(format_real(r.micro));
    fields.push_back(format_real(r.fallback_rate));
    return fields;
}

std::vector<std::string> delta_fields(const ComparisonReport& r) {
    std::vector<std::string> fields;
    fields.emplace_back("delta");
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        if (r.baseline.per_class[i] && r.gated.per_class[i]) {
            fields.push_back(format_real(*r.gated.per_class[i] - *r.baseline.per_class[i]));
        } else {
            fields.emplace_back("");
        }
    }
    fields.push_back(format_real(r.gated.macro - r.baseline.macro));
    fields.push_back(format_real(r.gated.micro - r.baseline.micro));
    fields.push_back(format_real(r.gated.fallback_rate - r.baseline.fallback_rate));
    return fields;
}

} // namespace

std::string render_comparison_csv(const ComparisonReport& r) {
    std::vector<std::string> header;
    header.emplace_back("variant");
    for (const auto& label : r.labels) header.push_back(label);
    header.emplace_back("macro");
    header.emplace_back("micro");
    header.emplace_back("fallback_rate");

    std::string out = join_csv(header) + "\n";
    out += join_csv(report_fields(r.baseline)) + "\n";
    out += join_csv(report_fields(r.gated)) + "\n";
    out += join_csv(delta_fields(r)) + "\n";
    return out;
}

std::string render_comparison_table(const ComparisonReport& r) {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"variant"};
    for (const auto& label : r.labels) header.push_back(label);
    header.insert(header.end(), {"macro", "micro", "fallback_rate"});
    grid.push_back(header);

    auto row_for = [&](const AccuracyReport& rep) {
        std::vector<std::string> row{std::string(variant_name(rep.variant))};
        for (const auto& acc : rep.per_class) row.push_back(acc ? fixed4(*acc) : "-");
        row.push_back(fixed4(rep.macro));
        row.push_back(fixed4(rep.micro));
        row.push_back(fixed4(rep.fallback_rate));
        return row;
    };
    grid.push_back(row_for(r.baseline));
    grid.push_back(row_for(r.gated));

    std::vector<std::string> delta{"delta"};
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        if (r.baseline.per_class[i] && r.gated.per_class[i]) {
            delta.push_back(fixed4(*r.gated.per_class[i] - *r.baseline.per_class[i]));
        } else {
            delta.emplace_back("-");
        }
    }
    delta.push_back(fixed4(r.gated.macro - r.baseline.macro));
    delta.push_back(fixed4(r.gated.micro - r.baseline.micro));
    delta.push_back(fixed4(r.gated.fallback_rate - r.baseline.fallback_rate));
    grid.push_back(delta);

    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    for (std::size_t rix = 0; rix < grid.size(); ++rix) {
        const auto& row = grid[rix];
        out += "|";
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += ' ';
            out += row[c];
            out.append(widths[c] - row[c].size(), ' ');
            out += " |";
        }
        out += '\n';
        if (rix == 0) {
            out += "|";
            for (std::size_t c = 0; c < row.size(); ++c) {
                out.append(widths[c] + 2, '-');
                out += '|';
            }
            out += '\n';
        }
    }
    if (r.dominance_violated) {
        out += "! gated micro-accuracy fell below baseline: some true labels were excluded by "
               "their own size annotation\n";
    }
    return out;
}

} // namespace sizenet
