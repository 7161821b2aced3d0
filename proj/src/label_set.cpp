#include "sizenet/label_set.hpp"

#include <cmath>
#include <unordered_set>

#include <json.hpp>

#include "sizenet/error.hpp"
#include "sizenet/text.hpp"

namespace sizenet {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string category_context(const std::string& label, std::size_t position) {
    return "category '" + label + "' (position " + std::to_string(position) + ")";
}

double require_number(const ordered_json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key)) throw ValidationError("missing field '" + std::string(key) + "' in " + ctx);
    const auto& v = j.at(key);
    if (!v.is_number()) {
        throw ValidationError("field '" + std::string(key) + "' must be a number in " + ctx);
    }
    return v.get<double>();
}

} // namespace

std::vector<std::string> LabelSet::labels() const {
    std::vector<std::string> out;
    out.reserve(categories.size());
    for (const auto& c : categories) out.push_back(c.label);
    return out;
}

std::optional<std::size_t> LabelSet::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i].label == label) return i;
    }
    return std::nullopt;
}

void validate_label_set(const LabelSet& ls) {
    if (ls.name.empty()) throw ValidationError("label set name must be non-empty");
    if (ls.categories.size() < 2) {
        throw ValidationError("label set '" + ls.name + "': fewer than 2 categories");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ls.categories.size(); ++i) {
        const auto& c = ls.categories[i];
        const std::string ctx = category_context(c.label, i);
        if (!is_canonical_label(c.label)) {
            throw ValidationError("label not canonical ([a-z0-9_]+) in " + ctx);
        }
        if (!seen.insert(c.label).second) {
            throw ValidationError("duplicate label in " + ctx);
        }
        if (!std::isfinite(c.range.min_m) || !std::isfinite(c.range.max_m)) {
            throw ValidationError("non-finite range bound in " + ctx);
        }
        if (c.range.min_m <= 0.0) {
            throw ValidationError("non-positive min_m in " + ctx);
        }
        if (c.range.min_m > c.range.max_m) {
            throw ValidationError("min_m > max_m in " + ctx);
        }
    }
}

LabelSet parse_label_set(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed label-set file: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("label-set file must be a JSON object");
    if (!j.contains("name") || !j.at("name").is_string()) {
        throw ValidationError("label-set file: missing string field 'name'");
    }
    if (!j.contains("unit") || !j.at("unit").is_string() ||
        j.at("unit").get<std::string>() != "meters") {
        throw ValidationError("label-set file: field 'unit' must be \"meters\"");
    }
    if (!j.contains("categories") || !j.at("categories").is_array()) {
        throw ValidationError("label-set file: missing array field 'categories'");
    }

    LabelSet ls;
    ls.name = j.at("name").get<std::string>();
    std::size_t position = 0;
    for (const auto& cj : j.at("categories")) {
        if (!cj.is_object()) {
            throw ValidationError("category at position " + std::to_string(position) +
                                  " must be an object");
        }
        CategoryEntry entry;
        if (!cj.contains("label") || !cj.at("label").is_string()) {
            throw ValidationError("missing string field 'label' at position " +
                                  std::to_string(position));
        }
        entry.label = to_lower_ascii(trim_ascii(cj.at("label").get<std::string>()));
        const std::string ctx = category_context(entry.label, position);
        entry.range.min_m = require_number(cj, "min_m", ctx);
        entry.range.max_m = require_number(cj, "max_m", ctx);
        ls.categories.push_back(std::move(entry));
        ++position;
    }
    validate_label_set(ls);
    return ls;
}

std::string write_label_set(const LabelSet& ls) {
    ordered_json j;
    j["name"] = ls.name;
    j["unit"] = "meters";
    j["categories"] = ordered_json::array();
    for (const auto& c : ls.categories) {
        ordered_json cj;
        cj["label"] = c.label;
        cj["min_m"] = c.range.min_m;
        cj["max_m"] = c.range.max_m;
        j["categories"].push_back(std::move(cj));
    }
    return j.dump() + "\n";
}

std::vector<std::string> filter_by_size(const LabelSet& ls, double size_m) {
    std::vector<std::string> out;
    for (std::size_t idx : filter_indices_by_size(ls, size_m)) {
        out.push_back(ls.categories[idx].label);
    }
    return out;
}

std::vector<std::size_t> filter_indices_by_size(const LabelSet& ls, double size_m) {
    if (!(size_m > 0.0) || !std::isfinite(size_m)) {
        throw ValidationError("size_m must be positive and finite, got " + format_real(size_m));
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ls.categories.size(); ++i) {
        if (ls.categories[i].range.contains(size_m)) out.push_back(i);
    }
    return out;
}

BundledLabelSets bundled_label_sets() {
    BundledLabelSets b;
    b.rsize1.name = "rsize-1";
    b.rsize1.categories = {
        {"police_car", {4.0, 8.0}},
        {"police_car_model", {0.1, 1.0}},
        {"fire_truck", {5.0, 12.0}},
        {"fire_truck_model", {0.2, 1.0}},
        {"bullet_train", {30.0, 90.0}},
        {"bullet_train_model", {0.3, 2.0}},
    };
    b.rsize2.name = "rsize-2";
    b.rsize2.categories = {
        {"pedestrian", {1.0, 3.1}},
        {"car", {5.0, 8.0}},
        {"crosswalk", {10.0, 20.0}},
        {"pillow", {0.2, 3.0}},
        {"bed", {1.5, 3.5}},
    };
    return b;
}

} // namespace sizenet
