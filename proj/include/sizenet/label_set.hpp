#ifndef SIZENET_LABEL_SET_HPP
#define SIZENET_LABEL_SET_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sizenet {

/// Closed admissible interval for a category's real size, in meters of
/// shooting distance. Boundaries are inclusive.
struct SizeRange {
    double min_m = 0.0;
    double max_m = 0.0;

    bool contains(double size_m) const { return size_m >= min_m && size_m <= max_m; }
    bool overlaps(const SizeRange& other) const {
        return min_m <= other.max_m && other.min_m <= max_m;
    }
};

struct CategoryEntry {
    std::string label; // canonical: [a-z0-9_]+
    SizeRange range;
};

/// Ordered, immutable-after-construction category registry. Category order
/// is significant: it breaks probability ties and fixes matrix axes.
struct LabelSet {
    std::string name;
    std::vector<CategoryEntry> categories;
    // unit is always "meters"; kept implicit in the type, explicit in files.

    std::size_t size() const { return categories.size(); }
    const std::string& label(std::size_t i) const { return categories[i].label; }
    std::vector<std::string> labels() const;
    std::optional<std::size_t> index_of(std::string_view label) const;
};

/// Validates every invariant (>=2 categories, distinct canonical labels,
/// 0 < min <= max, finite bounds). Errors carry the category name/position.
void validate_label_set(const LabelSet& ls);

/// Parses the JSON label-set format:
///   {"name":"rsize-1","unit":"meters","categories":[
///     {"label":"police_car","min_m":4.0,"max_m":8.0}, ...]}
/// Labels are canonicalized (trimmed, lowercased) before validation.
LabelSet parse_label_set(std::string_view text);

/// Canonical serialization; parse(write(ls)) round-trips byte-identically.
std::string write_label_set(const LabelSet& ls);

/// Labels whose range covers size_m, in LabelSet order. May be empty.
std::vector<std::string> filter_by_size(const LabelSet& ls, double size_m);

/// Index form of filter_by_size; the gate kernels run on this.
std::vector<std::size_t> filter_indices_by_size(const LabelSet& ls, double size_m);

/// The two bundled registries ("rsize-1": six object/model categories,
/// "rsize-2": five street/household categories) used by tests and demos.
struct BundledLabelSets {
    LabelSet rsize1;
    LabelSet rsize2;
};
BundledLabelSets bundled_label_sets();

} // namespace sizenet

#endif
