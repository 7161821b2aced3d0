#ifndef SIZENET_DATASET_IO_HPP
#define SIZENET_DATASET_IO_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sizenet/error.hpp"
#include "sizenet/label_set.hpp"

namespace sizenet {

struct ManifestRow {
    std::string image_id;
    std::string true_label;
    std::optional<double> size_m; // absent for uncalibrated (training) images
};

struct Manifest {
    std::string label_set_name;
    std::vector<ManifestRow> rows;
};

/// Every true_label must exist in ls; throws naming the offending row.
void validate_manifest_labels(const Manifest& m, const LabelSet& ls);

struct FeatureTable {
    std::size_t dim = 0;
    std::vector<std::string> image_ids;
    std::vector<std::vector<double>> rows; // rows[i] has exactly dim entries
};

/// id -> position map; throws on duplicate ids ('what' names the dup).
std::unordered_map<std::string, std::size_t> index_by_id(const std::vector<std::string>& ids,
                                                         std::string_view what);

// ---------------------------------------------------------------------------
// Filename-encoded shooting distance.
//
// Grammar: <stem>_<token>.<ext> where <ext> in {jpg, jpeg, png} matched
// case-insensitively, the underscore is the LAST one in the stem, and
// <token> is [0-9]+('.'[0-9]+)? with value > 0.
// ---------------------------------------------------------------------------

enum class NameErrorKind {
    NoExtension, // suffix not one of .jpg/.jpeg/.png
    NoUnderscore,
    BadToken, // non-numeric, malformed, or non-positive
};

class NameFormatError : public ValidationError {
public:
    NameFormatError(NameErrorKind kind, const std::string& message)
        : ValidationError(message), kind_(kind) {}
    NameErrorKind kind() const { return kind_; }

private:
    NameErrorKind kind_;
};

struct ParsedName {
    double meters = 0.0;
    std::string token; // the literal digits as written in the filename
};

/// Throws NameFormatError with a distinct kind per failure mode.
ParsedName parse_distance_from_name(std::string_view filename);

// ---------------------------------------------------------------------------
// Directory scanning: root holds one subdirectory per category label;
// image files inside encode the shooting distance in their names.
// ---------------------------------------------------------------------------

enum class ScanMode {
    Test,  // every image must carry a parseable distance (fail-fast)
    Train, // missing/unparseable distance tokens record size as absent
};

struct ScanResult {
    Manifest manifest; // rows sorted by (true_label, image_id)
    std::vector<std::string> warnings;
};

ScanResult scan_directory(const std::filesystem::path& root, const LabelSet& ls,
                          ScanMode mode = ScanMode::Test);

// ---------------------------------------------------------------------------
// Manifest CSV: header image_id,true_label,size_m; LF endings; absent size
// encoded as an empty field. Round-trips byte-identically once canonical.
// ---------------------------------------------------------------------------

Manifest read_manifest(std::string_view text);
std::string write_manifest(const Manifest& m);

// ---------------------------------------------------------------------------
// Feature CSV: header image_id,f0,...,f{d-1}; d inferred from the header.
// ---------------------------------------------------------------------------

FeatureTable read_features(std::string_view text);
std::string write_features(const FeatureTable& t);

} // namespace sizenet

#endif
