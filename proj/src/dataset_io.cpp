#include "sizenet/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "sizenet/text.hpp"

namespace fs = std::filesystem;

namespace sizenet {

namespace {

constexpr std::array<std::string_view, 3> kImageExtensions = {".jpg", ".jpeg", ".png"};

// Returns the stem (filename minus extension) when the extension is one of
// the recognized image formats, case-insensitively.
std::optional<std::string_view> strip_image_extension(std::string_view filename) {
    for (std::string_view ext : kImageExtensions) {
        if (filename.size() <= ext.size()) continue;
        std::string_view tail = filename.substr(filename.size() - ext.size());
        if (to_lower_ascii(tail) == ext) return filename.substr(0, filename.size() - ext.size());
    }
    return std::nullopt;
}

bool is_distance_token(std::string_view token) {
    // [0-9]+('.'[0-9]+)?
    std::size_t dot = token.find('.');
    std::string_view whole = dot == std::string_view::npos ? token : token.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{}
                                                          : token.substr(dot + 1);
    auto all_digits = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
            return c >= '0' && c <= '9';
        });
    };
    if (!all_digits(whole)) return false;
    if (dot != std::string_view::npos && !all_digits(frac)) return false;
    return true;
}

void check_csv_no_cr(std::string_view text, std::string_view what) {
    if (text.find('\r') != std::string_view::npos) {
        throw ValidationError(std::string(what) + ": CR found, files must use LF line endings");
    }
}

} // namespace

void validate_manifest_labels(const Manifest& m, const LabelSet& ls) {
    for (const auto& row : m.rows) {
        if (!ls.index_of(row.true_label)) {
            throw ValidationError("manifest row '" + row.image_id + "': label '" +
                                  row.true_label + "' not in label set '" + ls.name + "'");
        }
    }
}

std::unordered_map<std::string, std::size_t> index_by_id(const std::vector<std::string>& ids,
                                                         std::string_view what) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!index.emplace(ids[i], i).second) {
            throw ValidationError(std::string(what) + ": duplicate image_id '" + ids[i] + "'");
        }
    }
    return index;
}

ParsedName parse_distance_from_name(std::string_view filename) {
    if (filename.empty()) throw ValidationError("empty filename");
    auto stem = strip_image_extension(filename);
    if (!stem) {
        throw NameFormatError(NameErrorKind::NoExtension,
                              "no recognized image extension (.jpg/.jpeg/.png): '" +
                                  std::string(filename) + "'");
    }
    std::size_t underscore = stem->rfind('_');
    if (underscore == std::string_view::npos) {
        throw NameFormatError(NameErrorKind::NoUnderscore,
                              "no underscore before the size token: '" + std::string(filename) +
                                  "'");
    }
    std::string token(stem->substr(underscore + 1));
    if (!is_distance_token(token)) {
        throw NameFormatError(NameErrorKind::BadToken,
                              "size token '" + token + "' is not a decimal number: '" +
                                  std::string(filename) + "'");
    }
    auto value = parse_real(token);
    if (!value || !(*value > 0.0)) {
        throw NameFormatError(NameErrorKind::BadToken,
                              "size token '" + token + "' must be > 0: '" +
                                  std::string(filename) + "'");
    }
    return {*value, std::move(token)};
}

ScanResult scan_directory(const fs::path& root, const LabelSet& ls, ScanMode mode) {
    if (!fs::exists(root) || !fs::is_directory(root)) {
        throw ValidationError("dataset root is not a directory: " + root.string());
    }

    std::vector<std::string> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue; // loose files at the root are ignored
        std::string name = entry.path().filename().string();
        if (!ls.index_of(name)) {
            throw ValidationError("subdirectory '" + name + "' is not a label in label set '" +
                                  ls.name + "'");
        }
        class_dirs.push_back(std::move(name));
    }
    std::sort(class_dirs.begin(), class_dirs.end());

    ScanResult result;
    result.manifest.label_set_name = ls.name;
    for (const std::string& label : class_dirs) {
        std::size_t before = result.manifest.rows.size();
        for (const auto& entry : fs::directory_iterator(root / label)) {
            if (!entry.is_regular_file()) continue;
            std::string filename = entry.path().filename().string();
            auto stem = strip_image_extension(filename);
            if (!stem) continue; // not an image file
            ManifestRow row;
            row.image_id = std::string(*stem);
            row.true_label = label;
            try {
                row.size_m = parse_distance_from_name(filename).meters;
            } catch (const NameFormatError&) {
                if (mode == ScanMode::Test) {
                    throw ValidationError("cannot parse shooting distance from '" +
                                          (root / label / filename).string() + "'");
                }
                row.size_m = std::nullopt; // train images need not be calibrated
            }
            result.manifest.rows.push_back(std::move(row));
        }
        if (result.manifest.rows.size() == before) {
            result.warnings.push_back("class directory '" + label + "' contains no images");
        }
    }

    std::sort(result.manifest.rows.begin(), result.manifest.rows.end(),
              [](const ManifestRow& a, const ManifestRow& b) {
                  if (a.true_label != b.true_label) return a.true_label < b.true_label;
                  return a.image_id < b.image_id;
              });

    std::vector<std::string> ids;
    ids.reserve(result.manifest.rows.size());
    for (const auto& r : result.manifest.rows) ids.push_back(r.image_id);
    index_by_id(ids, "scan of " + root.string());

    return result;
}

Manifest read_manifest(std::string_view text) {
    check_csv_no_cr(text, "manifest");
    auto lines = split_lines(text);
    if (lines.empty()) throw ValidationError("manifest: empty file");
    if (lines[0] != "image_id,true_label,size_m") {
        throw ValidationError("manifest: header must be 'image_id,true_label,size_m', got '" +
                              std::string(lines[0]) + "'");
    }
    Manifest m;
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != 3) {
            throw ValidationError("manifest row " + std::to_string(i) + ": expected 3 fields, got " +
                                  std::to_string(fields.size()));
        }
        ManifestRow row;
        row.image_id = fields[0];
        row.true_label = fields[1];
        if (!is_plain_field(row.image_id)) {
            throw ValidationError("manifest row " + std::to_string(i) + ": bad image_id");
        }
        if (!is_plain_field(row.true_label)) {
            throw ValidationError("manifest row " + std::to_string(i) + ": bad true_label");
        }
        if (!seen.emplace(row.image_id, i).second) {
            throw ValidationError("manifest: duplicate image_id '" + row.image_id + "'");
        }
        if (!fields[2].empty()) {
            auto v = parse_real(fields[2]);
            if (!v || !(*v > 0.0) || !std::isfinite(*v)) {
                throw ValidationError("manifest row '" + row.image_id +
                                      "': size_m must be a positive finite number, got '" +
                                      fields[2] + "'");
            }
            row.size_m = *v;
        }
        m.rows.push_back(std::move(row));
    }
    return m;
}

std::string write_manifest(const Manifest& m) {
    std::string out = "image_id,true_label,size_m\n";
    for (const auto& row : m.rows) {
        out += row.image_id;
        out += ',';
        out += row.true_label;
        out += ',';
        if (row.size_m) out += format_real(*row.size_m);
        out += '\n';
    }
    return out;
}

FeatureTable read_features(std::string_view text) {
    check_csv_no_cr(text, "feature file");
    auto lines = split_lines(text);
    if (lines.empty()) throw ValidationError("feature file: empty file");
    auto header = split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "image_id") {
        throw ValidationError("feature file: header must be image_id,f0,...,f{d-1}");
    }
    FeatureTable t;
    t.dim = header.size() - 1;
    for (std::size_t c = 0; c < t.dim; ++c) {
        if (header[c + 1] != "f" + std::to_string(c)) {
            throw ValidationError("feature file: header column " + std::to_string(c + 1) +
                                  " must be 'f" + std::to_string(c) + "', got '" + header[c + 1] +
                                  "'");
        }
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != t.dim + 1) {
            throw ValidationError("feature file row " + std::to_string(i) + ": expected " +
                                  std::to_string(t.dim + 1) + " fields, got " +
                                  std::to_string(fields.size()));
        }
        if (!is_plain_field(fields[0])) {
            throw ValidationError("feature file row " + std::to_string(i) + ": bad image_id");
        }
        std::vector<double> row(t.dim);
        for (std::size_t c = 0; c < t.dim; ++c) {
            auto v = parse_real(fields[c + 1]);
            if (!v) {
                throw ValidationError("feature file row " + std::to_string(i) + ", column f" +
                                      std::to_string(c) + ": not a finite number: '" +
                                      fields[c + 1] + "'");
            }
            row[c] = *v;
        }
        t.image_ids.push_back(fields[0]);
        t.rows.push_back(std::move(row));
    }
    index_by_id(t.image_ids, "feature file");
    return t;
}

std::string write_features(const FeatureTable& t) {
    std::string out = "image_id";
    for (std::size_t c = 0; c < t.dim; ++c) {
        out += ",f";
        out += std::to_string(c);
    }
    out += '\n';
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        out += t.image_ids[i];
        for (double v : t.rows[i]) {
            out += ',';
            out += format_real(v);
        }
        out += '\n';
    }
    return out;
}

} // namespace sizenet
