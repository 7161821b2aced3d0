#ifndef SIZENET_TEXT_HPP
#define SIZENET_TEXT_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sizenet {

/// Shortest decimal form that round-trips through a double (std::to_chars).
/// All CSV emitters use this so reruns are byte-identical.
std::string format_real(double value);

/// Strict double parse: the whole token must be consumed, no leading '+',
/// no hex/inf/nan spellings. Returns nullopt on any violation.
std::optional<double> parse_real(std::string_view token);

std::vector<std::string> split_csv_line(std::string_view line);
std::string join_csv(const std::vector<std::string>& fields);

/// Splits on '\n', tolerating one trailing newline. '\r' anywhere is an
/// error reported by the caller-facing parsers (all files are LF).
std::vector<std::string_view> split_lines(std::string_view text);

std::string to_lower_ascii(std::string_view s);
std::string trim_ascii(std::string_view s);

/// [a-z0-9_]+ check applied to canonicalized labels.
bool is_canonical_label(std::string_view s);

/// True when the field is safe inside our CSV files (no comma, pipe,
/// control characters) and non-empty. Used for ids and labels.
bool is_plain_field(std::string_view s);

} // namespace sizenet

#endif
