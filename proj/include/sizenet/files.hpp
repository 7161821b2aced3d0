#ifndef SIZENET_FILES_HPP
#define SIZENET_FILES_HPP

#include <filesystem>
#include <string>

namespace sizenet {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames over the target, so a failed
/// run never leaves a half-written output behind.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

/// Refuses to clobber an existing file unless force is set.
void require_writable_file(const std::filesystem::path& path, bool force);

/// Creates the directory if needed; refuses a non-empty one unless force.
void require_writable_dir(const std::filesystem::path& dir, bool force);

} // namespace sizenet

#endif
