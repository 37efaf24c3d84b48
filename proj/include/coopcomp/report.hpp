#pragma once
// Output plumbing for the command-line tool: CSV provenance lines and
// crash-safe file writes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace coopcomp {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// "# coopcomp <version> seed=<seed> config_hash=<16 hex digits>[ <note>]\n"
std::string csv_comment_header(std::uint64_t seed, std::uint64_t config_hash, std::string_view note = {});

/// Writes to a sibling temporary file, then renames it over `path`, so a
/// reader never sees a half-written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace coopcomp
