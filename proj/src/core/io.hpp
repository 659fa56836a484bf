#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace poetopics::io {

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;
std::string hex64(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over the target.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Splits on '\n', dropping one trailing '\r' per line. A final empty
/// segment after the last newline is not returned.
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Shortest decimal that round-trips; deterministic across platforms.
std::string format_double(double value);
/// Fixed number of digits after the decimal point.
std::string format_fixed(double value, int digits);

}  // namespace poetopics::io
