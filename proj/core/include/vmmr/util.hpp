#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vmmr {

using Timestamp = std::chrono::sys_seconds;

std::string_view trim(std::string_view text) noexcept;
std::vector<std::string_view> split(std::string_view text, char delimiter);
std::string to_lower_ascii(std::string_view text);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);
// Fixed-point with the given number of decimals ("0.3700").
std::string format_fixed(double value, int decimals);
std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<std::uint64_t> parse_uint(std::string_view text) noexcept;

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

std::string base64_encode(std::span<const unsigned char> bytes);

// Longest prefix of at most max_bytes that does not split a UTF-8 sequence.
std::string_view utf8_prefix(std::string_view text, std::size_t max_bytes) noexcept;

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_rfc3339(Timestamp ts);
std::optional<Timestamp> parse_rfc3339(std::string_view text);
// Current time, or SOURCE_DATE_EPOCH when that variable is set.
Timestamp now_utc();

// Throws Error(kIoError).
std::string read_text_file(const std::filesystem::path& path);
// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace vmmr
