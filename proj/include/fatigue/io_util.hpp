#pragma once

#include <cstdint>
#include <string>

namespace fatigue {

/// FNV-1a 64-bit hash of a byte range.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

/// Lower-case, zero-padded 16-digit hex.
std::string to_hex(std::uint64_t v);

/// Reads a whole file; throws DataError if it cannot be opened.
std::string read_file(const std::string& path);

/// Writes a whole file; throws DataError on failure. Creates parent dirs.
void write_file(const std::string& path, const std::string& content);

/// Content hash of a file: "fnv1a64:" + 16 hex digits.
std::string file_content_hash(const std::string& path);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

} // namespace fatigue
