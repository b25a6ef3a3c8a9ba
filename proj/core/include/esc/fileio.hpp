#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "esc/arith.hpp"

namespace esc {

/// Writes through `fill` into a temporary next to `path`, then renames it
/// over `path`. Nothing is left behind if `fill` throws. Throws Io.
void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill);

std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

/// Strict decimal parse; Format error mentioning `context` otherwise.
u64 parse_u64(std::string_view text, const std::string& context);
std::vector<u64> parse_u64_list(std::string_view text, const std::string& context);
std::string join(const std::vector<u64>& values, char sep);

}  // namespace esc
