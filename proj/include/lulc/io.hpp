#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace lulc {

std::string read_text_file(const std::filesystem::path& path);

// Writes to `<path>.tmp` and renames over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Shortest round-trip decimal representation.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace lulc
