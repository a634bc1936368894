#pragma once

#include <filesystem>
#include <string>
#include <cstdint>
#include <string_view>

namespace datasculpt::io {

// Whole-file helpers; failures throw IoError naming the path.
std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view bytes);
std::uint64_t file_checksum(const std::filesystem::path& file);

}  // namespace datasculpt::io
