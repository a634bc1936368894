#include "datasculpt/io.hpp"

#include <fstream>
#include <sstream>

#include "datasculpt/error.hpp"
#include "datasculpt/rng.hpp"

namespace datasculpt::io {

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + file.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& file, std::string_view bytes) {
  if (file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + file.parent_path().string());
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + file.string());
}

std::uint64_t file_checksum(const std::filesystem::path& file) {
  return fnv1a64(read_file(file));
}

}  // namespace datasculpt::io
