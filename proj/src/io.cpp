#include "gridshed/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace gridshed {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::path tmp = dir / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error("cannot write " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at " + path.string());
  }
}

Network load_case_file(const fs::path& path, std::vector<std::string>* warnings) {
  const auto text = read_text_file(path);
  if (path.extension() == ".m") {
    auto imported = parse_matpower_subset(text);
    if (warnings) warnings->insert(warnings->end(), imported.warnings.begin(), imported.warnings.end());
    return std::move(imported.network);
  }
  return parse_case(text);
}

}  // namespace gridshed
