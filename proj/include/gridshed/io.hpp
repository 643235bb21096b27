#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gridshed/network.hpp"

namespace gridshed {

/// Whole file as text. Throws Error when it cannot be read.
std::string read_text_file(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file. Throws Error on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Loads a case from disk: `.m` files go through the MATPOWER importer (warnings
/// appended to `warnings` when given), anything else is read as the JSON case format.
Network load_case_file(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

}  // namespace gridshed
