#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "common/errors.hpp"

namespace medrex {

// All file formats preserve key order, so serialization is byte-stable.
using json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temp file + rename so readers never see partial content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

json parse_json(std::string_view text, std::string_view what);

}  // namespace medrex
