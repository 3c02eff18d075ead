#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace medrex {

// ASCII-whitespace trim. Multi-byte UTF-8 is untouched.
std::string_view trim(std::string_view s);

// Lowercases ASCII letters and collapses internal whitespace runs to a single
// space; leading/trailing whitespace removed. Used for alias matching.
std::string fold_name(std::string_view s);

// Collapses runs of Unicode whitespace to one ASCII space and trims the ends.
std::string collapse_whitespace(std::string_view utf8);

// Canonical composition (NFC) of a UTF-8 string. Invalid UTF-8 is returned
// unchanged.
std::string nfc(std::string_view utf8);

// True when the two strings are equal after removing every Unicode
// punctuation and whitespace code point.
bool equal_ignoring_punctuation(std::string_view a, std::string_view b);

std::vector<std::string> split(std::string_view s, char sep);

bool starts_with(std::string_view s, std::string_view prefix);

std::string replace_all(std::string text, std::string_view from, std::string_view to);

std::string to_base64(const std::vector<std::uint8_t>& data);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_hex(const std::vector<std::uint8_t>& data);

}  // namespace medrex
