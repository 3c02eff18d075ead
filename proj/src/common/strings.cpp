#include "common/strings.hpp"

#include <openssl/sha.h>
#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <array>
#include <cctype>

namespace medrex {

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Decodes one UTF-8 code point at `i`; advances `i` past it. Returns the code
// point or the raw byte on malformed input.
char32_t next_codepoint(std::string_view s, size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  size_t len = 1;
  char32_t cp = b0;
  if (b0 >= 0xF0)
    len = 4, cp = b0 & 0x07;
  else if (b0 >= 0xE0)
    len = 3, cp = b0 & 0x0F;
  else if (b0 >= 0xC0)
    len = 2, cp = b0 & 0x1F;
  if (len > 1) {
    if (i + len > s.size()) {
      ++i;
      return b0;
    }
    for (size_t k = 1; k < len; ++k) {
      unsigned char bk = static_cast<unsigned char>(s[i + k]);
      if ((bk & 0xC0) != 0x80) {
        ++i;
        return b0;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
  }
  i += len;
  return cp;
}

void append_codepoint(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_uws(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

}  // namespace

std::string_view trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string fold_name(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  size_t i = 0;
  while (i < s.size()) {
    size_t start = i;
    char32_t cp = next_codepoint(s, i);
    if (is_uws(cp)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (cp < 0x80) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[start]))));
    } else {
      out.append(s.substr(start, i - start));
    }
  }
  return out;
}

std::string collapse_whitespace(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  size_t i = 0;
  while (i < utf8.size()) {
    size_t start = i;
    char32_t cp = next_codepoint(utf8, i);
    if (is_uws(cp)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(utf8.substr(start, i - start));
  }
  return out;
}

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&status);
  if (U_FAILURE(status)) return std::string(utf8);

  std::u16string u16(utf8.size() + 1, u'\0');
  int32_t u16len = 0;
  status = U_ZERO_ERROR;
  u_strFromUTF8(u16.data(), static_cast<int32_t>(u16.size()), &u16len, utf8.data(),
                static_cast<int32_t>(utf8.size()), &status);
  if (U_FAILURE(status)) return std::string(utf8);
  u16.resize(static_cast<size_t>(u16len));

  std::u16string normed(u16.size() * 2 + 16, u'\0');
  status = U_ZERO_ERROR;
  int32_t nlen = unorm2_normalize(norm, u16.data(), u16len, normed.data(),
                                  static_cast<int32_t>(normed.size()), &status);
  if (U_FAILURE(status)) return std::string(utf8);
  normed.resize(static_cast<size_t>(nlen));

  std::string out(normed.size() * 4 + 1, '\0');
  int32_t outlen = 0;
  status = U_ZERO_ERROR;
  u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &outlen, normed.data(), nlen, &status);
  if (U_FAILURE(status)) return std::string(utf8);
  out.resize(static_cast<size_t>(outlen));
  return out;
}

bool equal_ignoring_punctuation(std::string_view a, std::string_view b) {
  auto strip = [](std::string_view s) {
    std::string out;
    size_t i = 0;
    while (i < s.size()) {
      size_t start = i;
      char32_t cp = next_codepoint(s, i);
      if (is_uws(cp) || u_ispunct(static_cast<UChar32>(cp))) continue;
      out.append(s.substr(start, i - start));
    }
    return out;
  };
  return strip(a) == strip(b);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.emplace_back(s.substr(pos));
      break;
    }
    parts.emplace_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  if (from.empty()) return text;
  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (true) {
    size_t hit = text.find(from, pos);
    if (hit == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  return out;
}

std::string to_base64(const std::vector<std::uint8_t>& data) {
  static const char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 2 < data.size()) {
    uint32_t n = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back(alphabet[n & 63]);
    i += 3;
  }
  if (i + 1 == data.size()) {
    uint32_t n = data[i] << 16;
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.append("==");
  } else if (i + 2 == data.size()) {
    uint32_t n = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

namespace {
std::string sha256_hex_impl(const unsigned char* data, size_t len) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(data, len, digest.data());
  static const char hexd[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (unsigned char b : digest) {
    out.push_back(hexd[b >> 4]);
    out.push_back(hexd[b & 15]);
  }
  return out;
}
}  // namespace

std::string sha256_hex(std::string_view data) {
  return sha256_hex_impl(reinterpret_cast<const unsigned char*>(data.data()), data.size());
}

std::string sha256_hex(const std::vector<std::uint8_t>& data) {
  return sha256_hex_impl(data.data(), data.size());
}

}  // namespace medrex
