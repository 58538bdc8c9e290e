#include "polmine/text.hpp"

#include <unicode/uchar.h>
#include <unicode/ucnv.h>
#include <unicode/utf8.h>

#include <memory>

#include "polmine/errors.hpp"

namespace polmine::text {
namespace {

bool is_space_cp(UChar32 c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
         c == 0xA0 || c == 0x202F || c == 0x2009 || c == 0x2007;
}

// Decodes the code point at s[i], advancing i. Malformed bytes yield -1.
UChar32 next_cp(std::string_view s, std::size_t& i) {
  UChar32 c;
  int32_t idx = static_cast<int32_t>(i);
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), idx, static_cast<int32_t>(s.size()), c);
  i = static_cast<std::size_t>(idx);
  return c;
}

}  // namespace

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
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

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    UChar32 c = next_cp(s, i);
    if (c < 0) {
      out.append(s.substr(start, i - start));
      continue;
    }
    append_utf8(out, static_cast<char32_t>(u_tolower(c)));
  }
  return out;
}

bool is_alnum(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  while (i < s.size()) {
    UChar32 c = next_cp(s, i);
    if (c < 0 || !u_isalnum(c)) return false;
  }
  return true;
}

std::vector<std::string> word_runs(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    UChar32 c = next_cp(s, i);
    if (c >= 0 && u_isalnum(c)) {
      current.append(s.substr(start, i - start));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    UChar32 c = next_cp(s, i);
    if (c >= 0 && is_space_cp(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(s.substr(start, i - start));
  }
  return out;
}

std::string truncate(std::string_view s, std::size_t max_code_points) {
  std::size_t i = 0;
  std::size_t n = 0;
  while (i < s.size() && n < max_code_points) {
    next_cp(s, i);
    ++n;
  }
  return std::string(s.substr(0, i));
}

bool iequals_ascii(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto lo = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; };
    if (lo(a[i]) != lo(b[i])) return false;
  }
  return true;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string to_utf8(std::string_view bytes, std::string_view charset) {
  if (charset.empty() || iequals_ascii(charset, "utf-8") || iequals_ascii(charset, "utf8")) {
    return std::string(bytes);
  }
  std::string name(charset);
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<UConverter, decltype(&ucnv_close)> conv(ucnv_open(name.c_str(), &status),
                                                         &ucnv_close);
  if (U_FAILURE(status)) throw ParseError("unsupported character encoding '" + name + "'");
  std::string out(bytes.size() * 4 + 4, '\0');
  UConverter* utf8 = ucnv_open("UTF-8", &status);
  std::unique_ptr<UConverter, decltype(&ucnv_close)> target(utf8, &ucnv_close);
  char* dst = out.data();
  const char* src = bytes.data();
  ucnv_convertEx(target.get(), conv.get(), &dst, out.data() + out.size(), &src,
                 bytes.data() + bytes.size(), nullptr, nullptr, nullptr, nullptr, true, true,
                 &status);
  if (U_FAILURE(status)) throw ParseError("cannot convert from '" + name + "' to UTF-8");
  out.resize(static_cast<std::size_t>(dst - out.data()));
  return out;
}

}  // namespace polmine::text
