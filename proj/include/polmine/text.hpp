#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers. Character classification and case mapping follow Unicode
// (ICU), so accented letters are ordinary letters and are never folded.
namespace polmine::text {

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Code-point lowercase. "Élysée" -> "élysée".
std::string to_lower(std::string_view s);

// True when every code point is a Unicode letter or digit and s is non-empty.
bool is_alnum(std::string_view s);

// Maximal runs of Unicode letters/digits, in order. Everything else separates.
std::vector<std::string> word_runs(std::string_view s);

// Collapses every run of whitespace (including U+00A0) into one ASCII space
// and trims both ends.
std::string collapse_whitespace(std::string_view s);

// At most max_code_points code points of s; never splits a sequence.
std::string truncate(std::string_view s, std::size_t max_code_points);

void append_utf8(std::string& out, char32_t cp);

// Converts bytes in the named charset to UTF-8. An empty charset or any
// spelling of UTF-8 returns the input unchanged.
std::string to_utf8(std::string_view bytes, std::string_view charset);

bool iequals_ascii(std::string_view a, std::string_view b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace polmine::text
