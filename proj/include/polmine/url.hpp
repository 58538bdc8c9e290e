#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace polmine {

// Absolute http(s)-style URL split into components. Only what the pipeline
// needs: no percent-decoding, no IDNA.
struct Url {
  std::string scheme;  // lowercase
  std::string host;    // lowercase
  int port = 0;        // 0 = scheme default
  std::string path;    // starts with '/'
  std::string query;   // without '?'
  std::string fragment;

  // scheme://host[:port]; identifies a politeness domain.
  std::string origin() const;
  std::string to_string() const;

  static std::optional<Url> parse(std::string_view text);
};

// Resolves ref against base (RFC 3986 reference resolution, simplified).
std::optional<Url> resolve_url(const Url& base, std::string_view ref);

bool is_absolute_url(std::string_view text);

}  // namespace polmine
