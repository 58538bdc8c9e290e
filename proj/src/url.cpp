#include "polmine/url.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "polmine/text.hpp"

namespace polmine {
namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int default_port(std::string_view scheme) {
  if (scheme == "http") return 80;
  if (scheme == "https") return 443;
  return 0;
}

// Removes "." and ".." segments.
std::string normalize_path(std::string_view path) {
  std::vector<std::string> out;
  auto segments = text::split(path, '/');
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    bool last = i + 1 == segments.size();
    if (seg == ".") {
      if (last) out.emplace_back();
    } else if (seg == "..") {
      if (out.size() > 1) out.pop_back();
      if (last) out.emplace_back();
    } else {
      out.push_back(seg);
    }
  }
  std::string joined = text::join(out, "/");
  if (joined.empty() || joined.front() != '/') joined.insert(joined.begin(), '/');
  return joined;
}

}  // namespace

std::string Url::origin() const {
  std::string out = scheme + "://" + host;
  if (port != 0 && port != default_port(scheme)) out += ":" + std::to_string(port);
  return out;
}

std::string Url::to_string() const {
  std::string out = origin() + path;
  if (!query.empty()) out += "?" + query;
  if (!fragment.empty()) out += "#" + fragment;
  return out;
}

std::optional<Url> Url::parse(std::string_view s) {
  s = text::trim(s);
  auto colon = s.find("://");
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  Url url;
  url.scheme = lower_ascii(s.substr(0, colon));
  if (!std::all_of(url.scheme.begin(), url.scheme.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
      })) {
    return std::nullopt;
  }
  std::string_view rest = s.substr(colon + 3);
  auto authority_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, authority_end);
  rest = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  std::string_view host = authority;
  if (auto pc = authority.rfind(':'); pc != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    host = authority.substr(0, pc);
    auto port_text = authority.substr(pc + 1);
    if (!port_text.empty()) {
      if (!std::all_of(port_text.begin(), port_text.end(), [](unsigned char c) { return std::isdigit(c); }) ||
          port_text.size() > 5) {
        return std::nullopt;
      }
      url.port = std::stoi(std::string(port_text));
      if (url.port <= 0 || url.port > 65535) return std::nullopt;
    }
  }
  if (host.empty()) return std::nullopt;
  for (unsigned char c : host) {
    if (std::isspace(c) || c == '<' || c == '>' || c == '"') return std::nullopt;
  }
  url.host = lower_ascii(host);

  if (auto hash = rest.find('#'); hash != std::string_view::npos) {
    url.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (auto q = rest.find('?'); q != std::string_view::npos) {
    url.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  url.path = rest.empty() ? "/" : std::string(rest);
  for (unsigned char c : url.path) {
    if (std::isspace(c)) return std::nullopt;
  }
  return url;
}

bool is_absolute_url(std::string_view text) { return Url::parse(text).has_value(); }

std::optional<Url> resolve_url(const Url& base, std::string_view ref) {
  ref = text::trim(ref);
  if (auto abs = Url::parse(ref)) return abs;
  if (ref.starts_with("//")) return Url::parse(base.scheme + ":" + std::string(ref));
  Url out = base;
  out.fragment.clear();
  std::string_view r = ref;
  std::string fragment;
  if (auto hash = r.find('#'); hash != std::string_view::npos) {
    fragment = std::string(r.substr(hash + 1));
    r = r.substr(0, hash);
  }
  std::string query;
  bool has_query = false;
  if (auto q = r.find('?'); q != std::string_view::npos) {
    query = std::string(r.substr(q + 1));
    has_query = true;
    r = r.substr(0, q);
  }
  if (r.empty()) {
    if (has_query) out.query = query;
  } else if (r.front() == '/') {
    out.path = normalize_path(r);
    out.query = query;
  } else {
    auto dir = base.path.substr(0, base.path.rfind('/') + 1);
    out.path = normalize_path(dir + std::string(r));
    out.query = query;
  }
  out.fragment = fragment;
  return out;
}

}  // namespace polmine
