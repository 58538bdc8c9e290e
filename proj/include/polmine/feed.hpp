#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polmine/timeutil.hpp"

// Category feed addressing and RSS "backend" parsing.
namespace polmine::feed {

struct FeedSource {
  std::string base_url;
  int rubrique_id = 0;
  std::string category_label;

  // Throws ValidationError unless base_url is absolute with a host and
  // rubrique_id >= 1.
  void validate() const;
};

struct FeedItem {
  std::string title;
  std::string link;
  std::string guid;
  bool guid_is_permalink = false;
  std::optional<UtcTime> published_at;
  std::optional<std::string> author;
  std::string description;  // plain text
  std::string language;
  std::string category_label;
  std::optional<std::string> category_url;

  friend bool operator==(const FeedItem&, const FeedItem&) = default;
};

struct FeedParseResult {
  std::vector<FeedItem> items;
  std::vector<std::string> warnings;
};

// base_url + "/spip.php?page=backend&id_rubrique=<id>".
std::string build_feed_url(const FeedSource& source);

// One item per <item> element in document order. Items without a link or
// guid are skipped with a warning; an unrecognized date format leaves
// published_at empty with a warning. Malformed XML throws ParseError.
FeedParseResult parse_feed(std::string_view document, const FeedSource& source);

}  // namespace polmine::feed
