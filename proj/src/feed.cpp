#include "polmine/feed.hpp"

#include "polmine/errors.hpp"
#include "polmine/markup.hpp"
#include "polmine/text.hpp"
#include "polmine/url.hpp"

namespace polmine::feed {
namespace {

using markup::Node;

std::string child_text(const Node& item, std::string_view local) {
  const Node* c = item.child(local);
  return c ? std::string(text::trim(c->text_content())) : std::string();
}

// Feed text fields are HTML carried inside XML: decode a second level of
// entities and drop markup.
std::string plain(std::string_view html) { return markup::html_to_text(html); }

std::optional<std::string> directory_link(std::string_view description_html) {
  markup::Node doc = markup::parse_html(description_html);
  const Node* a = markup::find_first(doc, [](const Node& n) {
    const std::string* rel = n.attribute("rel");
    return n.name == "a" && rel && *rel == "directory" && n.attribute("href");
  });
  if (!a) return std::nullopt;
  return *a->attribute("href");
}

}  // namespace

void FeedSource::validate() const {
  auto url = Url::parse(base_url);
  if (!url) throw ValidationError("feed source base_url is not an absolute URL: '" + base_url + "'");
  if (rubrique_id < 1) {
    throw ValidationError("feed source rubrique_id must be >= 1, got " + std::to_string(rubrique_id));
  }
}

std::string build_feed_url(const FeedSource& source) {
  source.validate();
  Url url = *Url::parse(source.base_url);
  std::string path = url.path;
  if (path.empty() || path.back() != '/') path += '/';
  url.path = path + "spip.php";
  url.query = "page=backend&id_rubrique=" + std::to_string(source.rubrique_id);
  url.fragment.clear();
  return url.to_string();
}

FeedParseResult parse_feed(std::string_view document, const FeedSource& source) {
  Node root = markup::parse_xml_bytes(document);
  FeedParseResult result;

  std::string channel_language;
  if (const Node* channel = root.child("channel")) channel_language = child_text(*channel, "language");

  auto items = markup::find_all(root, [](const Node& n) { return n.local_name() == "item"; });
  for (std::size_t index = 0; index < items.size(); ++index) {
    const Node& el = *items[index];
    auto where = "item " + std::to_string(index) + " (byte " + std::to_string(el.offset) + ")";

    FeedItem item;
    item.category_label = source.category_label;
    item.link = child_text(el, "link");
    if (const Node* g = el.child("guid")) {
      item.guid = std::string(text::trim(g->text_content()));
      if (const std::string* perma = g->attribute("isPermaLink")) {
        item.guid_is_permalink = text::iequals_ascii(text::trim(*perma), "true");
      }
    } else if (const std::string* about = el.attribute("rdf:about")) {
      item.guid = *about;
    }
    if (item.link.empty()) {
      result.warnings.push_back(where + ": missing link, skipped");
      continue;
    }
    if (!is_absolute_url(item.link)) {
      result.warnings.push_back(where + ": link is not absolute, skipped");
      continue;
    }
    if (item.guid.empty()) {
      result.warnings.push_back(where + ": missing guid, skipped");
      continue;
    }

    item.title = plain(child_text(el, "title"));
    std::string date = child_text(el, "date");
    if (date.empty()) date = child_text(el, "pubDate");
    if (!date.empty()) {
      item.published_at = parse_iso_utc(date);
      if (!item.published_at) result.warnings.push_back(where + ": unrecognized date '" + date + "'");
    }
    std::string author = child_text(el, "creator");
    if (author.empty()) author = child_text(el, "author");
    if (!author.empty()) item.author = plain(author);

    std::string description = child_text(el, "description");
    item.description = plain(description);
    item.category_url = directory_link(description);

    if (const std::string* lang = el.attribute("xml:lang")) item.language = *lang;
    if (item.language.empty()) item.language = child_text(el, "language");
    if (item.language.empty()) item.language = channel_language;

    result.items.push_back(std::move(item));
  }
  return result;
}

}  // namespace polmine::feed
