#include <algorithm>
#include <array>
#include <cctype>
#include <map>

#include "polmine/markup.hpp"
#include "polmine/scraper.hpp"
#include "polmine/text.hpp"

namespace polmine::scraper {
namespace {

using markup::Node;

std::string charset_of(std::string_view content_type) {
  std::string lower = text::to_lower(content_type);
  auto pos = lower.find("charset=");
  if (pos == std::string::npos) return {};
  std::string value = lower.substr(pos + 8);
  value = std::string(text::trim(value.substr(0, value.find(';'))));
  if (!value.empty() && (value.front() == '"' || value.front() == '\'')) value = value.substr(1, value.size() - 2);
  return value;
}

std::string meta_charset(std::string_view body) {
  std::string head = text::to_lower(body.substr(0, 4096));
  auto pos = head.find("charset=");
  if (pos == std::string::npos) return {};
  pos += 8;
  while (pos < head.size() && (head[pos] == '"' || head[pos] == '\'')) ++pos;
  std::size_t end = pos;
  while (end < head.size() && (std::isalnum(static_cast<unsigned char>(head[end])) || head[end] == '-' || head[end] == '_')) ++end;
  return head.substr(pos, end - pos);
}

std::string single_line(std::string_view s) {
  std::string joined(s);
  for (auto& c : joined) {
    if (c == '\n') c = ' ';
  }
  return text::collapse_whitespace(joined);
}

const Node* find_article_container(const Node& doc) {
  if (const Node* by_id = markup::find_first(doc, [](const Node& n) {
        const std::string* id = n.attribute("id");
        return id && *id == "article";
      })) {
    return by_id;
  }
  return markup::find_first(doc, [](const Node& n) { return n.name == "article"; });
}

// First descendant matching pred, not descending into nested comment blocks.
const Node* find_in_block(const Node& block, const markup::NodePredicate& pred,
                          const markup::NodePredicate& is_block) {
  for (const auto& c : block.children) {
    if (!c.is_element() || is_block(c)) continue;
    if (pred(c)) return &c;
    if (const Node* hit = find_in_block(c, pred, is_block)) return hit;
  }
  return nullptr;
}

struct Header {
  std::string author;
  std::optional<LocalMinute> posted_at;
  std::optional<int> star_rating;
  std::optional<int> vote_count;
};

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Counts filled and empty star glyphs; false if s holds anything else.
bool star_run(std::string_view s, int& filled) {
  static constexpr std::string_view kFilled = "\xE2\x98\x85";  // U+2605
  static constexpr std::string_view kEmpty = "\xE2\x98\x86";   // U+2606
  filled = 0;
  if (s.empty()) return false;
  while (!s.empty()) {
    if (s.starts_with(kFilled)) {
      ++filled;
      s.remove_prefix(kFilled.size());
    } else if (s.starts_with(kEmpty)) {
      s.remove_prefix(kEmpty.size());
    } else {
      return false;
    }
  }
  return true;
}

// Parses "<author> <day> <month> <HH:MM> [★☆☆] [(<n> votes)]" from the end.
std::optional<Header> parse_header(std::string_view line, int year, std::string& problem) {
  auto tokens = text::split(text::collapse_whitespace(line), ' ');
  if (tokens.size() == 1 && tokens[0].empty()) tokens.clear();
  Header h;

  if (tokens.size() >= 2 && (tokens.back() == "votes)" || tokens.back() == "vote)") &&
      tokens[tokens.size() - 2].starts_with("(") && all_digits(tokens[tokens.size() - 2].substr(1))) {
    h.vote_count = std::stoi(tokens[tokens.size() - 2].substr(1));
    tokens.resize(tokens.size() - 2);
  }
  int filled = 0;
  if (!tokens.empty() && star_run(tokens.back(), filled)) {
    h.star_rating = std::min(filled, 3);
    tokens.pop_back();
  }
  if (h.star_rating && !h.vote_count) {
    problem = "star rating without a vote count";
    return std::nullopt;
  }
  if (tokens.size() < 4) {
    problem = "header has too few fields";
    return std::nullopt;
  }
  const std::string& time = tokens[tokens.size() - 1];
  auto colon = time.find(':');
  if (colon == std::string::npos || !all_digits(time.substr(0, colon)) || time.size() - colon != 3 ||
      !all_digits(time.substr(colon + 1)) || colon > 2) {
    problem = "unrecognized time '" + time + "'";
    return std::nullopt;
  }
  int hour = std::stoi(time.substr(0, colon));
  int minute = std::stoi(time.substr(colon + 1));
  auto month = french_month(tokens[tokens.size() - 2]);
  if (!month) {
    problem = "unknown month '" + tokens[tokens.size() - 2] + "'";
    return std::nullopt;
  }
  const std::string& day_text = tokens[tokens.size() - 3];
  if (!all_digits(day_text) || day_text.size() > 2) {
    problem = "unrecognized day '" + day_text + "'";
    return std::nullopt;
  }
  Date date{std::chrono::year{year}, std::chrono::month{*month},
            std::chrono::day{static_cast<unsigned>(std::stoi(day_text))}};
  if (!date.ok() || hour > 23 || minute > 59) {
    problem = "invalid date or time";
    return std::nullopt;
  }
  tokens.resize(tokens.size() - 3);
  h.author = text::join(tokens, " ");
  h.posted_at = LocalMinute{date, hour, minute};
  return h;
}

}  // namespace

std::optional<unsigned> french_month(std::string_view name) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "janvier", "février", "mars",      "avril",   "mai",      "juin",
      "juillet", "août",    "septembre", "octobre", "novembre", "décembre"};
  // pages that lost their accents spell these three in plain ASCII
  static constexpr std::array<std::pair<std::string_view, unsigned>, 3> kUnaccented = {
      {{"fevrier", 2}, {"aout", 8}, {"decembre", 12}}};
  std::string key = text::to_lower(name);
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (key == kMonths[i]) return static_cast<unsigned>(i + 1);
  }
  for (auto [spelling, month] : kUnaccented) {
    if (key == spelling) return month;
  }
  return std::nullopt;
}

std::string decode_body(const RawPage& page) {
  std::string charset = charset_of(page.content_type);
  if (charset.empty()) charset = meta_charset(page.body);
  return text::to_utf8(page.body, charset);
}

ArticleContent extract_article(const RawPage& page) {
  Node doc = markup::parse_html(decode_body(page));
  const Node* found = find_article_container(doc);
  if (!found) throw ExtractionError("no article container in " + page.url);

  Node container = *found;
  markup::remove_elements(container, {"script", "style"});

  ArticleContent out;
  out.url = page.url;
  if (const Node* h1 = markup::find_first(container, [](const Node& n) { return n.name == "h1"; })) {
    out.title = single_line(markup::inner_text(*h1));
  }
  if (out.title.empty()) {
    if (const Node* t = markup::find_first(doc, [](const Node& n) { return n.name == "title"; })) {
      out.title = single_line(t->text_content());
    }
  }
  Node wrapper;
  wrapper.children.push_back(container);
  out.body_text = markup::inner_text(wrapper);
  out.body_html_sanitized = markup::to_html(container);
  return out;
}

CommentExtraction extract_comments(const RawPage& page, int collection_year, const CommentLayout& layout) {
  Node doc = markup::parse_html(decode_body(page));
  auto base = Url::parse(page.url);
  markup::NodePredicate is_block = [&](const Node& n) { return n.has_class(layout.block_class); };
  auto has = [](const std::string& cls) {
    return [cls](const Node& n) { return n.has_class(cls); };
  };

  CommentExtraction out;
  std::map<const Node*, std::string> author_of;
  auto blocks = markup::find_all_nested(doc, is_block);

  for (std::size_t index = 0; index < blocks.size(); ++index) {
    const Node& block = *blocks[index].node;
    auto where = "comment " + std::to_string(index + 1);
    CommentRecord rec;

    std::string block_text = markup::inner_text(block, is_block);
    auto block_lines = text::split(block_text, '\n');

    const Node* header_el = find_in_block(block, has(layout.header_class), is_block);
    std::string header_line = header_el ? single_line(markup::inner_text(*header_el))
                                        : (block_lines.empty() ? std::string() : block_lines.front());
    std::string problem;
    if (auto header = parse_header(header_line, collection_year, problem)) {
      rec.author = header->author;
      rec.posted_at = header->posted_at;
      rec.star_rating = header->star_rating;
      rec.vote_count = header->vote_count;
    } else {
      out.warnings.push_back(where + ": unparsed header '" + header_line + "': " + problem);
      if (const Node* a = find_in_block(block, has(layout.author_class), is_block)) {
        rec.author = single_line(markup::inner_text(*a));
      }
      if (rec.author.empty() && !header_line.empty()) rec.author = text::split(header_line, ' ').front();
      if (rec.author.empty()) rec.author = "anonyme";
    }

    const Node* permalink_el = find_in_block(
        block,
        [&](const Node& n) {
          if (n.name != "a" || !n.attribute("href")) return false;
          const std::string* rel = n.attribute("rel");
          return (rel && *rel == "bookmark") || single_line(markup::inner_text(n)) == layout.permalink_text;
        },
        is_block);
    if (permalink_el && base) {
      if (auto resolved = resolve_url(*base, *permalink_el->attribute("href"))) rec.permalink = resolved->to_string();
    }

    std::string body;
    if (const Node* body_el = find_in_block(block, has(layout.body_class), is_block)) {
      body = markup::inner_text(*body_el, is_block);
    } else {
      std::vector<std::string> kept;
      for (std::size_t i = 0; i < block_lines.size(); ++i) {
        const auto& line = block_lines[i];
        if (i == 0 && !header_el && line == header_line) continue;
        if (header_el && line == header_line) continue;
        if (line.find(layout.permalink_text) != std::string::npos && line.find("Répondre") != std::string::npos) continue;
        kept.push_back(line);
      }
      body = text::join(kept, "\n");
    }

    auto lines = text::split(body, '\n');
    if (!lines.empty() && lines.front().starts_with("@")) {
      std::string_view first = text::trim(std::string_view(lines.front()).substr(1));
      auto words = text::split(first, ' ');
      // a line holding only the mention may name a multi-word handle
      if (words.size() <= 3) {
        rec.reply_to_author = std::string(first);
        lines.erase(lines.begin());
      } else {
        rec.reply_to_author = words.front();
        lines.front() = std::string(text::trim(first.substr(words.front().size())));
      }
      if (rec.reply_to_author->empty()) rec.reply_to_author.reset();
    }
    rec.body_text = std::string(text::trim(text::join(lines, "\n")));
    if (!rec.reply_to_author && !blocks[index].matching_ancestors.empty()) {
      auto it = author_of.find(blocks[index].matching_ancestors.back());
      if (it != author_of.end()) rec.reply_to_author = it->second;
    }
    if (rec.body_text.empty()) out.warnings.push_back(where + ": empty body");

    if (rec.permalink) {
      rec.comment_id = *rec.permalink;
    } else if (const std::string* id = block.attribute("id"); id && !id->empty()) {
      rec.comment_id = page.url + "#" + *id;
    } else {
      rec.comment_id = page.url + "#comment-" + std::to_string(index + 1);
    }

    author_of[&block] = rec.author;
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::optional<std::string> next_page_link(const RawPage& page) {
  Node doc = markup::parse_html(decode_body(page));
  const Node* next = markup::find_first(doc, [](const Node& n) {
    const std::string* rel = n.attribute("rel");
    return (n.name == "a" || n.name == "link") && rel && text::to_lower(*rel) == "next" && n.attribute("href");
  });
  auto base = Url::parse(page.url);
  if (!next || !base) return std::nullopt;
  auto resolved = resolve_url(*base, *next->attribute("href"));
  if (!resolved) return std::nullopt;
  return resolved->to_string();
}

}  // namespace polmine::scraper
