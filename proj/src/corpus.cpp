#include "polmine/corpus.hpp"

#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "polmine/errors.hpp"
#include "polmine/markup.hpp"
#include "polmine/text.hpp"

namespace polmine::corpus {
namespace {

// Replaces malformed UTF-8 with U+FFFD and drops code points XML 1.0 cannot
// carry.
std::string xml_safe(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  int32_t i = 0;
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, n, c);
    if (c < 0) {
      text::append_utf8(out, 0xFFFD);
    } else if ((c < 0x20 && c != '\t' && c != '\n' && c != '\r') || c == 0xFFFE || c == 0xFFFF) {
      continue;
    } else {
      out.append(s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
    }
  }
  return out;
}

std::string text_el(std::string_view name, std::string_view value) {
  return "<" + std::string(name) + ">" + markup::escape_text(xml_safe(value)) + "</" + std::string(name) + ">";
}

void attr(std::string& out, std::string_view key, std::string_view value) {
  out += ' ';
  out += key;
  out += "=\"";
  out += markup::escape_attribute(xml_safe(value));
  out += '"';
}

std::string describe_change(const Article& before, const Article& after) {
  std::vector<std::string> parts;
  if (before.title != after.title) parts.emplace_back("title");
  if (before.category_label != after.category_label) parts.emplace_back("category");
  if (before.published_date != after.published_date) parts.emplace_back("date");
  if (before.summary != after.summary) parts.emplace_back("summary");
  if (before.comments != after.comments) {
    parts.push_back("comments (" + std::to_string(before.comments.size()) + " -> " +
                    std::to_string(after.comments.size()) + ")");
  }
  return "updated " + text::join(parts, ", ");
}

int parse_int(const std::string& value, std::size_t article, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParseError("article " + std::to_string(article) + ": invalid " + what + " '" + value + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

UpsertOutcome CorpusStore::upsert(Article article) {
  if (article.guid.empty()) throw ValidationError("article guid must not be empty");
  if (!article.published_date.ok()) throw ValidationError("article " + article.guid + " has an invalid date");
  auto it = index_.find(article.guid);
  if (it == index_.end()) {
    index_.emplace(article.guid, articles_.size());
    articles_.push_back(std::move(article));
    return UpsertOutcome::stored;
  }
  Article& existing = articles_[it->second];
  if (existing == article) return UpsertOutcome::duplicate;
  revisions_.push_back({article.guid, describe_change(existing, article)});
  existing = std::move(article);
  return UpsertOutcome::updated;
}

const Article* CorpusStore::find(std::string_view guid) const {
  auto it = index_.find(guid);
  return it == index_.end() ? nullptr : &articles_[it->second];
}

CorpusStore CorpusStore::load(const std::filesystem::path& path) {
  CorpusStore store;
  if (!std::filesystem::exists(path)) return store;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  for (auto& a : parse_corpus(buf.str())) {
    if (store.upsert(std::move(a)) != UpsertOutcome::stored) {
      throw ParseError(path.string() + ": duplicate article guid");
    }
  }
  return store;
}

void CorpusStore::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << serialize_corpus(articles_);
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::map<std::string, CommentLocation, std::less<>> index_comments(std::span<const Article> articles) {
  std::map<std::string, CommentLocation, std::less<>> out;
  for (const auto& a : articles) {
    for (const auto& c : a.comments) {
      if (!out.emplace(c.comment_id, CommentLocation{&a, &c}).second) {
        throw ValidationError("duplicate comment id " + c.comment_id);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void VocabPolicy::validate() const {
  if (!(min_doc_coverage >= 0.0 && min_doc_coverage <= max_doc_coverage && max_doc_coverage <= 1.0)) {
    throw ValidationError("vocabulary thresholds must satisfy 0 <= min <= max <= 1");
  }
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read stopword list " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    line.resize(std::min(line.size(), line.find('#')));
    auto word = text::trim(line);
    if (!word.empty()) words.insert(text::to_lower(word));
  }
  return words;
}

TokenizedText tokenize_clean(std::string_view input, const VocabPolicy& policy) {
  TokenizedText out{std::string(input), {}};
  for (auto& token : text::word_runs(input)) {
    if (policy.stopwords.count(text::to_lower(token))) continue;
    out.tokens.push_back(std::move(token));
  }
  return out;
}

PruneResult prune_vocabulary(std::vector<TokenizedText> docs, const VocabPolicy& policy) {
  policy.validate();
  if (docs.empty()) throw ValidationError("cannot prune an empty document list");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    std::unordered_set<std::string_view> seen(d.tokens.begin(), d.tokens.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  PruneResult result;
  const double n = static_cast<double>(docs.size());
  std::unordered_set<std::string> dropped;
  for (const auto& [term, count] : df) {
    double coverage = static_cast<double>(count) / n;
    if (coverage < policy.min_doc_coverage) {
      result.dropped_low.insert(term);
      dropped.insert(term);
    } else if (coverage > policy.max_doc_coverage) {
      result.dropped_high.insert(term);
      dropped.insert(term);
    }
  }
  for (auto& d : docs) {
    if (!dropped.empty()) {
      std::erase_if(d.tokens, [&](const std::string& t) { return dropped.count(t) > 0; });
    }
  }
  result.docs = std::move(docs);
  return result;
}

// ---------------------------------------------------------------------------

std::string serialize_corpus(std::span<const Article> articles) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<CORPUS>\n";
  for (const auto& a : articles) {
    out += "  <NOTICIA";
    attr(out, "guid", a.guid);
    out += ">\n";
    out += "    " + text_el("TITULO", a.title) + "\n";
    out += "    " + text_el("CATEGORIA", a.category_label) + "\n";
    out += "    " + text_el("FECHA", format_date(a.published_date)) + "\n";
    out += "    " + text_el("RESUMEN", a.summary) + "\n";
    out += "    <COMENTARIOS>\n";
    for (const auto& c : a.comments) {
      out += "      <COMENTARIO";
      attr(out, "id", c.comment_id);
      attr(out, "usuario", c.author);
      if (c.posted_at) attr(out, "fecha", format_local_minute(*c.posted_at));
      if (c.star_rating) attr(out, "estrellas", std::to_string(*c.star_rating));
      if (c.vote_count) attr(out, "votos", std::to_string(*c.vote_count));
      if (c.reply_to_author) attr(out, "respuesta_a", *c.reply_to_author);
      if (c.permalink) attr(out, "enlace", *c.permalink);
      out += ">";
      out += markup::escape_text(xml_safe(c.body_text));
      out += "</COMENTARIO>\n";
    }
    out += "    </COMENTARIOS>\n";
    out += "  </NOTICIA>\n";
  }
  out += "</CORPUS>\n";
  return out;
}

std::vector<Article> parse_corpus(std::string_view xml) {
  markup::Node root = markup::parse_xml_bytes(xml);
  if (root.name != "CORPUS") throw ParseError("corpus document element must be CORPUS, got " + root.name);
  std::vector<Article> out;
  std::size_t index = 0;
  for (const auto& el : root.children) {
    if (!el.is_element()) continue;
    if (el.name != "NOTICIA") throw ParseError("unexpected element <" + el.name + "> in CORPUS", el.offset);
    auto where = "article " + std::to_string(index);
    auto required = [&](std::string_view name) -> const markup::Node& {
      const markup::Node* c = el.child(name);
      if (!c) throw ParseError(where + ": missing <" + std::string(name) + ">", el.offset);
      return *c;
    };
    Article a;
    const std::string* guid = el.attribute("guid");
    if (!guid || guid->empty()) throw ParseError(where + ": missing guid attribute", el.offset);
    a.guid = *guid;
    a.title = required("TITULO").text_content();
    a.category_label = required("CATEGORIA").text_content();
    std::string date = required("FECHA").text_content();
    auto parsed = parse_date(date);
    if (!parsed) throw ParseError(where + ": invalid FECHA '" + date + "'", el.offset);
    a.published_date = *parsed;
    a.summary = required("RESUMEN").text_content();
    for (const auto& c : required("COMENTARIOS").children) {
      if (!c.is_element()) continue;
      if (c.name != "COMENTARIO") throw ParseError(where + ": unexpected <" + c.name + ">", c.offset);
      CommentRecord rec;
      const std::string* id = c.attribute("id");
      const std::string* user = c.attribute("usuario");
      if (!id || !user) throw ParseError(where + ": COMENTARIO needs id and usuario", c.offset);
      rec.comment_id = *id;
      rec.author = *user;
      if (const std::string* f = c.attribute("fecha")) {
        rec.posted_at = parse_local_minute(*f);
        if (!rec.posted_at) throw ParseError(where + ": invalid comment fecha '" + *f + "'", c.offset);
      }
      if (const std::string* s = c.attribute("estrellas")) rec.star_rating = parse_int(*s, index, "estrellas");
      if (const std::string* v = c.attribute("votos")) rec.vote_count = parse_int(*v, index, "votos");
      if (const std::string* r = c.attribute("respuesta_a")) rec.reply_to_author = *r;
      if (const std::string* p = c.attribute("enlace")) rec.permalink = *p;
      rec.body_text = c.text_content();
      a.comments.push_back(std::move(rec));
    }
    out.push_back(std::move(a));
    ++index;
  }
  return out;
}

std::string export_records(std::span<const Article> articles) {
  std::string out;
  for (const auto& a : articles) {
    for (const auto& c : a.comments) {
      nlohmann::ordered_json rec;
      rec["article_guid"] = a.guid;
      rec["title"] = a.title;
      rec["category"] = a.category_label;
      rec["date"] = format_date(a.published_date);
      rec["summary"] = a.summary;
      rec["comment_id"] = c.comment_id;
      rec["author"] = c.author;
      rec["posted_at"] = c.posted_at ? nlohmann::ordered_json(format_local_minute(*c.posted_at)) : nullptr;
      rec["star_rating"] = c.star_rating ? nlohmann::ordered_json(*c.star_rating) : nullptr;
      rec["vote_count"] = c.vote_count ? nlohmann::ordered_json(*c.vote_count) : nullptr;
      rec["reply_to"] = c.reply_to_author ? nlohmann::ordered_json(*c.reply_to_author) : nullptr;
      rec["text"] = c.body_text;
      out += rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
      out += '\n';
    }
  }
  return out;
}

}  // namespace polmine::corpus
