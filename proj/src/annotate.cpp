#include "polmine/annotate.hpp"

#include <map>
#include <random>
#include <set>

#include "polmine/text.hpp"

namespace polmine::annotate {
namespace {

// Unbiased draw in [0, bound) that does not depend on the standard library's
// distribution implementation.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::string cell(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return text::collapse_whitespace(out);
}

std::string excerpt_of(std::string_view body) { return text::truncate(cell(body), 280); }

void write_header(std::string& out) {
  out += text::join({std::string(kRefColumn), std::string(kTitleColumn), std::string(kUserColumn),
                     std::string(kExcerptColumn), std::string(kStanceColumn), std::string(kPartyColumn),
                     std::string(kKeywordsColumn)},
                    "\t");
  out += '\n';
}

std::string canonical_column(std::string_view raw) {
  std::string name = text::collapse_whitespace(raw);
  if (name.starts_with("\xEF\xBB\xBF")) name.erase(0, 3);
  std::string lower = text::to_lower(name);
  if (lower == "palabras clave" || lower == "palabras_clave") return std::string(kKeywordsColumn);
  if (lower == "inclinacion" || lower == "inclinación") return std::string(kPartyColumn);
  if (lower == "titulo" || lower == "título" || lower == "html") return std::string(kTitleColumn);
  if (lower == "comentario_id") return std::string(kRefColumn);
  if (lower == "usuario") return std::string(kUserColumn);
  if (lower == "tipo") return std::string(kStanceColumn);
  if (lower == "extracto") return std::string(kExcerptColumn);
  return name;
}

}  // namespace

std::vector<std::string> sample_seed_set(std::span<const corpus::Article> articles, std::size_t n,
                                         std::uint64_t seed) {
  std::size_t total = 0;
  for (const auto& a : articles) total += a.comments.size();
  if (total == 0) throw ValidationError("cannot sample a seed set from a corpus without comments");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<const corpus::CommentRecord*>> pools;
  for (const auto& a : articles) {
    std::vector<const corpus::CommentRecord*> pool;
    for (const auto& c : a.comments) pool.push_back(&c);
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[draw(rng, i)]);
    }
    pools.push_back(std::move(pool));
  }

  std::vector<std::string> out;
  std::set<std::string, std::less<>> taken;
  const std::size_t want = std::min(n, total);
  for (std::size_t round = 0; out.size() < want; ++round) {
    bool progressed = false;
    for (const auto& pool : pools) {
      if (out.size() == want) break;
      if (round >= pool.size()) continue;
      progressed = true;
      const std::string& id = pool[round]->comment_id;
      if (taken.insert(id).second) out.push_back(id);
    }
    if (!progressed) break;
  }
  return out;
}

std::string export_annotation_template(std::span<const std::string> refs,
                                       std::span<const corpus::Article> articles) {
  auto index = corpus::index_comments(articles);
  std::string out;
  write_header(out);
  for (const auto& ref : refs) {
    auto it = index.find(ref);
    if (it == index.end()) throw ValidationError("comment ref not in corpus: " + ref);
    const auto& [article, comment] = it->second;
    out += text::join({cell(ref), cell(article->title), cell(comment->author), excerpt_of(comment->body_text),
                       "", "", ""},
                      "\t");
    out += '\n';
  }
  return out;
}

std::vector<AnnotatedComment> import_annotations(std::string_view table) {
  auto lines = text::split(table, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  if (lines.empty() || text::trim(lines.front()).empty()) throw AnnotationError("missing header row", 1);

  std::map<std::string, std::size_t> columns;
  auto header = text::split(lines.front(), '\t');
  for (std::size_t i = 0; i < header.size(); ++i) columns.emplace(canonical_column(header[i]), i);
  for (auto required : {kUserColumn, kStanceColumn, kPartyColumn, kKeywordsColumn}) {
    if (!columns.count(std::string(required))) {
      throw AnnotationError("missing column " + std::string(required), 1);
    }
  }

  std::vector<AnnotatedComment> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (text::trim(lines[ln]).empty()) continue;
    auto fields = text::split(lines[ln], '\t');
    auto get = [&](std::string_view column) -> std::string {
      auto it = columns.find(std::string(column));
      if (it == columns.end() || it->second >= fields.size()) return {};
      return std::string(text::trim(fields[it->second]));
    };
    AnnotatedComment a;
    a.comment_ref = get(kRefColumn);
    a.article_title = get(kTitleColumn);
    a.author = get(kUserColumn);
    a.excerpt = get(kExcerptColumn);
    std::string stance = get(kStanceColumn);
    std::string party = get(kPartyColumn);
    auto s = parse_stance(stance);
    if (!s) throw AnnotationError("unknown Tipo '" + stance + "'", ln + 1);
    auto p = parse_party(party);
    if (!p) throw AnnotationError("unknown Inclinación '" + party + "'", ln + 1);
    a.stance = *s;
    a.party = *p;
    for (const auto& k : text::split(get(kKeywordsColumn), ',')) {
      auto kw = text::trim(k);
      if (!kw.empty()) a.keywords.emplace_back(kw);
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string write_annotations(std::span<const AnnotatedComment> annotations) {
  std::string out;
  write_header(out);
  for (const auto& a : annotations) {
    std::vector<std::string> keywords;
    for (const auto& k : a.keywords) keywords.push_back(cell(k));
    out += text::join({cell(a.comment_ref), cell(a.article_title), cell(a.author), cell(a.excerpt),
                       std::string(display_name(a.stance)), std::string(display_name(a.party)),
                       text::join(keywords, ", ")},
                      "\t");
    out += '\n';
  }
  return out;
}

}  // namespace polmine::annotate
