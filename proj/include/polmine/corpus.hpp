#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polmine/scraper.hpp"
#include "polmine/timeutil.hpp"

namespace polmine::corpus {

using scraper::CommentRecord;

struct Article {
  std::string guid;
  std::string title;
  std::string category_label;
  Date published_date;
  std::string summary;
  std::vector<CommentRecord> comments;

  friend bool operator==(const Article&, const Article&) = default;
};

enum class UpsertOutcome { stored, duplicate, updated };

struct Revision {
  std::string guid;
  std::string note;
};

// Articles keyed by guid, kept in first-insertion order. Single writer:
// callers serialize mutations; const access may be concurrent.
class CorpusStore {
 public:
  UpsertOutcome upsert(Article article);

  const std::vector<Article>& articles() const { return articles_; }
  std::size_t size() const { return articles_.size(); }
  const Article* find(std::string_view guid) const;
  const std::vector<Revision>& revisions() const { return revisions_; }

  // Empty store when the file does not exist.
  static CorpusStore load(const std::filesystem::path& path);
  // Writes corpus XML through a temporary file; throws IoError.
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<Article> articles_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<Revision> revisions_;
};

// Where a comment lives in a corpus.
struct CommentLocation {
  const Article* article;
  const CommentRecord* comment;
};

// comment_id -> location. Throws ValidationError on a duplicate comment_id.
std::map<std::string, CommentLocation, std::less<>> index_comments(std::span<const Article> articles);

struct TokenizedText {
  std::string original;
  std::vector<std::string> tokens;

  friend bool operator==(const TokenizedText&, const TokenizedText&) = default;
};

struct VocabPolicy {
  double min_doc_coverage = 0.0;
  double max_doc_coverage = 1.0;
  std::set<std::string> stopwords;  // lowercase
  std::string language = "fr";

  void validate() const;
};

// One lowercase word per line; '#' starts a comment.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

// Splits on anything that is not a Unicode letter or digit, then drops
// tokens whose lowercase form is a stopword. Casing and accents are kept.
TokenizedText tokenize_clean(std::string_view text, const VocabPolicy& policy);

struct PruneResult {
  std::vector<TokenizedText> docs;
  std::set<std::string> dropped_low;
  std::set<std::string> dropped_high;
};

// df(t) = |docs containing t| / |docs|. Drops t when df < min_doc_coverage
// or df > max_doc_coverage. Throws ValidationError on an empty list.
PruneResult prune_vocabulary(std::vector<TokenizedText> docs, const VocabPolicy& policy);

// Corpus XML: CORPUS > NOTICIA > TITULO, CATEGORIA, FECHA, RESUMEN,
// COMENTARIOS > COMENTARIO.
std::string serialize_corpus(std::span<const Article> articles);

// Throws ParseError naming the article index on a missing mandatory child.
std::vector<Article> parse_corpus(std::string_view xml);

// Canonical line-delimited export: one JSON object per comment with its
// article's fields, in corpus order.
std::string export_records(std::span<const Article> articles);

}  // namespace polmine::corpus
