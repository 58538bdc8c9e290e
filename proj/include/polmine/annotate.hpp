#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polmine/corpus.hpp"
#include "polmine/errors.hpp"
#include "polmine/labels.hpp"

// Seed-set sampling and the tab-separated annotation table.
namespace polmine::annotate {

struct AnnotatedComment {
  std::string comment_ref;  // comment_id
  std::string article_title;
  std::string author;
  Stance stance = Stance::informacion;
  Party party = Party::indeterminado;
  std::vector<std::string> keywords;
  std::string excerpt;  // comment text as shown to the annotator, if known

  friend bool operator==(const AnnotatedComment&, const AnnotatedComment&) = default;
};

// A bad row in an annotation table. line is 1-based, counting the header.
class AnnotationError : public ParseError {
 public:
  AnnotationError(const std::string& message, std::size_t line)
      : ParseError("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Round-robin over articles in corpus order, one comment per article per
// round, so early articles are all represented before any repeats. Which
// comment an article contributes is drawn from a generator seeded with seed.
// Returns min(n, total) distinct comment ids. Throws ValidationError when the
// corpus holds no comments.
std::vector<std::string> sample_seed_set(std::span<const corpus::Article> articles, std::size_t n,
                                         std::uint64_t seed);

// Column names of the annotation table, in file order.
inline constexpr std::string_view kRefColumn = "Comentario_ID";
inline constexpr std::string_view kTitleColumn = "Título";
inline constexpr std::string_view kUserColumn = "Usuario";
inline constexpr std::string_view kExcerptColumn = "Extracto";
inline constexpr std::string_view kStanceColumn = "Tipo";
inline constexpr std::string_view kPartyColumn = "Inclinación";
inline constexpr std::string_view kKeywordsColumn = "Palabras_Clave";

// Header plus one row per ref with the label columns left blank.
// Throws ValidationError on a ref missing from the corpus.
std::string export_annotation_template(std::span<const std::string> refs,
                                       std::span<const corpus::Article> articles);

// Header must name Usuario, Tipo, Inclinación and Palabras_Clave
// ("Palabras Clave" also accepted). Keywords split on commas. Throws
// AnnotationError for unknown labels (row) or missing columns (line 1).
std::vector<AnnotatedComment> import_annotations(std::string_view table);

// Canonical table with every label filled from the given annotations.
std::string write_annotations(std::span<const AnnotatedComment> annotations);

}  // namespace polmine::annotate
