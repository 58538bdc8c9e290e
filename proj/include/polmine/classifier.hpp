#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polmine/annotate.hpp"
#include "polmine/corpus.hpp"
#include "polmine/errors.hpp"
#include "polmine/labels.hpp"
#include "polmine/scraper.hpp"

namespace polmine::classifier {

// A party's electoral program, injected into prompts as context.
struct PartyProgram {
  Party party = Party::indeterminado;
  std::string title;
  std::string body;
  std::vector<std::string> declared_topics;
};

// Loads <CODE>.txt files (LFI.txt, RN.txt, ...). Leading "# title: ..." and
// "# topics: a; b; c" lines are metadata; the rest is the body.
std::vector<PartyProgram> load_programs(const std::filesystem::path& dir);

// Throws ValidationError on an empty body, a duplicate party or Indeterminado.
void validate_programs(std::span<const PartyProgram> programs);

struct FewShotExample {
  std::string text;
  Stance stance = Stance::informacion;
  Party party = Party::indeterminado;
  std::vector<std::string> keywords;
};

// Pairs gold annotations with their comment text from the corpus, falling
// back to the annotation's excerpt. Throws ValidationError when neither
// exists.
std::vector<FewShotExample> examples_from_annotations(std::span<const annotate::AnnotatedComment> gold,
                                                      std::span<const corpus::Article> articles);

inline constexpr std::string_view kDefaultTemplate = "afinidad-v1";

struct PromptBundle {
  std::string template_id;
  std::string system_preamble;
  std::vector<std::string> context_docs;       // rendered programs, enum order
  std::vector<std::string> few_shot_examples;  // rendered pairs, input order
  std::string target;
  std::vector<std::string> response_schema;    // Tipo, Inclinación, Palabras_Clave

  std::string render() const;
};

// Throws ValidationError on empty programs or examples, an empty comment or
// an unknown template id.
PromptBundle build_prompt(std::span<const PartyProgram> programs, std::span<const FewShotExample> examples,
                          std::string_view comment, std::string_view template_id = kDefaultTemplate);

// "Tipo: <stance> | Inclinación: <party> | Palabras_Clave: <k1, k2>"
std::string render_reply(Stance stance, Party party, std::span<const std::string> keywords);

struct ParsedReply {
  Stance stance = Stance::informacion;
  Party party = Party::indeterminado;
  std::vector<std::string> keywords;
  std::string warning;  // set when a label could not be mapped
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

// Throws ClassificationError when the reply has no three labeled fields.
// Unknown party -> Indeterminado, unknown stance -> Información, both with
// a warning.
ParsedReply parse_reply(std::string_view reply);

struct ClassificationResult {
  std::string comment_ref;
  Stance stance = Stance::informacion;
  Party party = Party::indeterminado;
  std::vector<std::string> keywords;
  std::string source;  // model id, "lexicon" or "gold"
  std::optional<std::string> raw_response;
  std::string warning;

  friend bool operator==(const ClassificationResult&, const ClassificationResult&) = default;
};

// Text-in/text-out completion endpoint.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  // Throws CompletionError on transport or endpoint failure.
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string model_id() const = 0;
};

class CompletionError : public Error {
 public:
  using Error::Error;
};

struct EndpointConfig {
  std::string url;
  std::string model;
  std::string api_key_env = "POLMINE_API_KEY";
  scraper::Millis timeout{60000};
  std::size_t parallelism = 4;
  int max_retries = 2;
  scraper::Millis backoff_base{1000};
};

// OpenAI-style chat completions over HTTP(S). The bearer credential is read
// from the environment variable named by api_key_env at construction.
class HttpCompletionClient final : public CompletionClient {
 public:
  explicit HttpCompletionClient(EndpointConfig config);
  std::string complete(const std::string& prompt) override;
  std::string model_id() const override { return config_.model; }

 private:
  EndpointConfig config_;
  std::string api_key_;
};

struct RetryPolicy {
  int max_retries = 2;
  scraper::Millis backoff_base{1000};
};

// Sends the rendered prompt; retries CompletionError with exponential
// backoff. Throws ClassificationError once retries are exhausted or when
// the reply cannot be split into fields.
ClassificationResult classify_remote(const PromptBundle& bundle, CompletionClient& client,
                                     std::string_view comment_ref, const RetryPolicy& retry,
                                     scraper::Clock& clock);

struct PartyLexicon {
  Party party = Party::indeterminado;
  std::vector<std::string> terms;
};

// One <CODE>.txt per party, a term or phrase per line, '#' comments.
std::vector<PartyLexicon> load_lexicons(const std::filesystem::path& dir);

// Case-insensitive whole-token matching; a phrase matches as a contiguous
// token subsequence. score(party) counts every match position of every
// term. A unique positive maximum wins, anything else is Indeterminado.
// Keywords are all matched terms by first match position. Stance is always
// Información.
class LexiconClassifier {
 public:
  // Terms are tokenized with the same policy as comments, so stopwords
  // inside phrases are ignored consistently. Needs at least two parties.
  LexiconClassifier(std::span<const PartyLexicon> lexicons, const corpus::VocabPolicy& policy = {});

  ClassificationResult classify(std::string_view comment_ref, const corpus::TokenizedText& comment) const;

 private:
  struct Term {
    std::string text;
    Party party;
    std::vector<std::string> tokens;  // lowercase
  };
  std::vector<Term> terms_;
};

ClassificationResult classify_lexicon(const corpus::TokenizedText& comment, std::span<const PartyLexicon> lexicons,
                                      std::string_view comment_ref = {});

struct CoverageReport {
  std::size_t assigned = 0;      // party != Indeterminado
  std::size_t classified = 0;    // results considered
  std::size_t unclassified = 0;  // errors, excluded from the fraction
  double fraction = 0.0;
};

// |{party != Indeterminado}| / |results|. Throws ValidationError when empty.
double coverage(std::span<const ClassificationResult> results);
CoverageReport coverage_report(std::span<const ClassificationResult> results, std::size_t unclassified);

// ---------------------------------------------------------------------------
// Whole-corpus classification

class CommentClassifier {
 public:
  virtual ~CommentClassifier() = default;
  // Throws ClassificationError for a per-comment failure; anything else
  // aborts the run.
  virtual ClassificationResult classify(const std::string& comment_ref, const std::string& text) = 0;
  virtual std::size_t parallelism() const { return 1; }
};

// Lexicon mode over precomputed (cleaned, pruned) tokens.
class LexiconCommentClassifier final : public CommentClassifier {
 public:
  LexiconCommentClassifier(LexiconClassifier lexicon, std::map<std::string, corpus::TokenizedText> tokens);
  ClassificationResult classify(const std::string& comment_ref, const std::string& text) override;

 private:
  LexiconClassifier lexicon_;
  std::map<std::string, corpus::TokenizedText> tokens_;
};

// Remote mode: one prompt per comment with fixed programs and examples.
class RemoteCommentClassifier final : public CommentClassifier {
 public:
  RemoteCommentClassifier(std::vector<PartyProgram> programs, std::vector<FewShotExample> examples,
                          std::string template_id, CompletionClient& client, RetryPolicy retry,
                          scraper::Clock& clock, std::size_t parallelism);
  ClassificationResult classify(const std::string& comment_ref, const std::string& text) override;
  std::size_t parallelism() const override { return parallelism_; }

 private:
  std::vector<PartyProgram> programs_;
  std::vector<FewShotExample> examples_;
  std::string template_id_;
  CompletionClient& client_;
  RetryPolicy retry_;
  scraper::Clock& clock_;
  std::size_t parallelism_;
};

struct ClassificationFailure {
  std::string comment_ref;
  std::string error;
};

struct CorpusClassification {
  std::vector<ClassificationResult> results;  // corpus order
  std::vector<ClassificationFailure> failures;
  std::size_t resumed = 0;  // results taken from an earlier run
  std::size_t gold = 0;
  std::size_t newly_classified = 0;
};

// Classifies every comment in corpus order. Seed comments keep their gold
// labels (source "gold"). Each result is appended to results_path as soon as
// its predecessors are written, so an interrupted run resumes without
// resending finished comments; the file is rewritten in corpus order at the
// end. Up to classifier.parallelism() comments are in flight at once.
CorpusClassification classify_corpus(std::span<const corpus::Article> articles,
                                     std::span<const annotate::AnnotatedComment> gold,
                                     CommentClassifier& classifier, const std::filesystem::path& results_path);

// Results table (TSV). raw_response and warning are escaped (\n, \t, \\).
std::string results_header();
std::string format_result_row(const ClassificationResult& r);
std::vector<ClassificationResult> parse_results(std::string_view table);

}  // namespace polmine::classifier
