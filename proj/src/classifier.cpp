#include "polmine/classifier.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include "polmine/text.hpp"

namespace polmine::classifier {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Files named after a party code, in a stable order.
std::vector<std::pair<Party, std::filesystem::path>> party_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::pair<Party, std::filesystem::path>> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    auto party = parse_party(entry.path().stem().string());
    if (!party || *party == Party::indeterminado) {
      throw ValidationError("file " + entry.path().string() + " is not named after a party code");
    }
    out.emplace_back(*party, entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string one_line(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  return text::collapse_whitespace(out);
}

std::string escape_field(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    char n = s[++i];
    switch (n) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      default: out.push_back(n);
    }
  }
  return out;
}

std::vector<std::string> split_keywords(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& k : text::split(s, ',')) {
    auto kw = text::trim(k);
    if (!kw.empty()) out.emplace_back(kw);
  }
  return out;
}

// Normalized field label: lowercase, accents on "inclinación" dropped,
// space and underscore equivalent.
std::string field_key(std::string_view label) {
  std::string key = text::to_lower(text::collapse_whitespace(label));
  std::replace(key.begin(), key.end(), ' ', '_');
  if (key == "inclinacion") key = "inclinación";
  return key;
}

constexpr std::string_view kPreamble =
    "Eres un analista de opinión política. Clasificas comentarios de lectores de un agregador "
    "de noticias francés publicados durante la campaña de las elecciones legislativas.\n"
    "Para cada comentario indica:\n"
    "- Tipo: la actitud del comentario. Valores: Apoyo, Crítica, Acusación, Rechazo, Admiración, "
    "Pregunta, Información.\n"
    "- Inclinación: el partido con el que el autor muestra más afinidad. Valores: Francia Insumisa "
    "(LFI), Partido Socialista (PS), Reagrupación Nacional (RN), La République En Marche! (LREM), "
    "Los Republicanos (LR), Indeterminado.\n"
    "- Palabras_Clave: los términos del comentario que justifican la clasificación, separados por "
    "comas.\n"
    "Usa los programas electorales como referencia y sigue el estilo de los ejemplos anotados.\n"
    "Responde con una única línea y exactamente este formato:\n"
    "Tipo: <tipo> | Inclinación: <partido> | Palabras_Clave: <término>, <término>";

}  // namespace

// ---------------------------------------------------------------------------
// Programs and prompts

std::vector<PartyProgram> load_programs(const std::filesystem::path& dir) {
  std::vector<PartyProgram> out;
  for (const auto& [party, path] : party_files(dir)) {
    PartyProgram program;
    program.party = party;
    std::vector<std::string> body;
    bool in_header = true;
    for (auto& line : text::split(read_file(path), '\n')) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (in_header && line.starts_with("#")) {
        std::string_view meta = text::trim(std::string_view(line).substr(1));
        auto colon = meta.find(':');
        if (colon == std::string_view::npos) continue;
        std::string key = text::to_lower(text::trim(meta.substr(0, colon)));
        std::string_view value = text::trim(meta.substr(colon + 1));
        if (key == "title") program.title = std::string(value);
        if (key == "topics") {
          for (const auto& t : text::split(value, ';')) {
            auto topic = text::trim(t);
            if (!topic.empty()) program.declared_topics.emplace_back(topic);
          }
        }
        continue;
      }
      in_header = false;
      body.push_back(std::move(line));
    }
    program.body = std::string(text::trim(text::join(body, "\n")));
    out.push_back(std::move(program));
  }
  validate_programs(out);
  return out;
}

void validate_programs(std::span<const PartyProgram> programs) {
  std::set<Party> seen;
  for (const auto& p : programs) {
    if (p.party == Party::indeterminado) throw ValidationError("a program cannot belong to Indeterminado");
    if (text::trim(p.body).empty()) {
      throw ValidationError("program for " + std::string(party_code(p.party)) + " has an empty body");
    }
    if (!seen.insert(p.party).second) {
      throw ValidationError("more than one program for " + std::string(party_code(p.party)));
    }
  }
}

std::vector<FewShotExample> examples_from_annotations(std::span<const annotate::AnnotatedComment> gold,
                                                      std::span<const corpus::Article> articles) {
  auto index = corpus::index_comments(articles);
  std::vector<FewShotExample> out;
  for (const auto& a : gold) {
    FewShotExample ex{{}, a.stance, a.party, a.keywords};
    if (auto it = index.find(a.comment_ref); it != index.end()) {
      ex.text = it->second.comment->body_text;
    } else {
      ex.text = a.excerpt;
    }
    if (text::trim(ex.text).empty()) {
      throw ValidationError("no text for seed comment '" + a.comment_ref + "'");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::string render_reply(Stance stance, Party party, std::span<const std::string> keywords) {
  std::vector<std::string> kws;
  for (const auto& k : keywords) kws.push_back(one_line(k));
  return "Tipo: " + std::string(display_name(stance)) + " | Inclinación: " + std::string(display_name(party)) +
         " | Palabras_Clave: " + text::join(kws, ", ");
}

PromptBundle build_prompt(std::span<const PartyProgram> programs, std::span<const FewShotExample> examples,
                          std::string_view comment, std::string_view template_id) {
  if (template_id != kDefaultTemplate) throw ValidationError("unknown prompt template '" + std::string(template_id) + "'");
  if (programs.empty()) throw ValidationError("prompt needs at least one party program");
  if (examples.empty()) throw ValidationError("prompt needs at least one annotated example");
  if (text::trim(comment).empty()) throw ValidationError("comment to classify is empty");
  validate_programs(programs);

  PromptBundle bundle;
  bundle.template_id = std::string(template_id);
  bundle.system_preamble = std::string(kPreamble);
  std::vector<const PartyProgram*> ordered;
  for (const auto& p : programs) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->party < b->party; });
  for (const auto* p : ordered) {
    std::string doc = "--- " + std::string(display_name(p->party));
    if (!p->title.empty()) doc += ": " + one_line(p->title);
    doc += " ---\n" + std::string(text::trim(p->body));
    bundle.context_docs.push_back(std::move(doc));
  }
  for (const auto& ex : examples) {
    bundle.few_shot_examples.push_back("Comentario: " + one_line(ex.text) + "\nRespuesta: " +
                                       render_reply(ex.stance, ex.party, ex.keywords));
  }
  bundle.target = one_line(comment);
  bundle.response_schema = {"Tipo", "Inclinación", "Palabras_Clave"};
  return bundle;
}

std::string PromptBundle::render() const {
  std::string out = system_preamble;
  out += "\n\n=== PROGRAMAS ELECTORALES ===\n";
  for (const auto& d : context_docs) out += d + "\n\n";
  out += "=== EJEMPLOS ANOTADOS ===\n";
  for (const auto& e : few_shot_examples) out += e + "\n\n";
  out += "=== COMENTARIO A CLASIFICAR ===\n";
  out += "Comentario: " + target + "\nRespuesta:";
  return out;
}

// ---------------------------------------------------------------------------
// Replies

ParsedReply parse_reply(std::string_view reply) {
  for (const auto& raw_line : text::split(reply, '\n')) {
    std::string_view line = text::trim(raw_line);
    if (auto pos = text::to_lower(line).find("tipo"); pos == std::string::npos) continue;
    if (text::to_lower(line).starts_with("respuesta:")) line = text::trim(line.substr(10));
    auto parts = text::split(line, '|');
    if (parts.size() != 3) continue;
    std::map<std::string, std::string> fields;
    for (const auto& part : parts) {
      auto colon = part.find(':');
      if (colon == std::string::npos) break;
      fields[field_key(text::trim(std::string_view(part).substr(0, colon)))] =
          std::string(text::trim(std::string_view(part).substr(colon + 1)));
    }
    if (!fields.count("tipo") || !fields.count("inclinación") || !fields.count("palabras_clave")) continue;

    ParsedReply out;
    std::vector<std::string> warnings;
    if (auto s = parse_stance(fields["tipo"])) {
      out.stance = *s;
    } else {
      warnings.push_back("unknown Tipo '" + fields["tipo"] + "'");
    }
    if (auto p = parse_party(fields["inclinación"])) {
      out.party = *p;
    } else {
      warnings.push_back("unknown Inclinación '" + fields["inclinación"] + "'");
    }
    out.keywords = split_keywords(fields["palabras_clave"]);
    out.warning = text::join(warnings, "; ");
    return out;
  }
  throw ClassificationError("malformed reply: no 'Tipo | Inclinación | Palabras_Clave' line");
}

ClassificationResult classify_remote(const PromptBundle& bundle, CompletionClient& client,
                                     std::string_view comment_ref, const RetryPolicy& retry,
                                     scraper::Clock& clock) {
  const std::string prompt = bundle.render();
  std::string reply;
  std::string last_error;
  bool answered = false;
  for (int attempt = 0; attempt <= retry.max_retries && !answered; ++attempt) {
    if (attempt > 0) clock.sleep_for(retry.backoff_base * (1LL << std::min(attempt - 1, 20)));
    try {
      reply = client.complete(prompt);
      answered = true;
    } catch (const CompletionError& e) {
      last_error = e.what();
    }
  }
  if (!answered) {
    throw ClassificationError("endpoint failed after " + std::to_string(retry.max_retries + 1) +
                              " attempts: " + last_error);
  }
  ParsedReply parsed = parse_reply(reply);
  ClassificationResult r;
  r.comment_ref = std::string(comment_ref);
  r.stance = parsed.stance;
  r.party = parsed.party;
  r.keywords = std::move(parsed.keywords);
  r.source = client.model_id();
  r.raw_response = std::move(reply);
  r.warning = std::move(parsed.warning);
  return r;
}

// ---------------------------------------------------------------------------
// Lexicon baseline

std::vector<PartyLexicon> load_lexicons(const std::filesystem::path& dir) {
  std::vector<PartyLexicon> out;
  for (const auto& [party, path] : party_files(dir)) {
    PartyLexicon lex{party, {}};
    for (const auto& line : text::split(read_file(path), '\n')) {
      auto term = text::trim(line);
      if (term.empty() || term.front() == '#') continue;
      lex.terms.emplace_back(term);
    }
    if (lex.terms.empty()) throw ValidationError("lexicon " + path.string() + " has no terms");
    out.push_back(std::move(lex));
  }
  return out;
}

LexiconClassifier::LexiconClassifier(std::span<const PartyLexicon> lexicons, const corpus::VocabPolicy& policy) {
  std::set<Party> parties;
  for (const auto& lex : lexicons) {
    if (lex.party == Party::indeterminado) throw ValidationError("a lexicon cannot belong to Indeterminado");
    if (lex.terms.empty()) throw ValidationError("lexicon for " + std::string(party_code(lex.party)) + " is empty");
    parties.insert(lex.party);
    for (const auto& term : lex.terms) {
      Term t{term, lex.party, {}};
      for (const auto& tok : corpus::tokenize_clean(term, policy).tokens) t.tokens.push_back(text::to_lower(tok));
      if (!t.tokens.empty()) terms_.push_back(std::move(t));
    }
  }
  if (parties.size() < 2) throw ValidationError("lexicon classifier needs lexicons for at least two parties");
}

ClassificationResult LexiconClassifier::classify(std::string_view comment_ref,
                                                 const corpus::TokenizedText& comment) const {
  std::vector<std::string> lowered;
  lowered.reserve(comment.tokens.size());
  for (const auto& t : comment.tokens) lowered.push_back(text::to_lower(t));

  std::array<std::size_t, kAllParties.size()> score{};
  std::map<std::string, std::size_t> first_match;
  for (const auto& term : terms_) {
    if (term.tokens.size() > lowered.size()) continue;
    for (std::size_t i = 0; i + term.tokens.size() <= lowered.size(); ++i) {
      if (!std::equal(term.tokens.begin(), term.tokens.end(), lowered.begin() + static_cast<std::ptrdiff_t>(i))) continue;
      ++score[index_of(term.party)];
      auto [it, inserted] = first_match.emplace(term.text, i);
      if (!inserted) it->second = std::min(it->second, i);
    }
  }

  ClassificationResult r;
  r.comment_ref = std::string(comment_ref);
  r.stance = Stance::informacion;
  r.source = "lexicon";
  std::size_t best = 0;
  std::size_t winners = 0;
  Party winner = Party::indeterminado;
  for (Party p : kAllParties) {
    std::size_t s = score[index_of(p)];
    if (s > best) {
      best = s;
      winners = 1;
      winner = p;
    } else if (s == best && s > 0) {
      ++winners;
    }
  }
  r.party = (best > 0 && winners == 1) ? winner : Party::indeterminado;

  std::vector<std::pair<std::size_t, std::string>> ordered;
  for (const auto& [term, pos] : first_match) ordered.emplace_back(pos, term);
  std::sort(ordered.begin(), ordered.end());
  for (auto& [pos, term] : ordered) r.keywords.push_back(std::move(term));
  return r;
}

ClassificationResult classify_lexicon(const corpus::TokenizedText& comment, std::span<const PartyLexicon> lexicons,
                                      std::string_view comment_ref) {
  return LexiconClassifier(lexicons).classify(comment_ref, comment);
}

double coverage(std::span<const ClassificationResult> results) {
  if (results.empty()) throw ValidationError("coverage of an empty result set is undefined");
  return coverage_report(results, 0).fraction;
}

CoverageReport coverage_report(std::span<const ClassificationResult> results, std::size_t unclassified) {
  CoverageReport report;
  report.classified = results.size();
  report.unclassified = unclassified;
  report.assigned = static_cast<std::size_t>(std::count_if(
      results.begin(), results.end(), [](const ClassificationResult& r) { return r.party != Party::indeterminado; }));
  report.fraction = results.empty() ? 0.0
                                    : static_cast<double>(report.assigned) / static_cast<double>(report.classified);
  return report;
}

// ---------------------------------------------------------------------------
// Corpus runs

LexiconCommentClassifier::LexiconCommentClassifier(LexiconClassifier lexicon,
                                                   std::map<std::string, corpus::TokenizedText> tokens)
    : lexicon_(std::move(lexicon)), tokens_(std::move(tokens)) {}

ClassificationResult LexiconCommentClassifier::classify(const std::string& comment_ref, const std::string& text) {
  auto it = tokens_.find(comment_ref);
  if (it != tokens_.end()) return lexicon_.classify(comment_ref, it->second);
  return lexicon_.classify(comment_ref, corpus::tokenize_clean(text, {}));
}

RemoteCommentClassifier::RemoteCommentClassifier(std::vector<PartyProgram> programs,
                                                 std::vector<FewShotExample> examples, std::string template_id,
                                                 CompletionClient& client, RetryPolicy retry, scraper::Clock& clock,
                                                 std::size_t parallelism)
    : programs_(std::move(programs)),
      examples_(std::move(examples)),
      template_id_(std::move(template_id)),
      client_(client),
      retry_(retry),
      clock_(clock),
      parallelism_(std::max<std::size_t>(1, parallelism)) {
  if (programs_.empty()) throw ValidationError("remote mode needs party programs");
  if (examples_.empty()) throw ValidationError("remote mode needs an annotated seed set");
}

ClassificationResult RemoteCommentClassifier::classify(const std::string& comment_ref, const std::string& text) {
  if (text::trim(text).empty()) throw ClassificationError("comment has no text");
  auto bundle = build_prompt(programs_, examples_, text, template_id_);
  return classify_remote(bundle, client_, comment_ref, retry_, clock_);
}

std::string results_header() {
  return "comment_ref\tsource\tTipo\tInclinación\tPalabras_Clave\twarning\traw_response";
}

std::string format_result_row(const ClassificationResult& r) {
  std::vector<std::string> kws;
  for (const auto& k : r.keywords) kws.push_back(one_line(k));
  return text::join({escape_field(r.comment_ref), escape_field(r.source), std::string(display_name(r.stance)),
                     std::string(display_name(r.party)), escape_field(text::join(kws, ", ")),
                     escape_field(r.warning), r.raw_response ? escape_field(*r.raw_response) : std::string()},
                    "\t");
}

std::vector<ClassificationResult> parse_results(std::string_view table) {
  auto lines = text::split(table, '\n');
  if (lines.empty() || lines.front() != results_header()) throw ParseError("results table has an unexpected header");
  std::vector<ClassificationResult> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = text::split(lines[i], '\t');
    if (f.size() != 7) throw ParseError("results line " + std::to_string(i + 1) + ": expected 7 fields");
    ClassificationResult r;
    r.comment_ref = unescape_field(f[0]);
    r.source = unescape_field(f[1]);
    auto s = parse_stance(f[2]);
    auto p = parse_party(f[3]);
    if (!s || !p) throw ParseError("results line " + std::to_string(i + 1) + ": unknown label");
    r.stance = *s;
    r.party = *p;
    r.keywords = split_keywords(unescape_field(f[4]));
    r.warning = unescape_field(f[5]);
    if (!f[6].empty() || (r.source != "lexicon" && r.source != "gold")) r.raw_response = unescape_field(f[6]);
    out.push_back(std::move(r));
  }
  return out;
}

CorpusClassification classify_corpus(std::span<const corpus::Article> articles,
                                     std::span<const annotate::AnnotatedComment> gold,
                                     CommentClassifier& classifier, const std::filesystem::path& results_path) {
  struct Item {
    const corpus::CommentRecord* comment;
  };
  std::vector<Item> items;
  for (const auto& a : articles) {
    for (const auto& c : a.comments) items.push_back({&c});
  }
  std::map<std::string, const annotate::AnnotatedComment*, std::less<>> gold_by_ref;
  for (const auto& g : gold) gold_by_ref.emplace(g.comment_ref, &g);

  std::map<std::string, ClassificationResult, std::less<>> previous;
  bool have_file = std::filesystem::exists(results_path);
  if (have_file) {
    for (auto& r : parse_results(read_file(results_path))) previous.emplace(r.comment_ref, std::move(r));
  }

  using Outcome = std::variant<ClassificationResult, ClassificationFailure>;
  const std::size_t n = items.size();
  std::vector<std::optional<Outcome>> slots(n);
  std::vector<bool> from_previous(n, false);
  std::vector<std::size_t> pending;
  CorpusClassification summary;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& ref = items[i].comment->comment_id;
    if (auto it = previous.find(ref); it != previous.end()) {
      slots[i] = it->second;
      from_previous[i] = true;
      ++summary.resumed;
    } else if (auto g = gold_by_ref.find(ref); g != gold_by_ref.end()) {
      ClassificationResult r;
      r.comment_ref = ref;
      r.stance = g->second->stance;
      r.party = g->second->party;
      r.keywords = g->second->keywords;
      r.source = "gold";
      slots[i] = r;
      ++summary.gold;
    } else {
      pending.push_back(i);
    }
  }

  std::ofstream out(results_path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write " + results_path.string());
  if (!have_file || std::filesystem::file_size(results_path) == 0) out << results_header() << '\n' << std::flush;

  auto run_one = [&](std::size_t i) -> Outcome {
    const auto& c = *items[i].comment;
    try {
      return classifier.classify(c.comment_id, c.body_text);
    } catch (const ClassificationError& e) {
      return ClassificationFailure{c.comment_id, e.what()};
    }
  };

  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr fatal;
  std::vector<std::thread> workers;
  const std::size_t k = std::min(classifier.parallelism(), pending.size());
  if (k > 1) {
    for (std::size_t w = 0; w < k; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t idx = next.fetch_add(1);
          if (idx >= pending.size() || abort) return;
          std::size_t i = pending[idx];
          try {
            Outcome o = run_one(i);
            std::lock_guard lock(mutex);
            slots[i] = std::move(o);
          } catch (...) {
            std::lock_guard lock(mutex);
            if (!fatal) fatal = std::current_exception();
            abort = true;
          }
          ready.notify_all();
        }
      });
    }
  }
  struct Joiner {
    std::vector<std::thread>& threads;
    std::atomic<bool>& abort;
    ~Joiner() {
      for (auto& t : threads) {
        if (t.joinable()) t.join();
      }
    }
  } joiner{workers, abort};

  for (std::size_t i = 0; i < n; ++i) {
    if (from_previous[i]) continue;
    if (!slots[i]) {
      if (workers.empty()) {
        slots[i] = run_one(i);  // fatal errors propagate directly
      } else {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return slots[i].has_value() || abort.load(); });
        if (!slots[i]) break;
      }
    }
    if (const auto* r = std::get_if<ClassificationResult>(&*slots[i])) {
      out << format_result_row(*r) << '\n' << std::flush;
      if (!out) {
        abort = true;
        throw IoError("write failed for " + results_path.string());
      }
      if (r->source != "gold") ++summary.newly_classified;
    }
  }
  abort = true;
  for (auto& t : workers) t.join();
  if (fatal) std::rethrow_exception(fatal);
  out.close();

  std::string canonical = results_header() + "\n";
  for (std::size_t i = 0; i < n; ++i) {
    if (!slots[i]) continue;
    if (auto* r = std::get_if<ClassificationResult>(&*slots[i])) {
      canonical += format_result_row(*r) + "\n";
      summary.results.push_back(std::move(*r));
    } else {
      summary.failures.push_back(std::get<ClassificationFailure>(*slots[i]));
    }
  }
  auto tmp = results_path;
  tmp += ".tmp";
  {
    std::ofstream rewrite(tmp, std::ios::binary | std::ios::trunc);
    rewrite << canonical;
    if (!rewrite.flush()) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, results_path);
  return summary;
}

}  // namespace polmine::classifier
