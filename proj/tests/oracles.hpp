#pragma once

// Brute-force reference implementations and test doubles. The oracles are
// written independently of the library: slow, obvious loops over code points
// and token sets.

#include <unistd.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <atomic>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polmine/analysis.hpp"
#include "polmine/classifier.hpp"
#include "polmine/corpus.hpp"
#include "polmine/scraper.hpp"
#include "polmine/text.hpp"

namespace oracle {

using polmine::Party;

inline std::filesystem::path source_dir() { return POLMINE_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "tests" / "fixtures" / rel; }
inline std::filesystem::path data(const std::string& rel) { return source_dir() / "data" / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("polmine-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string lower(const std::string& s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(s);
  std::string out;
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    icu::UnicodeString one(u_tolower(c));
    one.toUTF8String(out);
    i += U16_LENGTH(c);
  }
  return out;
}

// Splits at every code point that is not a letter or digit; drops tokens
// whose lowercase form is a stopword.
inline std::vector<std::string> tokenize(const std::string& text, const std::set<std::string>& stopwords) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(text);
  std::vector<std::string> out;
  icu::UnicodeString current;
  auto flush = [&] {
    if (current.isEmpty()) return;
    std::string tok;
    current.toUTF8String(tok);
    if (!stopwords.count(lower(tok))) out.push_back(tok);
    current.remove();
  };
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    if (u_isalnum(c)) {
      current.append(c);
    } else {
      flush();
    }
    i += U16_LENGTH(c);
  }
  flush();
  return out;
}

// Recount of document frequency from scratch, then the threshold rule.
inline std::vector<std::vector<std::string>> prune(const std::vector<std::vector<std::string>>& docs, double min_df,
                                                   double max_df) {
  std::vector<std::vector<std::string>> out;
  for (const auto& d : docs) {
    std::vector<std::string> kept;
    for (const auto& t : d) {
      std::size_t containing = 0;
      for (const auto& other : docs) {
        if (std::find(other.begin(), other.end(), t) != other.end()) ++containing;
      }
      double df = static_cast<double>(containing) / static_cast<double>(docs.size());
      if (df >= min_df && df <= max_df) kept.push_back(t);
    }
    out.push_back(std::move(kept));
  }
  return out;
}

struct LexiconVerdict {
  Party party = Party::indeterminado;
  std::map<Party, int> scores;
  std::set<std::string> matched;
};

// Scores every party by counting each window of the comment that equals a
// term, case-insensitively.
inline LexiconVerdict score_lexicon(const std::vector<std::string>& comment_tokens,
                                    const std::vector<polmine::classifier::PartyLexicon>& lexicons,
                                    const std::set<std::string>& stopwords) {
  LexiconVerdict v;
  std::vector<std::string> words;
  for (const auto& t : comment_tokens) words.push_back(lower(t));
  for (const auto& lex : lexicons) {
    for (const auto& term : lex.terms) {
      std::vector<std::string> parts;
      for (const auto& p : tokenize(term, stopwords)) parts.push_back(lower(p));
      if (parts.empty()) continue;
      for (std::size_t start = 0; start + parts.size() <= words.size(); ++start) {
        bool equal = true;
        for (std::size_t k = 0; k < parts.size(); ++k) equal = equal && words[start + k] == parts[k];
        if (equal) {
          v.scores[lex.party] += 1;
          v.matched.insert(term);
        }
      }
    }
  }
  int best = 0;
  for (auto& [p, s] : v.scores) best = std::max(best, s);
  int holders = 0;
  for (auto& [p, s] : v.scores) {
    if (s == best && best > 0) {
      ++holders;
      v.party = p;
    }
  }
  if (holders != 1) v.party = Party::indeterminado;
  return v;
}

// For each group: lowercase terms present in some comment of the group and
// in no comment of any other group, with their in-group occurrence counts.
inline std::vector<std::map<std::string, std::size_t>> distinctive(
    const std::vector<std::pair<Party, std::vector<std::string>>>& comments,
    const std::vector<std::set<Party>>& groups) {
  auto group_of = [&](Party p) -> int {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].count(p)) return static_cast<int>(g);
    }
    return -1;
  };
  std::vector<std::set<std::string>> seen(groups.size());
  std::vector<std::map<std::string, std::size_t>> counts(groups.size());
  for (const auto& [party, tokens] : comments) {
    int g = group_of(party);
    if (g < 0 || party == Party::indeterminado) continue;
    for (const auto& t : tokens) {
      seen[g].insert(lower(t));
      counts[g][lower(t)] += 1;
    }
  }
  std::vector<std::map<std::string, std::size_t>> out(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& term : seen[g]) {
      bool elsewhere = false;
      for (std::size_t h = 0; h < groups.size(); ++h) elsewhere = elsewhere || (h != g && seen[h].count(term));
      if (!elsewhere) out[g][term] = counts[g][term];
    }
  }
  return out;
}

// Nested-loop recount of a party x category table.
inline std::map<std::pair<Party, std::string>, std::size_t> interest_counts(
    const std::vector<polmine::classifier::ClassificationResult>& results,
    const std::vector<polmine::corpus::Article>& articles) {
  std::map<std::pair<Party, std::string>, std::size_t> out;
  for (const auto& r : results) {
    for (const auto& a : articles) {
      for (const auto& c : a.comments) {
        if (c.comment_id == r.comment_ref) out[{r.party, a.category_label}] += 1;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Test doubles

// Answers from a per-URL queue of scripted outcomes; the last outcome
// repeats. Records every request.
class ScriptedTransport : public polmine::scraper::Transport {
 public:
  enum class Kind { response, timeout, failure };
  struct Outcome {
    Kind kind = Kind::response;
    int status = 200;
    std::string body;
    std::string content_type = "text/html; charset=utf-8";
  };

  void script(const std::string& url, std::vector<Outcome> outcomes) {
    std::lock_guard lock(mutex_);
    scripts_[url] = std::deque<Outcome>(outcomes.begin(), outcomes.end());
  }

  polmine::scraper::HttpResponse get(const polmine::scraper::HttpRequest& request) override {
    Outcome o;
    {
      std::lock_guard lock(mutex_);
      auto key = request.url.to_string();
      requests_.push_back(key);
      auto it = scripts_.find(key);
      if (it == scripts_.end() || it->second.empty()) return {404, "", "text/plain"};
      o = it->second.front();
      if (it->second.size() > 1) it->second.pop_front();
    }
    if (on_request) on_request(request);
    if (o.kind == Kind::timeout) throw polmine::scraper::TransportTimeout("scripted timeout");
    if (o.kind == Kind::failure) throw polmine::scraper::TransportFailure("scripted failure");
    return {o.status, o.body, o.content_type};
  }

  std::vector<std::string> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }
  std::size_t count(const std::string& url) const {
    auto r = requests();
    return static_cast<std::size_t>(std::count(r.begin(), r.end(), url));
  }

  std::function<void(const polmine::scraper::HttpRequest&)> on_request;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<Outcome>> scripts_;
  std::vector<std::string> requests_;
};

// Completion endpoint replaying a reply per comment text (matched by
// substring of the prompt's target line). Counts calls per target.
class ScriptedCompletion : public polmine::classifier::CompletionClient {
 public:
  struct Reply {
    std::string text;
    bool fail = false;   // throw CompletionError
    bool fatal = false;  // throw a non-classification error (simulated crash)
  };

  // Comments are keyed the way the prompt renders them: on one line with
  // whitespace runs collapsed.
  static std::string key(const std::string& comment) {
    std::string flat = comment;
    for (auto& c : flat) {
      if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    }
    return polmine::text::collapse_whitespace(flat);
  }

  void script(const std::string& comment, Reply reply) {
    std::lock_guard lock(mutex_);
    replies_[key(comment)] = std::move(reply);
  }

  std::string complete(const std::string& prompt) override {
    auto pos = prompt.rfind("Comentario: ");
    std::string target = prompt.substr(pos + 12);
    target = target.substr(0, target.find('\n'));
    Reply r;
    {
      std::lock_guard lock(mutex_);
      ++calls_[target];
      ++total_;
      auto it = replies_.find(target);
      if (it == replies_.end()) throw polmine::classifier::CompletionError("unscripted comment: " + target);
      r = it->second;
    }
    if (r.fatal) throw std::runtime_error("endpoint process died");
    if (r.fail) throw polmine::classifier::CompletionError("scripted transport failure");
    return r.text;
  }
  std::string model_id() const override { return "stub-model"; }

  std::size_t calls(const std::string& comment) const {
    std::lock_guard lock(mutex_);
    auto it = calls_.find(key(comment));
    return it == calls_.end() ? 0 : it->second;
  }
  std::size_t total() const {
    std::lock_guard lock(mutex_);
    return total_;
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Reply> replies_;
  std::map<std::string, std::size_t> calls_;
  std::size_t total_ = 0;
};

// ---------------------------------------------------------------------------
// Generators

inline std::string random_text(std::mt19937_64& rng, std::size_t max_words) {
  static const std::vector<std::string> words = {
      "paix", "Ukraine", "résistance", "l'État", "Élysée", "souverainiste", "a<b", "x&y", "\"cité\"",
      "'quote'", "🇫🇷", "ñandú", "über", "  ", "\t", "\n", "2024", "Macron:", "»", "«", "→", "]]>", "&amp;"};
  std::uniform_int_distribution<std::size_t> n(0, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string out;
  for (std::size_t i = 0, len = n(rng); i < len; ++i) {
    if (i) out += ' ';
    out += words[pick(rng)];
  }
  return out;
}

inline polmine::corpus::Article random_article(std::mt19937_64& rng, std::size_t index) {
  using namespace std::chrono;
  std::uniform_int_distribution<int> day(1, 28), month(1, 12), hour(0, 23), minute(0, 59), coin(0, 1),
      stars(0, 3), votes(0, 500), comments(0, 6);
  polmine::corpus::Article a;
  a.guid = "https://example.org/article/" + std::to_string(index) + "?q=" + random_text(rng, 1);
  a.title = random_text(rng, 8);
  a.category_label = coin(rng) ? "Política francesa" : "Política internacional";
  a.published_date = year{2024} / month(rng) / day(rng);
  a.summary = random_text(rng, 20);
  for (int c = 0, n = comments(rng); c < n; ++c) {
    polmine::corpus::CommentRecord r;
    r.comment_id = a.guid + "#forum" + std::to_string(c);
    r.author = coin(rng) ? "Eric F" : random_text(rng, 2);
    if (coin(rng)) r.posted_at = polmine::LocalMinute{year{2024} / month(rng) / day(rng), hour(rng), minute(rng)};
    if (coin(rng)) {
      r.star_rating = stars(rng);
      r.vote_count = votes(rng);
    }
    r.body_text = random_text(rng, 30);
    if (coin(rng)) r.reply_to_author = random_text(rng, 2);
    if (coin(rng)) r.permalink = r.comment_id;
    a.comments.push_back(std::move(r));
  }
  return a;
}

}  // namespace oracle
