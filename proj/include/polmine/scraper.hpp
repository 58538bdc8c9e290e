#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polmine/errors.hpp"
#include "polmine/timeutil.hpp"
#include "polmine/url.hpp"

namespace polmine::scraper {

using Millis = std::chrono::milliseconds;
using TimePoint = std::chrono::sys_time<Millis>;

// Injected time source. Everything that waits goes through sleep_until so a
// simulated clock can make politeness delays instantaneous in tests.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimePoint now() = 0;
  virtual void sleep_until(TimePoint t) = 0;
  void sleep_for(Millis d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  TimePoint now() override;
  void sleep_until(TimePoint t) override;
};

// Time only moves when somebody sleeps. Thread-safe; never goes backwards.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(TimePoint start = TimePoint{}) : now_(start) {}
  TimePoint now() override;
  void sleep_until(TimePoint t) override;
  void advance(Millis d);

 private:
  std::mutex mutex_;
  TimePoint now_;
};

struct HttpRequest {
  Url url;
  std::string user_agent;
  Millis timeout{0};
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

class TransportTimeout : public Error {
 public:
  using Error::Error;
};

// Connection-level failure (DNS, refused, reset).
class TransportFailure : public Error {
 public:
  using Error::Error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  // Throws TransportTimeout or TransportFailure; any HTTP status is a
  // response, not an exception.
  virtual HttpResponse get(const HttpRequest& request) = 0;
};

// Live HTTP(S) transport; follows redirects.
class HttpTransport final : public Transport {
 public:
  HttpResponse get(const HttpRequest& request) override;
};

// Serves a directory snapshot of a site. The manifest "urls.tsv" maps
// "<absolute url>\t<relative file>[\t<content type>]" per line. Unknown URLs
// answer 404.
class MirrorTransport final : public Transport {
 public:
  explicit MirrorTransport(std::filesystem::path root);
  HttpResponse get(const HttpRequest& request) override;

 private:
  struct Entry {
    std::filesystem::path file;
    std::string content_type;
  };
  std::filesystem::path root_;
  std::map<std::string, Entry> entries_;
};

struct FetchPolicy {
  Millis min_interval_per_host{1000};
  Millis timeout{15000};
  int max_retries = 3;
  Millis backoff_base{500};
  std::string user_agent = "polmine/1.0 (+research crawler)";
  bool respect_robots = true;

  void validate() const;
};

struct AttemptRecord {
  TimePoint at;
  int status = 0;      // 0 when no response arrived
  std::string error;   // empty on a response
};

struct RawPage {
  std::string url;
  UtcTime fetched_at;
  int status = 0;
  std::string body;
  std::string content_type;
  std::vector<AttemptRecord> attempts;
};

class FetchError : public Error {
 public:
  enum class Kind { retries_exhausted, client_error, disallowed, invalid_url };

  FetchError(Kind kind, const std::string& message, std::vector<AttemptRecord> attempts)
      : Error(message), kind_(kind), attempts_(std::move(attempts)) {}

  Kind kind() const noexcept { return kind_; }
  const std::vector<AttemptRecord>& attempts() const noexcept { return attempts_; }

 private:
  Kind kind_;
  std::vector<AttemptRecord> attempts_;
};

// Shared per-host gate: one request in flight per host, consecutive request
// starts at least min_interval apart. Internally synchronized.
class HostRateLimiter {
 public:
  HostRateLimiter(Clock& clock, Millis min_interval);

  class Lease {
   public:
    TimePoint started() const { return started_; }

   private:
    friend class HostRateLimiter;
    Lease(std::unique_lock<std::mutex> lock, TimePoint started)
        : lock_(std::move(lock)), started_(started) {}
    std::unique_lock<std::mutex> lock_;
    TimePoint started_;
  };

  // Blocks until a request to origin may start and holds the host until the
  // lease is destroyed.
  Lease acquire(const std::string& origin);

 private:
  struct Host {
    std::mutex in_flight;
    std::optional<TimePoint> last_start;
  };

  Clock& clock_;
  Millis min_interval_;
  std::mutex hosts_mutex_;
  std::map<std::string, std::unique_ptr<Host>> hosts_;
};

// Allow/Disallow rules of one robots.txt group.
class RobotsRules {
 public:
  static RobotsRules parse(std::string_view robots_txt, std::string_view user_agent);
  static RobotsRules allow_all() { return {}; }
  bool allowed(std::string_view path) const;

 private:
  std::vector<std::pair<std::string, bool>> rules_;  // prefix, allow
};

// Politeness-aware page fetcher. Safe to share between worker threads.
class Fetcher {
 public:
  Fetcher(Transport& transport, Clock& clock, FetchPolicy policy);

  // Retries 5xx, 429 and transport errors with exponential backoff
  // (backoff_base * 2^(n-1) before retry n) up to max_retries; other
  // non-2xx statuses fail immediately.
  RawPage fetch(std::string_view url);

  const FetchPolicy& policy() const { return policy_; }

 private:
  bool robots_allow(const Url& url);

  Transport& transport_;
  Clock& clock_;
  FetchPolicy policy_;
  HostRateLimiter limiter_;
  std::mutex robots_mutex_;
  std::map<std::string, RobotsRules> robots_;
};

inline RawPage fetch_page(std::string_view url, const FetchPolicy& policy, Transport& transport,
                          Clock& clock) {
  return Fetcher(transport, clock, policy).fetch(url);
}

// ---------------------------------------------------------------------------
// Extraction

struct ArticleContent {
  std::string url;
  std::string title;
  std::string body_text;
  std::string body_html_sanitized;
};

class ExtractionError : public Error {
 public:
  using Error::Error;
};

struct CommentRecord {
  std::string comment_id;
  std::string author;
  std::optional<LocalMinute> posted_at;
  std::optional<int> star_rating;  // filled stars, 0..3
  std::optional<int> vote_count;
  std::string body_text;
  std::optional<std::string> reply_to_author;
  std::optional<std::string> permalink;

  friend bool operator==(const CommentRecord&, const CommentRecord&) = default;
};

struct CommentExtraction {
  std::vector<CommentRecord> records;
  std::vector<std::string> warnings;
};

// Class names identifying the parts of a comment block in page markup.
struct CommentLayout {
  std::string block_class = "comment";
  std::string header_class = "comment-header";
  std::string author_class = "comment-author";
  std::string body_class = "comment-body";
  std::string permalink_text = "Lien permanent";
};

// Page body decoded to UTF-8 using the Content-Type charset or a <meta>
// declaration.
std::string decode_body(const RawPage& page);

// Finds the container with id "article" (or an <article> element), drops
// script and style elements. Throws ExtractionError when there is none.
ArticleContent extract_article(const RawPage& page);

// One record per comment block in document order. Headers look like
// "Eric F 26 juin 14:23 ★☆☆ (3 votes)"; the page omits the year, so
// collection_year supplies it.
CommentExtraction extract_comments(const RawPage& page, int collection_year,
                                   const CommentLayout& layout = {});

// Absolute URL of a rel="next" pagination link, if any.
std::optional<std::string> next_page_link(const RawPage& page);

// 1..12 for a French month name, case-insensitive.
std::optional<unsigned> french_month(std::string_view name);

}  // namespace polmine::scraper
