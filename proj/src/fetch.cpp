#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "polmine/scraper.hpp"
#include "polmine/text.hpp"

namespace polmine::scraper {

TimePoint SystemClock::now() {
  return std::chrono::floor<Millis>(std::chrono::system_clock::now());
}

void SystemClock::sleep_until(TimePoint t) { std::this_thread::sleep_until(t); }

TimePoint SimulatedClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

void SimulatedClock::sleep_until(TimePoint t) {
  std::lock_guard lock(mutex_);
  now_ = std::max(now_, t);
}

void SimulatedClock::advance(Millis d) {
  std::lock_guard lock(mutex_);
  now_ += d;
}

// ---------------------------------------------------------------------------

MirrorTransport::MirrorTransport(std::filesystem::path root) : root_(std::move(root)) {
  std::ifstream manifest(root_ / "urls.tsv");
  if (!manifest) throw IoError("cannot open mirror manifest " + (root_ / "urls.tsv").string());
  std::string line;
  while (std::getline(manifest, line)) {
    auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = text::split(trimmed, '\t');
    if (fields.size() < 2) continue;
    Entry entry{root_ / fields[1], fields.size() > 2 ? fields[2] : "text/html; charset=utf-8"};
    auto url = Url::parse(fields[0]);
    entries_[url ? url->to_string() : fields[0]] = std::move(entry);
  }
}

HttpResponse MirrorTransport::get(const HttpRequest& request) {
  Url key = request.url;
  key.fragment.clear();
  auto it = entries_.find(key.to_string());
  if (it == entries_.end()) return {404, "not found", "text/plain"};
  std::ifstream in(it->second.file, std::ios::binary);
  if (!in) throw TransportFailure("mirror file missing: " + it->second.file.string());
  std::ostringstream body;
  body << in.rdbuf();
  return {200, body.str(), it->second.content_type};
}

// ---------------------------------------------------------------------------

void FetchPolicy::validate() const {
  if (min_interval_per_host.count() < 0) throw ValidationError("min_interval_per_host must be >= 0");
  if (timeout.count() <= 0) throw ValidationError("timeout must be > 0");
  if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (backoff_base.count() < 0) throw ValidationError("backoff_base must be >= 0");
}

HostRateLimiter::HostRateLimiter(Clock& clock, Millis min_interval)
    : clock_(clock), min_interval_(min_interval) {}

HostRateLimiter::Lease HostRateLimiter::acquire(const std::string& origin) {
  Host* host;
  {
    std::lock_guard lock(hosts_mutex_);
    auto& slot = hosts_[origin];
    if (!slot) slot = std::make_unique<Host>();
    host = slot.get();
  }
  std::unique_lock in_flight(host->in_flight);
  if (host->last_start) clock_.sleep_until(*host->last_start + min_interval_);
  TimePoint started = clock_.now();
  host->last_start = started;
  return Lease(std::move(in_flight), started);
}

// ---------------------------------------------------------------------------

RobotsRules RobotsRules::parse(std::string_view robots_txt, std::string_view user_agent) {
  // Groups of consecutive User-agent lines followed by their rules.
  struct Group {
    std::vector<std::string> agents;
    std::vector<std::pair<std::string, bool>> rules;
  };
  std::vector<Group> groups;
  bool in_agents = false;
  for (const auto& raw : text::split(robots_txt, '\n')) {
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    std::string key = text::to_lower(text::trim(line.substr(0, colon)));
    std::string value(text::trim(line.substr(colon + 1)));
    if (key == "user-agent") {
      if (!in_agents) groups.emplace_back();
      groups.back().agents.push_back(text::to_lower(value));
      in_agents = true;
    } else if (key == "allow" || key == "disallow") {
      in_agents = false;
      if (groups.empty()) continue;
      if (key == "disallow" && value.empty()) continue;
      groups.back().rules.emplace_back(value, key == "allow");
    } else {
      in_agents = false;
    }
  }
  std::string ua = text::to_lower(user_agent);
  auto slash = ua.find('/');
  std::string product = ua.substr(0, slash);
  const Group* chosen = nullptr;
  for (const auto& g : groups) {
    for (const auto& a : g.agents) {
      if (a != "*" && !a.empty() && product.find(a) != std::string::npos) chosen = &g;
    }
    if (chosen) break;
  }
  if (!chosen) {
    for (const auto& g : groups) {
      if (std::find(g.agents.begin(), g.agents.end(), "*") != g.agents.end()) {
        chosen = &g;
        break;
      }
    }
  }
  RobotsRules rules;
  if (chosen) rules.rules_ = chosen->rules;
  return rules;
}

bool RobotsRules::allowed(std::string_view path) const {
  std::size_t best = 0;
  bool verdict = true;
  for (const auto& [prefix, allow] : rules_) {
    if (!path.starts_with(prefix)) continue;
    if (prefix.size() > best || (prefix.size() == best && allow)) {
      best = prefix.size();
      verdict = allow;
    }
  }
  return verdict;
}

// ---------------------------------------------------------------------------

Fetcher::Fetcher(Transport& transport, Clock& clock, FetchPolicy policy)
    : transport_(transport),
      clock_(clock),
      policy_(std::move(policy)),
      limiter_(clock, policy_.min_interval_per_host) {
  policy_.validate();
}

bool Fetcher::robots_allow(const Url& url) {
  std::string origin = url.origin();
  {
    std::lock_guard lock(robots_mutex_);
    if (auto it = robots_.find(origin); it != robots_.end()) return it->second.allowed(url.path);
  }
  RobotsRules rules = RobotsRules::allow_all();
  Url robots_url = url;
  robots_url.path = "/robots.txt";
  robots_url.query.clear();
  robots_url.fragment.clear();
  try {
    auto lease = limiter_.acquire(origin);
    HttpResponse resp = transport_.get({robots_url, policy_.user_agent, policy_.timeout});
    if (resp.status >= 200 && resp.status < 300) rules = RobotsRules::parse(resp.body, policy_.user_agent);
  } catch (const Error&) {
    // unreachable robots.txt: no restrictions
  }
  std::lock_guard lock(robots_mutex_);
  auto [it, inserted] = robots_.emplace(origin, std::move(rules));
  return it->second.allowed(url.path);
}

RawPage Fetcher::fetch(std::string_view url_text) {
  std::vector<AttemptRecord> attempts;
  auto url = Url::parse(url_text);
  if (!url) throw FetchError(FetchError::Kind::invalid_url, "not an absolute URL: " + std::string(url_text), {});
  if (policy_.respect_robots && !robots_allow(*url)) {
    throw FetchError(FetchError::Kind::disallowed, "disallowed by robots.txt: " + url->to_string(), {});
  }
  HttpRequest request{*url, policy_.user_agent, policy_.timeout};
  std::string origin = url->origin();

  for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
    if (attempt > 0) clock_.sleep_for(policy_.backoff_base * (1LL << std::min(attempt - 1, 20)));
    auto lease = limiter_.acquire(origin);
    AttemptRecord record{lease.started(), 0, {}};
    HttpResponse response;
    try {
      response = transport_.get(request);
    } catch (const TransportTimeout& e) {
      record.error = std::string("timeout: ") + e.what();
      attempts.push_back(std::move(record));
      continue;
    } catch (const TransportFailure& e) {
      record.error = std::string("transport: ") + e.what();
      attempts.push_back(std::move(record));
      continue;
    }
    record.status = response.status;
    attempts.push_back(record);
    if (response.status >= 200 && response.status < 300) {
      RawPage page;
      page.url = url->to_string();
      page.fetched_at = std::chrono::floor<std::chrono::seconds>(clock_.now());
      page.status = response.status;
      page.body = std::move(response.body);
      page.content_type = std::move(response.content_type);
      page.attempts = std::move(attempts);
      return page;
    }
    if (response.status >= 500 || response.status == 429) continue;
    throw FetchError(FetchError::Kind::client_error,
                     "HTTP " + std::to_string(response.status) + " for " + url->to_string(),
                     std::move(attempts));
  }
  throw FetchError(FetchError::Kind::retries_exhausted,
                   "giving up on " + url->to_string() + " after " + std::to_string(attempts.size()) +
                       " attempts",
                   std::move(attempts));
}

}  // namespace polmine::scraper
