#include "polmine/pipeline.hpp"

#include <chrono>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "polmine/annotate.hpp"
#include "polmine/text.hpp"

namespace polmine::pipeline {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out.flush()) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string require(const std::filesystem::path& path, std::string_view producer) {
  if (!std::filesystem::exists(path)) throw MissingArtifact(path, producer);
  return read_file(path);
}

std::vector<ordered_json> read_jsonl(const std::filesystem::path& path, std::string_view producer) {
  std::vector<ordered_json> out;
  std::size_t line_no = 0;
  for (const auto& line : text::split(require(path, producer), '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(path.string() + " line " + std::to_string(line_no) + " is not JSON");
    out.push_back(std::move(j));
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

Date required_date(const std::string& text, std::string_view key) {
  auto d = parse_date(text);
  if (!d) throw ValidationError(std::string(key) + " must be YYYY-MM-DD, got '" + text + "'");
  return *d;
}

template <class T>
std::optional<T> opt(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

ordered_json item_json(const feed::FeedItem& item) {
  return {{"title", item.title},
          {"link", item.link},
          {"guid", item.guid},
          {"guid_is_permalink", item.guid_is_permalink},
          {"published_at", item.published_at ? ordered_json(format_iso_utc(*item.published_at)) : ordered_json()},
          {"author", item.author ? ordered_json(*item.author) : ordered_json()},
          {"description", item.description},
          {"language", item.language},
          {"category_label", item.category_label},
          {"category_url", item.category_url ? ordered_json(*item.category_url) : ordered_json()}};
}

feed::FeedItem item_from_json(const ordered_json& j) {
  feed::FeedItem item;
  item.title = j.at("title");
  item.link = j.at("link");
  item.guid = j.at("guid");
  item.guid_is_permalink = j.at("guid_is_permalink");
  if (auto s = opt<std::string>(j, "published_at")) item.published_at = parse_iso_utc(*s);
  item.author = opt<std::string>(j, "author");
  item.description = j.at("description");
  item.language = j.at("language");
  item.category_label = j.at("category_label");
  item.category_url = opt<std::string>(j, "category_url");
  return item;
}

ordered_json comment_json(const corpus::CommentRecord& c) {
  auto o = [](const auto& v) { return v ? ordered_json(*v) : ordered_json(); };
  return {{"comment_id", c.comment_id},
          {"author", c.author},
          {"posted_at", c.posted_at ? ordered_json(format_local_minute(*c.posted_at)) : ordered_json()},
          {"star_rating", o(c.star_rating)},
          {"vote_count", o(c.vote_count)},
          {"body_text", c.body_text},
          {"reply_to_author", o(c.reply_to_author)},
          {"permalink", o(c.permalink)}};
}

corpus::CommentRecord comment_from_json(const ordered_json& j) {
  corpus::CommentRecord c;
  c.comment_id = j.at("comment_id");
  c.author = j.at("author");
  if (auto s = opt<std::string>(j, "posted_at")) c.posted_at = parse_local_minute(*s);
  c.star_rating = opt<int>(j, "star_rating");
  c.vote_count = opt<int>(j, "vote_count");
  c.body_text = j.at("body_text");
  c.reply_to_author = opt<std::string>(j, "reply_to_author");
  c.permalink = opt<std::string>(j, "permalink");
  return c;
}

std::chrono::milliseconds millis(const ordered_json& j, const char* key, std::chrono::milliseconds fallback) {
  if (!j.contains(key)) return fallback;
  auto v = j.at(key).get<long long>();
  return std::chrono::milliseconds{v};
}

std::string now_iso() {
  auto now = std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  auto secs = std::chrono::floor<std::chrono::seconds>(now);
  auto ms = (now - secs).count();
  std::string s = format_iso_utc(secs);
  char frac[24];
  std::snprintf(frac, sizeof frac, ".%03lld", static_cast<long long>(ms));
  return s.insert(s.size() - 1, frac);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void RunConfig::validate() const {
  if (since && until && *until < *since) throw ValidationError("since must not be after until");
  if (output_dir.empty()) throw ValidationError("output_dir is empty");
  for (const auto& f : feeds) f.validate();
  fetch.validate();
  vocab.validate();
  if (transport != "http" && transport != "mirror") {
    throw ValidationError("fetch.transport must be 'http' or 'mirror', got '" + transport + "'");
  }
  if (transport == "mirror" && mirror_dir.empty()) throw ValidationError("fetch.mirror_dir is required for the mirror transport");
  if (max_comment_pages < 1) throw ValidationError("fetch.max_comment_pages must be >= 1");
  if (sample_size < 1) throw ValidationError("annotation.sample_size must be >= 1");
  if (mode == ClassifierMode::lexicon && lexicons_dir.empty()) {
    throw ValidationError("classifier.lexicons_dir is required in lexicon mode");
  }
  if (mode == ClassifierMode::remote) {
    if (!endpoint) throw ValidationError("classifier.endpoint is required in remote mode");
    if (endpoint->url.empty() || endpoint->model.empty()) {
      throw ValidationError("classifier.endpoint needs url and model");
    }
    if (endpoint->parallelism < 1) throw ValidationError("classifier.endpoint.parallelism must be >= 1");
    if (programs_dir.empty()) throw ValidationError("classifier.programs_dir is required in remote mode");
  }
  analysis::validate_grouping(groups);
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  auto j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("config is not a JSON object");
  RunConfig c;
  try {
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir"));
    for (const auto& f : j.value("feeds", ordered_json::array())) {
      c.feeds.push_back({f.at("base_url"), f.at("rubrique_id"), f.at("category_label")});
    }
    if (auto s = opt<std::string>(j, "since")) c.since = required_date(*s, "since");
    if (auto s = opt<std::string>(j, "until")) c.until = required_date(*s, "until");
    c.collection_year = j.value("collection_year", 0);

    const auto fetch = j.value("fetch", ordered_json::object());
    c.fetch.min_interval_per_host = millis(fetch, "min_interval_ms", c.fetch.min_interval_per_host);
    c.fetch.timeout = millis(fetch, "timeout_ms", c.fetch.timeout);
    c.fetch.max_retries = fetch.value("max_retries", c.fetch.max_retries);
    c.fetch.backoff_base = millis(fetch, "backoff_base_ms", c.fetch.backoff_base);
    c.fetch.user_agent = fetch.value("user_agent", c.fetch.user_agent);
    c.fetch.respect_robots = fetch.value("respect_robots", c.fetch.respect_robots);
    c.transport = fetch.value("transport", c.transport);
    if (auto m = opt<std::string>(fetch, "mirror_dir")) c.mirror_dir = resolve(base_dir, *m);
    c.max_comment_pages = fetch.value("max_comment_pages", c.max_comment_pages);

    const auto vocab = j.value("vocab", ordered_json::object());
    c.vocab.min_doc_coverage = vocab.value("min_doc_coverage", c.vocab.min_doc_coverage);
    c.vocab.max_doc_coverage = vocab.value("max_doc_coverage", c.vocab.max_doc_coverage);
    c.vocab.language = vocab.value("language", c.vocab.language);
    if (auto s = opt<std::string>(vocab, "stopwords")) c.vocab.stopwords = corpus::load_stopwords(resolve(base_dir, *s));

    const auto ann = j.value("annotation", ordered_json::object());
    c.sample_size = ann.value("sample_size", c.sample_size);
    c.sample_seed = ann.value("seed", c.sample_seed);
    if (auto s = opt<std::string>(ann, "annotations")) c.annotations = resolve(base_dir, *s);

    const auto cls = j.value("classifier", ordered_json::object());
    std::string mode = cls.value("mode", std::string("lexicon"));
    if (mode == "lexicon") {
      c.mode = ClassifierMode::lexicon;
    } else if (mode == "remote") {
      c.mode = ClassifierMode::remote;
    } else {
      throw ValidationError("classifier.mode must be 'lexicon' or 'remote', got '" + mode + "'");
    }
    if (auto s = opt<std::string>(cls, "lexicons_dir")) c.lexicons_dir = resolve(base_dir, *s);
    if (auto s = opt<std::string>(cls, "programs_dir")) c.programs_dir = resolve(base_dir, *s);
    c.prompt_template = cls.value("template", c.prompt_template);
    if (cls.contains("endpoint")) {
      const auto& e = cls.at("endpoint");
      if (e.contains("api_key")) throw ValidationError("classifier.endpoint must not hold a key; use api_key_env");
      classifier::EndpointConfig ep;
      ep.url = e.value("url", std::string());
      ep.model = e.value("model", std::string());
      ep.api_key_env = e.value("api_key_env", ep.api_key_env);
      ep.timeout = millis(e, "timeout_ms", ep.timeout);
      ep.parallelism = e.value("parallelism", ep.parallelism);
      ep.max_retries = e.value("max_retries", ep.max_retries);
      ep.backoff_base = millis(e, "backoff_base_ms", ep.backoff_base);
      c.endpoint = ep;
    }

    for (const auto& g : j.value("groups", ordered_json::array())) {
      analysis::AffinityGroup group{g.at("name"), {}};
      for (const auto& code : g.at("parties")) {
        auto p = parse_party(code.get<std::string>());
        if (!p) throw ValidationError("group '" + group.name + "' names unknown party '" + code.get<std::string>() + "'");
        if (!group.members.insert(*p).second) throw ValidationError("group '" + group.name + "' repeats a party");
      }
      c.groups.push_back(std::move(group));
    }

    const auto an = j.value("analysis", ordered_json::object());
    std::string ranking = an.value("ranking", std::string("strict"));
    if (ranking == "strict") {
      c.ranking = analysis::TermRanking::strict;
    } else if (ranking == "log_odds") {
      c.ranking = analysis::TermRanking::log_odds;
    } else {
      throw ValidationError("analysis.ranking must be 'strict' or 'log_odds'");
    }
    std::string format = j.value("report", ordered_json::object()).value("format", std::string("delimited"));
    auto f = report::parse_table_format(format);
    if (!f) throw ValidationError("report.format must be 'delimited' or 'structured-record'");
    c.format = *f;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(read_file(path), base);
}

// ---------------------------------------------------------------------------
// Run log and services

RunLog::RunLog(const std::filesystem::path& path, bool echo) : out_(path, std::ios::app), echo_(echo) {
  if (!out_) throw IoError("cannot open " + path.string());
}

void RunLog::info(std::string_view message) { write("INFO", message); }
void RunLog::warn(std::string_view message) { write("WARN", message); }

void RunLog::write(std::string_view level, std::string_view message) {
  out_ << now_iso() << ' ' << level << ' ' << message << '\n' << std::flush;
  if (echo_) std::cerr << level << ' ' << message << '\n';
}

Services default_services(const RunConfig& config) {
  Services s;
  if (config.transport == "mirror") {
    s.transport = std::make_shared<scraper::MirrorTransport>(config.mirror_dir);
  } else {
    s.transport = std::make_shared<scraper::HttpTransport>();
  }
  s.clock = std::make_shared<scraper::SystemClock>();
  return s;
}

// ---------------------------------------------------------------------------
// Stages

Pipeline::Pipeline(RunConfig config, Services services) : config_(std::move(config)), services_(std::move(services)) {
  config_.validate();
  if (!services_.clock) services_.clock = std::make_shared<scraper::SystemClock>();
  std::error_code ec;
  std::filesystem::create_directories(config_.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config_.output_dir.string() + ": " + ec.message());
}

RunLog& Pipeline::log() {
  if (!log_) log_ = std::make_unique<RunLog>(path(artifact::kRunLog));
  return *log_;
}

void Pipeline::fetch_feeds() {
  if (config_.feeds.empty()) throw ValidationError("no feeds configured");
  if (!services_.transport) throw ValidationError("no transport configured");
  scraper::Fetcher fetcher(*services_.transport, *services_.clock, config_.fetch);
  std::set<std::string> seen;
  std::string out;
  std::size_t kept = 0;
  for (const auto& source : config_.feeds) {
    auto url = feed::build_feed_url(source);
    auto page = fetcher.fetch(url);
    auto parsed = feed::parse_feed(scraper::decode_body(page), source);
    for (const auto& w : parsed.warnings) log().warn(url + ": " + w);
    for (const auto& item : parsed.items) {
      if (!item.published_at) {
        log().warn("skipping '" + item.guid + "': no publication date");
        continue;
      }
      Date day{std::chrono::floor<std::chrono::days>(*item.published_at)};
      if ((config_.since && day < *config_.since) || (config_.until && day > *config_.until)) continue;
      if (!seen.insert(item.guid).second) continue;
      out += item_json(item).dump() + "\n";
      ++kept;
    }
  }
  write_file(path(artifact::kFeeds), out);
  log().info("fetch-feeds: " + std::to_string(kept) + " items");
}

void Pipeline::scrape() {
  auto items = read_jsonl(path(artifact::kFeeds), "fetch-feeds");
  if (!services_.transport) throw ValidationError("no transport configured");
  scraper::Fetcher fetcher(*services_.transport, *services_.clock, config_.fetch);
  int year = config_.collection_year;
  if (year == 0 && config_.since) year = static_cast<int>(config_.since->year());
  if (year == 0) {
    year = static_cast<int>(Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())}.year());
  }

  std::string out;
  std::size_t articles = 0;
  std::size_t comments = 0;
  for (const auto& j : items) {
    auto item = item_from_json(j);
    try {
      auto page = fetcher.fetch(item.link);
      auto content = scraper::extract_article(page);
      ordered_json list = ordered_json::array();
      std::set<std::string> visited{page.url};
      for (int n = 0; n < config_.max_comment_pages; ++n) {
        auto extraction = scraper::extract_comments(page, year);
        for (const auto& w : extraction.warnings) log().warn(page.url + ": " + w);
        for (const auto& c : extraction.records) list.push_back(comment_json(c));
        auto next = scraper::next_page_link(page);
        if (!next || !visited.insert(*next).second) break;
        page = fetcher.fetch(*next);
      }
      comments += list.size();
      ++articles;
      Date day{std::chrono::floor<std::chrono::days>(*item.published_at)};
      ordered_json record = {{"guid", item.guid},
                             {"link", item.link},
                             {"title", item.title.empty() ? content.title : item.title},
                             {"category_label", item.category_label},
                             {"published_date", format_date(day)},
                             {"summary", item.description},
                             {"comments", list}};
      out += record.dump() + "\n";
    } catch (const scraper::FetchError& e) {
      log().warn("skipping " + item.link + ": " + e.what());
    } catch (const scraper::ExtractionError& e) {
      log().warn("skipping " + item.link + ": " + e.what());
    }
  }
  write_file(path(artifact::kScraped), out);
  log().info("scrape: " + std::to_string(articles) + " articles, " + std::to_string(comments) + " comments");
}

void Pipeline::build_corpus() {
  auto records = read_jsonl(path(artifact::kScraped), "scrape");
  corpus::CorpusStore store;
  for (const auto& j : records) {
    corpus::Article a;
    try {
      a.guid = j.at("guid");
      a.title = j.at("title");
      a.category_label = j.at("category_label");
      a.published_date = required_date(j.at("published_date"), "published_date");
      a.summary = j.at("summary");
      for (const auto& c : j.at("comments")) a.comments.push_back(comment_from_json(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path(artifact::kScraped).string() + ": " + e.what());
    }
    store.upsert(std::move(a));
  }
  for (const auto& r : store.revisions()) log().warn("article " + r.guid + " revised: " + r.note);
  corpus::index_comments(store.articles());  // rejects duplicate comment ids
  store.save(path(artifact::kCorpus));
  write_file(path(artifact::kCorpusRecords), corpus::export_records(store.articles()));
  log().info("build-corpus: " + std::to_string(store.size()) + " articles");
}

std::vector<corpus::Article> Pipeline::load_corpus() const {
  return corpus::parse_corpus(require(path(artifact::kCorpus), "build-corpus"));
}

std::map<std::string, corpus::TokenizedText> Pipeline::corpus_tokens(std::span<const corpus::Article> articles) const {
  std::vector<std::string> refs;
  std::vector<corpus::TokenizedText> docs;
  for (const auto& a : articles) {
    for (const auto& c : a.comments) {
      refs.push_back(c.comment_id);
      docs.push_back(corpus::tokenize_clean(c.body_text, config_.vocab));
    }
  }
  std::map<std::string, corpus::TokenizedText> out;
  if (docs.empty()) return out;
  auto pruned = corpus::prune_vocabulary(std::move(docs), config_.vocab);
  for (std::size_t i = 0; i < refs.size(); ++i) out.emplace(refs[i], std::move(pruned.docs[i]));
  return out;
}

void Pipeline::sample_annotate() {
  auto articles = load_corpus();
  auto refs = annotate::sample_seed_set(articles, config_.sample_size, config_.sample_seed);
  write_file(path(artifact::kTemplate), annotate::export_annotation_template(refs, articles));
  log().info("sample-annotate: " + std::to_string(refs.size()) + " comments to annotate");
}

void Pipeline::import_annotations(const std::optional<std::filesystem::path>& source) {
  auto from = source ? source : config_.annotations;
  if (!from) throw ValidationError("no annotations file given (set annotation.annotations or pass --in)");
  auto articles = load_corpus();
  if (!std::filesystem::exists(*from)) throw MissingArtifact(*from, "sample-annotate' and fill in the template, then 'import-annotations");
  auto annotations = annotate::import_annotations(read_file(*from));
  auto index = corpus::index_comments(articles);
  for (const auto& a : annotations) {
    if (!index.count(a.comment_ref)) throw ValidationError("annotation for unknown comment '" + a.comment_ref + "'");
  }
  write_file(path(artifact::kAnnotations), annotate::write_annotations(annotations));
  log().info("import-annotations: " + std::to_string(annotations.size()) + " annotations");
}

classifier::CorpusClassification Pipeline::classify(bool fresh) {
  auto articles = load_corpus();
  std::vector<annotate::AnnotatedComment> gold;
  auto gold_path = path(artifact::kAnnotations);
  if (std::filesystem::exists(gold_path)) {
    gold = annotate::import_annotations(read_file(gold_path));
  } else if (config_.mode == ClassifierMode::remote) {
    throw MissingArtifact(gold_path, "import-annotations");
  }
  auto results_path = path(artifact::kResults);
  if (fresh) std::filesystem::remove(results_path);

  classifier::CorpusClassification run;
  if (config_.mode == ClassifierMode::lexicon) {
    classifier::LexiconClassifier lexicon(classifier::load_lexicons(config_.lexicons_dir), config_.vocab);
    classifier::LexiconCommentClassifier cls(std::move(lexicon), corpus_tokens(articles));
    run = classifier::classify_corpus(articles, gold, cls, results_path);
  } else {
    const auto& ep = *config_.endpoint;
    if (!services_.completion) services_.completion = std::make_shared<classifier::HttpCompletionClient>(ep);
    classifier::RemoteCommentClassifier cls(classifier::load_programs(config_.programs_dir),
                                            classifier::examples_from_annotations(gold, articles),
                                            config_.prompt_template, *services_.completion,
                                            {ep.max_retries, ep.backoff_base}, *services_.clock, ep.parallelism);
    run = classifier::classify_corpus(articles, gold, cls, results_path);
  }

  std::string failures = "comment_ref\terror\n";
  for (const auto& f : run.failures) {
    std::string error = f.error;
    for (auto& ch : error) {
      if (ch == '\t' || ch == '\n') ch = ' ';
    }
    failures += f.comment_ref + "\t" + error + "\n";
    log().warn("unclassified " + f.comment_ref + ": " + f.error);
  }
  write_file(path(artifact::kFailures), failures);
  for (const auto& r : run.results) {
    if (!r.warning.empty()) log().warn(r.comment_ref + ": " + r.warning);
  }
  log().info("classify: " + std::to_string(run.results.size()) + " results (" + std::to_string(run.gold) + " gold, " +
             std::to_string(run.resumed) + " resumed, " + std::to_string(run.newly_classified) + " new), " +
             std::to_string(run.failures.size()) + " failures");
  return run;
}

void Pipeline::analyze() {
  auto articles = load_corpus();
  auto results = classifier::parse_results(require(path(artifact::kResults), "classify"));
  std::size_t unclassified = 0;
  if (std::filesystem::exists(path(artifact::kFailures))) {
    for (const auto& line : text::split(read_file(path(artifact::kFailures)), '\n')) {
      if (!line.empty()) ++unclassified;
    }
    if (unclassified > 0) --unclassified;  // header
  }

  report::AnalysisBundle b;
  b.coverage = classifier::coverage_report(results, unclassified);
  b.affinity = analysis::affinity_distribution(results);
  b.topic_interest = analysis::topic_interest(results, articles);
  if (!config_.programs_dir.empty() && std::filesystem::is_directory(config_.programs_dir)) {
    b.program_topics = analysis::program_topics(classifier::load_programs(config_.programs_dir));
  }
  b.grouping = config_.groups;
  if (b.grouping.empty()) {
    for (Party p : kAllParties) {
      if (p != Party::indeterminado) b.grouping.push_back({std::string(party_code(p)), {p}});
    }
  }
  b.distinctive_terms = analysis::distinctive_terms(results, b.grouping, corpus_tokens(articles), config_.ranking);
  write_file(path(artifact::kAnalysis), report::serialize_analysis(b));
  log().info("analyze: coverage " + report::format_share(b.coverage.fraction));
}

std::vector<std::filesystem::path> Pipeline::report() {
  auto bundle = report::parse_analysis(require(path(artifact::kAnalysis), "analyze"));
  auto paths = report::emit_tables(report::analysis_tables(bundle), config_.format, path(artifact::kReports));
  log().info("report: " + std::to_string(paths.size()) + " tables");
  return paths;
}

void Pipeline::run_all() {
  fetch_feeds();
  scrape();
  build_corpus();
  sample_annotate();
  if (config_.annotations) import_annotations();
  // lexicon runs are cheap and should reflect the current lexicons
  classify(config_.mode == ClassifierMode::lexicon);
  analyze();
  report();
}

}  // namespace polmine::pipeline
