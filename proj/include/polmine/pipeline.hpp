#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polmine/analysis.hpp"
#include "polmine/classifier.hpp"
#include "polmine/corpus.hpp"
#include "polmine/feed.hpp"
#include "polmine/report.hpp"
#include "polmine/scraper.hpp"

// Stage orchestration over files in one output directory.
namespace polmine::pipeline {

enum class ClassifierMode { lexicon, remote };

struct RunConfig {
  std::vector<feed::FeedSource> feeds;
  std::optional<Date> since;
  std::optional<Date> until;
  int collection_year = 0;  // 0: year of since, else of the current date
  scraper::FetchPolicy fetch;
  std::string transport = "http";  // or "mirror"
  std::filesystem::path mirror_dir;
  int max_comment_pages = 5;
  corpus::VocabPolicy vocab;
  std::size_t sample_size = 50;
  std::uint64_t sample_seed = 2024;
  std::optional<std::filesystem::path> annotations;
  ClassifierMode mode = ClassifierMode::lexicon;
  std::filesystem::path lexicons_dir;
  std::filesystem::path programs_dir;
  std::string prompt_template = std::string(classifier::kDefaultTemplate);
  std::optional<classifier::EndpointConfig> endpoint;
  std::vector<analysis::AffinityGroup> groups;
  analysis::TermRanking ranking = analysis::TermRanking::strict;
  report::TableFormat format = report::TableFormat::delimited;
  std::filesystem::path output_dir = "out";

  // Throws ValidationError naming the offending setting.
  void validate() const;
};

// Relative paths in the file resolve against the file's directory. Throws
// ParseError for malformed JSON and ValidationError for bad values.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view json, const std::filesystem::path& base_dir);

// A stage's input file is absent.
class MissingArtifact : public Error {
 public:
  MissingArtifact(const std::filesystem::path& path, std::string_view producer)
      : Error("missing " + path.string() + "; run '" + std::string(producer) + "' first") {}
};

namespace artifact {
inline constexpr std::string_view kFeeds = "feeds.jsonl";
inline constexpr std::string_view kScraped = "scraped.jsonl";
inline constexpr std::string_view kCorpus = "corpus.xml";
inline constexpr std::string_view kCorpusRecords = "corpus.jsonl";
inline constexpr std::string_view kTemplate = "annotation_template.tsv";
inline constexpr std::string_view kAnnotations = "annotations.tsv";
inline constexpr std::string_view kResults = "results.tsv";
inline constexpr std::string_view kFailures = "classify_failures.tsv";
inline constexpr std::string_view kAnalysis = "analysis.json";
inline constexpr std::string_view kReports = "reports";
inline constexpr std::string_view kRunLog = "run.log";
}  // namespace artifact

// Timestamped lines appended to run.log; the only nondeterministic output.
class RunLog {
 public:
  explicit RunLog(const std::filesystem::path& path, bool echo = true);
  void info(std::string_view message);
  void warn(std::string_view message);

 private:
  void write(std::string_view level, std::string_view message);
  std::ofstream out_;
  bool echo_;
};

// Swappable collaborators; tests inject stubs and simulated clocks.
struct Services {
  std::shared_ptr<scraper::Transport> transport;
  std::shared_ptr<scraper::Clock> clock;
  std::shared_ptr<classifier::CompletionClient> completion;
};

// Builds the transport and clock the config names; the completion client
// is created on demand in remote mode.
Services default_services(const RunConfig& config);

class Pipeline {
 public:
  Pipeline(RunConfig config, Services services);

  void fetch_feeds();
  void scrape();
  void build_corpus();
  void sample_annotate();
  // source defaults to the configured annotations file.
  void import_annotations(const std::optional<std::filesystem::path>& source = std::nullopt);
  // fresh discards earlier results instead of resuming from them.
  classifier::CorpusClassification classify(bool fresh = false);
  void analyze();
  std::vector<std::filesystem::path> report();
  void run_all();

  const RunConfig& config() const { return config_; }
  std::filesystem::path path(std::string_view artifact) const { return config_.output_dir / artifact; }

 private:
  std::vector<corpus::Article> load_corpus() const;
  std::map<std::string, corpus::TokenizedText> corpus_tokens(std::span<const corpus::Article> articles) const;
  RunLog& log();

  RunConfig config_;
  Services services_;
  std::unique_ptr<RunLog> log_;
};

// Subcommand names, in run-all order.
inline constexpr std::string_view kStages[] = {"fetch-feeds", "scrape",   "build-corpus", "sample-annotate",
                                               "import-annotations", "classify", "analyze",
                                               "report",      "run-all"};

}  // namespace polmine::pipeline
