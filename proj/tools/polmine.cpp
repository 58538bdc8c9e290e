// polmine: collect reader comments from category feeds, classify their party
// affinity and emit chart-ready tables.

#include <iostream>

#include "CLI11.hpp"
#include "polmine/pipeline.hpp"

namespace {

using namespace polmine;

struct Overrides {
  std::string out;
  std::string since;
  std::string until;
  std::optional<long long> min_interval_ms;
  std::optional<long long> timeout_ms;
  std::optional<int> retries;
  std::string format;
};

void apply(pipeline::RunConfig& config, const Overrides& o) {
  if (!o.out.empty()) config.output_dir = o.out;
  if (!o.since.empty()) {
    config.since = parse_date(o.since);
    if (!config.since) throw ValidationError("--since must be YYYY-MM-DD");
  }
  if (!o.until.empty()) {
    config.until = parse_date(o.until);
    if (!config.until) throw ValidationError("--until must be YYYY-MM-DD");
  }
  if (o.min_interval_ms) config.fetch.min_interval_per_host = std::chrono::milliseconds{*o.min_interval_ms};
  if (o.timeout_ms) config.fetch.timeout = std::chrono::milliseconds{*o.timeout_ms};
  if (o.retries) config.fetch.max_retries = *o.retries;
  if (!o.format.empty()) {
    auto f = report::parse_table_format(o.format);
    if (!f) throw ValidationError("--format must be 'delimited' or 'structured-record'");
    config.format = *f;
  }
  config.validate();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Political affinity mining over news-aggregator reader comments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::string annotations_in;
  bool fresh = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", overrides.out, "Output directory (overrides output_dir)");
    sub->add_option("--since", overrides.since, "First publication day, YYYY-MM-DD");
    sub->add_option("--until", overrides.until, "Last publication day, YYYY-MM-DD");
    sub->add_option("--min-interval", overrides.min_interval_ms, "Minimum ms between requests to one host");
    sub->add_option("--timeout", overrides.timeout_ms, "Request timeout in ms");
    sub->add_option("--retries", overrides.retries, "Retries for transient fetch failures");
    sub->add_option("--format", overrides.format, "Table format: delimited or structured-record");
  };

  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> help = {
      {"fetch-feeds", "Download category feeds and keep items inside the date window"},
      {"scrape", "Fetch article pages and extract their comments"},
      {"build-corpus", "Write the corpus XML and its JSON-lines export"},
      {"sample-annotate", "Sample seed comments into an annotation template"},
      {"import-annotations", "Validate a filled annotation table"},
      {"classify", "Assign stance and party affinity to every comment"},
      {"analyze", "Aggregate results into distributions and term lists"},
      {"report", "Emit one table file per analysis product"},
      {"run-all", "Run every stage in order"},
  };
  for (auto name : pipeline::kStages) {
    auto* sub = app.add_subcommand(std::string(name), help.at(std::string(name)));
    add_common(sub);
    subs[std::string(name)] = sub;
  }
  subs["import-annotations"]->add_option("--in", annotations_in, "Filled annotation table (defaults to the config)");
  subs["classify"]->add_flag("--fresh", fresh, "Discard earlier results instead of resuming");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  pipeline::RunConfig config;
  try {
    config = pipeline::load_config(config_path);
    apply(config, overrides);
  } catch (const Error& e) {
    std::cerr << "polmine: invalid configuration: " << e.what() << '\n';
    return 1;
  }

  try {
    pipeline::Pipeline run(config, pipeline::default_services(config));
    if (subs["fetch-feeds"]->parsed()) run.fetch_feeds();
    if (subs["scrape"]->parsed()) run.scrape();
    if (subs["build-corpus"]->parsed()) run.build_corpus();
    if (subs["sample-annotate"]->parsed()) run.sample_annotate();
    if (subs["import-annotations"]->parsed()) {
      run.import_annotations(annotations_in.empty() ? std::nullopt
                                                    : std::optional<std::filesystem::path>(annotations_in));
    }
    if (subs["classify"]->parsed()) run.classify(fresh);
    if (subs["analyze"]->parsed()) run.analyze();
    if (subs["report"]->parsed()) {
      for (const auto& p : run.report()) std::cout << p.string() << '\n';
    }
    if (subs["run-all"]->parsed()) run.run_all();
  } catch (const std::exception& e) {
    std::cerr << "polmine: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
