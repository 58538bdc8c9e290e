#include "polmine/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "polmine/text.hpp"

namespace polmine::report {
namespace {

using nlohmann::ordered_json;

std::string escape_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_cell(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    char n = s[++i];
    out.push_back(n == 't' ? '\t' : n == 'n' ? '\n' : n == 'r' ? '\r' : n);
  }
  return out;
}

std::size_t parse_count(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ParseError("'" + s + "' is not a count");
  }
  return std::stoull(s);
}

const char* ranking_name(analysis::TermRanking r) {
  return r == analysis::TermRanking::strict ? "strict" : "log_odds";
}

ordered_json matrix_json(const analysis::InterestMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (Party p : m.rows) rows.push_back(std::string(party_code(p)));
  return {{"rows", rows}, {"columns", m.columns}, {"counts", m.counts}};
}

analysis::InterestMatrix matrix_from_json(const ordered_json& j) {
  std::vector<Party> rows;
  for (const auto& r : j.at("rows")) {
    auto p = parse_party(r.get<std::string>());
    if (!p) throw ParseError("unknown party '" + r.get<std::string>() + "' in analysis");
    rows.push_back(*p);
  }
  return analysis::InterestMatrix::from_counts(std::move(rows), j.at("columns").get<std::vector<std::string>>(),
                                               j.at("counts").get<std::vector<std::vector<std::size_t>>>());
}

}  // namespace

std::optional<TableFormat> parse_table_format(std::string_view name) {
  if (name == "delimited" || name == "tsv") return TableFormat::delimited;
  if (name == "structured-record" || name == "structured" || name == "jsonl") return TableFormat::structured_record;
  return std::nullopt;
}

std::string format_share(double share) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", share);
  return buf;
}

Table affinity_table(const analysis::AffinityDistribution& d) {
  Table t{"affinity_distribution", {"Inclinación", "count", "share"}, {}};
  const double total = static_cast<double>(d.total());
  for (Party p : kAllParties) {
    double share = total > 0 ? static_cast<double>(d.count(p)) / total : 0.0;
    t.rows.push_back({std::string(display_name(p)), std::to_string(d.count(p)), format_share(share)});
  }
  return t;
}

Table coverage_table(const classifier::CoverageReport& c) {
  return {"coverage",
          {"metric", "value"},
          {{"assigned", std::to_string(c.assigned)},
           {"classified", std::to_string(c.classified)},
           {"fraction", format_share(c.fraction)},
           {"unclassified", std::to_string(c.unclassified)}}};
}

Table matrix_counts_table(const analysis::InterestMatrix& m, std::string name) {
  Table t{std::move(name), {"Inclinación"}, {}};
  t.columns.insert(t.columns.end(), m.columns.begin(), m.columns.end());
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    std::vector<std::string> row{std::string(display_name(m.rows[i]))};
    for (auto n : m.counts[i]) row.push_back(std::to_string(n));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table matrix_shares_table(const analysis::InterestMatrix& m, std::string name) {
  Table t{std::move(name), {"Inclinación"}, {}};
  t.columns.insert(t.columns.end(), m.columns.begin(), m.columns.end());
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    std::vector<std::string> row{std::string(display_name(m.rows[i]))};
    for (auto s : m.shares[i]) row.push_back(format_share(s));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table terms_table(const analysis::DistinctiveTermReport& r) {
  Table t{"distinctive_terms", {"group", "term", "frequency"}, {}};
  if (r.ranking == analysis::TermRanking::log_odds) t.columns.push_back("z");
  for (const auto& g : r.groups) {
    for (const auto& term : g.terms) {
      std::vector<std::string> row{g.group, term.term, std::to_string(term.frequency)};
      if (r.ranking == analysis::TermRanking::log_odds) row.push_back(format_share(term.z));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

analysis::InterestMatrix matrix_from_counts_table(const Table& t) {
  if (t.columns.empty()) throw ParseError("table '" + t.name + "' has no columns");
  std::vector<std::string> columns(t.columns.begin() + 1, t.columns.end());
  std::vector<std::pair<Party, std::vector<std::size_t>>> rows;
  for (const auto& r : t.rows) {
    auto p = parse_party(r.at(0));
    if (!p) throw ParseError("unknown party row '" + r.at(0) + "'");
    std::vector<std::size_t> counts;
    for (std::size_t j = 1; j < r.size(); ++j) counts.push_back(parse_count(r[j]));
    rows.emplace_back(*p, std::move(counts));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Party> labels;
  std::vector<std::vector<std::size_t>> counts;
  for (auto& [p, c] : rows) {
    labels.push_back(p);
    counts.push_back(std::move(c));
  }
  return analysis::InterestMatrix::from_counts(std::move(labels), std::move(columns), std::move(counts));
}

std::string render_table(const Table& t, TableFormat format) {
  auto rows = t.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.at(0) < b.at(0); });
  std::string out;
  if (format == TableFormat::delimited) {
    std::vector<std::string> header;
    for (const auto& c : t.columns) header.push_back(escape_cell(c));
    out += text::join(header, "\t") + "\n";
    for (const auto& r : rows) {
      std::vector<std::string> cells;
      for (const auto& c : r) cells.push_back(escape_cell(c));
      out += text::join(cells, "\t") + "\n";
    }
    return out;
  }
  for (const auto& r : rows) {
    ordered_json record = ordered_json::object();
    for (std::size_t j = 0; j < t.columns.size(); ++j) record[t.columns[j]] = r.at(j);
    out += record.dump() + "\n";
  }
  return out;
}

Table parse_table(std::string_view content, TableFormat format, std::string name) {
  Table t;
  t.name = std::move(name);
  auto lines = text::split(content, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (format == TableFormat::delimited) {
    if (lines.empty()) throw ParseError("table has no header");
    for (const auto& c : text::split(lines[0], '\t')) t.columns.push_back(unescape_cell(c));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      auto cells = text::split(lines[i], '\t');
      if (cells.size() != t.columns.size()) throw ParseError("table line " + std::to_string(i + 1) + " has the wrong width");
      std::vector<std::string> row;
      for (const auto& c : cells) row.push_back(unescape_cell(c));
      t.rows.push_back(std::move(row));
    }
    return t;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto record = ordered_json::parse(lines[i], nullptr, false);
    if (record.is_discarded() || !record.is_object()) throw ParseError("record " + std::to_string(i + 1) + " is not a JSON object");
    std::vector<std::string> columns;
    std::vector<std::string> row;
    for (const auto& [key, value] : record.items()) {
      if (!value.is_string()) throw ParseError("record " + std::to_string(i + 1) + ": non-string value for '" + key + "'");
      columns.push_back(key);
      row.push_back(value.get<std::string>());
    }
    if (i == 0) {
      t.columns = std::move(columns);
    } else if (columns != t.columns) {
      throw ParseError("record " + std::to_string(i + 1) + " has different keys");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<std::filesystem::path> emit_tables(std::span<const Table> tables, TableFormat format,
                                               const std::filesystem::path& dir) {
  if (tables.empty()) throw ValidationError("no tables to emit");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (const auto& t : tables) {
    if (t.name.empty()) throw ValidationError("table without a name");
    auto path = dir / (t.name + (format == TableFormat::delimited ? ".tsv" : ".jsonl"));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << render_table(t, format);
    if (!out.flush()) throw IoError("cannot write " + path.string());
    paths.push_back(std::move(path));
  }
  return paths;
}

std::string serialize_analysis(const AnalysisBundle& b) {
  ordered_json affinity = ordered_json::object();
  for (Party p : kAllParties) affinity[std::string(party_code(p))] = b.affinity.count(p);
  ordered_json grouping = ordered_json::array();
  for (const auto& g : b.grouping) {
    ordered_json members = ordered_json::array();
    for (Party p : g.members) members.push_back(std::string(party_code(p)));
    grouping.push_back({{"name", g.name}, {"parties", members}});
  }
  ordered_json groups = ordered_json::array();
  for (const auto& g : b.distinctive_terms.groups) {
    ordered_json terms = ordered_json::array();
    for (const auto& t : g.terms) terms.push_back({{"term", t.term}, {"frequency", t.frequency}, {"z", t.z}});
    groups.push_back({{"group", g.group}, {"terms", terms}});
  }
  ordered_json doc = {
      {"coverage",
       {{"assigned", b.coverage.assigned},
        {"classified", b.coverage.classified},
        {"unclassified", b.coverage.unclassified},
        {"fraction", b.coverage.fraction}}},
      {"affinity", affinity},
      {"topic_interest", matrix_json(b.topic_interest)},
      {"program_topics", b.program_topics ? matrix_json(*b.program_topics) : ordered_json(nullptr)},
      {"grouping", grouping},
      {"distinctive_terms", {{"ranking", ranking_name(b.distinctive_terms.ranking)}, {"groups", groups}}},
  };
  return doc.dump(2) + "\n";
}

AnalysisBundle parse_analysis(std::string_view json) {
  auto doc = ordered_json::parse(json, nullptr, false);
  if (doc.is_discarded()) throw ParseError("analysis file is not valid JSON");
  try {
    AnalysisBundle b;
    const auto& c = doc.at("coverage");
    b.coverage = {c.at("assigned").get<std::size_t>(), c.at("classified").get<std::size_t>(),
                  c.at("unclassified").get<std::size_t>(), c.at("fraction").get<double>()};
    for (Party p : kAllParties) b.affinity.counts[index_of(p)] = doc.at("affinity").at(std::string(party_code(p)));
    b.topic_interest = matrix_from_json(doc.at("topic_interest"));
    if (!doc.at("program_topics").is_null()) b.program_topics = matrix_from_json(doc.at("program_topics"));
    for (const auto& g : doc.at("grouping")) {
      analysis::AffinityGroup group{g.at("name").get<std::string>(), {}};
      for (const auto& code : g.at("parties")) {
        auto p = parse_party(code.get<std::string>());
        if (!p) throw ParseError("unknown party in grouping");
        group.members.insert(*p);
      }
      b.grouping.push_back(std::move(group));
    }
    const auto& dt = doc.at("distinctive_terms");
    b.distinctive_terms.ranking =
        dt.at("ranking").get<std::string>() == "strict" ? analysis::TermRanking::strict : analysis::TermRanking::log_odds;
    for (const auto& g : dt.at("groups")) {
      analysis::GroupTerms group{g.at("group").get<std::string>(), {}};
      for (const auto& t : g.at("terms")) {
        group.terms.push_back({t.at("term").get<std::string>(), t.at("frequency").get<std::size_t>(),
                               t.at("z").get<double>()});
      }
      b.distinctive_terms.groups.push_back(std::move(group));
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("analysis file: ") + e.what());
  }
}

std::vector<Table> analysis_tables(const AnalysisBundle& b) {
  std::vector<Table> tables;
  tables.push_back(coverage_table(b.coverage));
  tables.push_back(affinity_table(b.affinity));
  tables.push_back(matrix_counts_table(b.topic_interest, "topic_interest_counts"));
  tables.push_back(matrix_shares_table(b.topic_interest, "topic_interest_shares"));
  if (b.program_topics) {
    tables.push_back(matrix_counts_table(*b.program_topics, "program_topics_counts"));
    tables.push_back(matrix_shares_table(*b.program_topics, "program_topics_shares"));
  }
  tables.push_back(terms_table(b.distinctive_terms));
  return tables;
}

}  // namespace polmine::report
