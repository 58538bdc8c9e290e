#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polmine/analysis.hpp"

// Chart-ready tables built from analysis products.
namespace polmine::report {

// A named table; the first column is the row label.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

enum class TableFormat {
  delimited,          // .tsv, header line then rows
  structured_record,  // .jsonl, one object per row, keys in column order
};

std::optional<TableFormat> parse_table_format(std::string_view name);

// Fixed-point with 6 decimals.
std::string format_share(double share);

Table affinity_table(const analysis::AffinityDistribution& d);
Table coverage_table(const classifier::CoverageReport& c);
Table matrix_counts_table(const analysis::InterestMatrix& m, std::string name);
Table matrix_shares_table(const analysis::InterestMatrix& m, std::string name);
Table terms_table(const analysis::DistinctiveTermReport& r);

// Inverse of matrix_counts_table; shares are recomputed from counts.
analysis::InterestMatrix matrix_from_counts_table(const Table& t);

// Writes one file per table under dir, rows stably sorted by row label.
// Returns the paths in input order. Throws ValidationError on an empty list
// and IoError when a file cannot be written.
std::vector<std::filesystem::path> emit_tables(std::span<const Table> tables, TableFormat format,
                                               const std::filesystem::path& dir);

std::string render_table(const Table& t, TableFormat format);
// Throws ParseError on malformed input.
Table parse_table(std::string_view content, TableFormat format, std::string name = {});

// Everything the analyze stage produces, as one JSON document.
struct AnalysisBundle {
  classifier::CoverageReport coverage;
  analysis::AffinityDistribution affinity;
  analysis::InterestMatrix topic_interest;
  std::optional<analysis::InterestMatrix> program_topics;
  std::vector<analysis::AffinityGroup> grouping;
  analysis::DistinctiveTermReport distinctive_terms;
};

std::string serialize_analysis(const AnalysisBundle& bundle);
AnalysisBundle parse_analysis(std::string_view json);

// The tables the report stage writes for a bundle.
std::vector<Table> analysis_tables(const AnalysisBundle& bundle);

}  // namespace polmine::report
