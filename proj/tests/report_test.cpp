#include <gtest/gtest.h>

#include "oracles.hpp"
#include "polmine/report.hpp"
#include "polmine/text.hpp"

using namespace polmine;
using namespace polmine::report;

namespace {

analysis::InterestMatrix two_by_two() {
  return analysis::InterestMatrix::from_counts({Party::lfi, Party::rn}, {"Política francesa", "Política internacional"},
                                               {{3, 1}, {0, 2}});
}

AnalysisBundle bundle() {
  AnalysisBundle b;
  b.coverage = {14, 15, 1, 14.0 / 15};
  b.affinity.counts = {3, 1, 5, 2, 0, 1};
  b.topic_interest = two_by_two();
  b.program_topics = analysis::InterestMatrix::from_counts({Party::ps}, {"salud", "trabajo"}, {{1, 2}});
  b.grouping = {{"Izquierda", {Party::lfi, Party::ps}}, {"Derecha", {Party::rn, Party::lr}}};
  b.distinctive_terms.groups = {{"Izquierda", {{"résistance", 3, 0.0}, {"paix", 1, 0.0}}},
                                {"Derecha", {{"souverainiste", 2, 0.0}}}};
  return b;
}

}  // namespace

TEST(Format, Names) {
  EXPECT_EQ(parse_table_format("delimited"), TableFormat::delimited);
  EXPECT_EQ(parse_table_format("structured-record"), TableFormat::structured_record);
  EXPECT_FALSE(parse_table_format("xlsx"));
  EXPECT_EQ(format_share(2.0 / 3), "0.666667");
  EXPECT_EQ(format_share(1.0), "1.000000");
}

TEST(Emit, TwoByTwoMatrix) {
  oracle::TempDir dir;
  std::vector<Table> tables = {matrix_counts_table(two_by_two(), "topic_interest_counts")};
  auto paths = emit_tables(tables, TableFormat::delimited, dir.path());
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].filename(), "topic_interest_counts.tsv");
  auto lines = text::split(oracle::slurp(paths[0]), '\n');
  ASSERT_EQ(lines.size(), 4u);  // header, 2 rows, trailing newline
  EXPECT_EQ(text::split(lines[0], '\t').size(), 3u);
  EXPECT_EQ(lines[1], "Francia Insumisa (LFI)\t3\t1");
  EXPECT_EQ(lines[2], "Reagrupación Nacional (RN)\t0\t2");
}

TEST(Emit, EmptyProductListIsAnError) {
  oracle::TempDir dir;
  EXPECT_THROW(emit_tables({}, TableFormat::delimited, dir.path()), ValidationError);
}

TEST(Emit, UnwritableDirectory) {
  oracle::TempDir dir;
  std::ofstream(dir.path() / "file") << "x";
  std::vector<Table> tables = {affinity_table(bundle().affinity)};
  EXPECT_THROW(emit_tables(tables, TableFormat::delimited, dir.path() / "file"), IoError);
}

TEST(Emit, MatrixReparsesEqualInBothFormats) {
  for (auto format : {TableFormat::delimited, TableFormat::structured_record}) {
    oracle::TempDir dir;
    auto m = analysis::InterestMatrix::from_counts(
        {Party::lfi, Party::ps, Party::rn, Party::lrem, Party::lr, Party::indeterminado},
        {"Economía", "Política francesa", "Política internacional"},
        {{1, 2, 3}, {0, 0, 0}, {4, 0, 1}, {2, 2, 2}, {0, 1, 0}, {7, 0, 0}});
    std::vector<Table> tables = {matrix_counts_table(m, "m")};
    auto paths = emit_tables(tables, format, dir.path());
    auto parsed = parse_table(oracle::slurp(paths[0]), format, "m");
    EXPECT_EQ(matrix_from_counts_table(parsed), m);
  }
}

TEST(Render, RowsSortedByLabelAndShareFormatting) {
  auto t = matrix_shares_table(two_by_two(), "s");
  auto rendered = render_table(t, TableFormat::delimited);
  EXPECT_NE(rendered.find("Francia Insumisa (LFI)\t0.750000\t0.250000"), std::string::npos);
  Table unsorted{"u", {"label", "v"}, {{"b", "1"}, {"a", "2"}, {"b", "0"}}};
  EXPECT_EQ(render_table(unsorted, TableFormat::delimited), "label\tv\na\t2\nb\t1\nb\t0\n");
  EXPECT_EQ(render_table(unsorted, TableFormat::structured_record),
            "{\"label\":\"a\",\"v\":\"2\"}\n{\"label\":\"b\",\"v\":\"1\"}\n{\"label\":\"b\",\"v\":\"0\"}\n");
}

TEST(Render, EscapedCellsRoundTrip) {
  Table t{"x", {"label", "v"}, {{"a\tb", "línea\nnueva"}, {"c\\d", ""}}};
  for (auto format : {TableFormat::delimited, TableFormat::structured_record}) {
    auto parsed = parse_table(render_table(t, format), format, "x");
    EXPECT_EQ(parsed, t);
  }
  EXPECT_THROW(parse_table("a\tb\n1\n", TableFormat::delimited), ParseError);
  EXPECT_THROW(parse_table("{not json\n", TableFormat::structured_record), ParseError);
}

TEST(Tables, AffinityAndCoverage) {
  auto b = bundle();
  auto a = affinity_table(b.affinity);
  EXPECT_EQ(a.columns, (std::vector<std::string>{"Inclinación", "count", "share"}));
  EXPECT_EQ(a.rows.size(), 6u);
  EXPECT_EQ(a.rows[2], (std::vector<std::string>{"Reagrupación Nacional (RN)", "5", "0.416667"}));
  auto c = coverage_table(b.coverage);
  bool seen = false;
  for (const auto& row : c.rows) {
    if (row[0] == "fraction") {
      EXPECT_EQ(row[1], "0.933333");
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Tables, Terms) {
  auto t = terms_table(bundle().distinctive_terms);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"group", "term", "frequency"}));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"Izquierda", "résistance", "3"}));
}

TEST(Bundle, SerializeParseRoundTrip) {
  auto b = bundle();
  auto json = serialize_analysis(b);
  auto back = parse_analysis(json);
  EXPECT_EQ(serialize_analysis(back), json);
  EXPECT_EQ(back.affinity, b.affinity);
  EXPECT_EQ(back.topic_interest, b.topic_interest);
  EXPECT_EQ(back.program_topics, b.program_topics);
  EXPECT_EQ(back.grouping, b.grouping);
  EXPECT_EQ(back.distinctive_terms, b.distinctive_terms);
  EXPECT_EQ(back.coverage.assigned, 14u);
  EXPECT_THROW(parse_analysis("{}"), ParseError);
}

TEST(Bundle, OneTablePerProduct) {
  auto b = bundle();
  auto tables = analysis_tables(b);
  std::set<std::string> names;
  for (const auto& t : tables) names.insert(t.name);
  EXPECT_EQ(names.size(), tables.size());
  EXPECT_TRUE(names.count("affinity_distribution"));
  EXPECT_TRUE(names.count("coverage"));
  EXPECT_TRUE(names.count("distinctive_terms"));
  b.program_topics.reset();
  EXPECT_LT(analysis_tables(b).size(), tables.size());
}
