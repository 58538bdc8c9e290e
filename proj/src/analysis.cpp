#include "polmine/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "polmine/text.hpp"

namespace polmine::analysis {
namespace {

std::size_t column_index(const std::vector<std::string>& columns, std::string_view column) {
  auto it = std::lower_bound(columns.begin(), columns.end(), column);
  if (it == columns.end() || *it != column) throw ValidationError("no column '" + std::string(column) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::size_t row_index(const std::vector<Party>& rows, Party p) {
  auto it = std::find(rows.begin(), rows.end(), p);
  if (it == rows.end()) throw ValidationError("no row for " + std::string(party_code(p)));
  return static_cast<std::size_t>(it - rows.begin());
}

using TermCounts = std::map<std::string, std::size_t>;

}  // namespace

std::size_t AffinityDistribution::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

AffinityDistribution affinity_distribution(std::span<const ClassificationResult> results) {
  if (results.empty()) throw ValidationError("affinity distribution of an empty result set");
  AffinityDistribution d;
  for (const auto& r : results) ++d.counts[index_of(r.party)];
  return d;
}

std::size_t InterestMatrix::count(Party row, std::string_view column) const {
  return counts[row_index(rows, row)][column_index(columns, column)];
}

double InterestMatrix::share(Party row, std::string_view column) const {
  return shares[row_index(rows, row)][column_index(columns, column)];
}

InterestMatrix InterestMatrix::from_counts(std::vector<Party> rows, std::vector<std::string> columns,
                                           std::vector<std::vector<std::size_t>> counts) {
  if (counts.size() != rows.size()) throw ValidationError("matrix has a row count mismatch");
  if (!std::is_sorted(columns.begin(), columns.end()) ||
      std::adjacent_find(columns.begin(), columns.end()) != columns.end()) {
    throw ValidationError("matrix columns must be sorted and distinct");
  }
  InterestMatrix m;
  m.shares.reserve(rows.size());
  for (const auto& row : counts) {
    if (row.size() != columns.size()) throw ValidationError("matrix has a column count mismatch");
    std::size_t total = std::accumulate(row.begin(), row.end(), std::size_t{0});
    std::vector<double> share(row.size(), 0.0);
    if (total > 0) {
      for (std::size_t j = 0; j < row.size(); ++j) share[j] = static_cast<double>(row[j]) / static_cast<double>(total);
    }
    m.shares.push_back(std::move(share));
  }
  m.rows = std::move(rows);
  m.columns = std::move(columns);
  m.counts = std::move(counts);
  return m;
}

InterestMatrix topic_interest(std::span<const ClassificationResult> results,
                              std::span<const corpus::Article> articles) {
  auto index = corpus::index_comments(articles);
  std::set<std::string> categories;
  for (const auto& a : articles) {
    if (a.category_label.empty()) throw ValidationError("article '" + a.guid + "' has no category label");
    categories.insert(a.category_label);
  }
  std::vector<std::string> columns(categories.begin(), categories.end());
  std::vector<Party> rows(kAllParties.begin(), kAllParties.end());
  std::vector<std::vector<std::size_t>> counts(rows.size(), std::vector<std::size_t>(columns.size(), 0));
  for (const auto& r : results) {
    auto it = index.find(r.comment_ref);
    if (it == index.end()) throw ValidationError("result for unknown comment '" + r.comment_ref + "'");
    ++counts[index_of(r.party)][column_index(columns, it->second.article->category_label)];
  }
  return InterestMatrix::from_counts(std::move(rows), std::move(columns), std::move(counts));
}

InterestMatrix program_topics(std::span<const classifier::PartyProgram> programs) {
  std::vector<const classifier::PartyProgram*> ordered;
  std::set<std::string> topics;
  for (const auto& p : programs) {
    if (p.declared_topics.empty()) {
      throw ValidationError("program for " + std::string(party_code(p.party)) + " declares no topic");
    }
    topics.insert(p.declared_topics.begin(), p.declared_topics.end());
    ordered.push_back(&p);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->party < b->party; });
  std::vector<std::string> columns(topics.begin(), topics.end());
  std::vector<Party> rows;
  std::vector<std::vector<std::size_t>> counts;
  for (const auto* p : ordered) {
    if (!rows.empty() && rows.back() == p->party) {
      throw ValidationError("more than one program for " + std::string(party_code(p->party)));
    }
    rows.push_back(p->party);
    std::vector<std::size_t> row(columns.size(), 0);
    for (const auto& t : p->declared_topics) ++row[column_index(columns, t)];
    counts.push_back(std::move(row));
  }
  return InterestMatrix::from_counts(std::move(rows), std::move(columns), std::move(counts));
}

void validate_grouping(std::span<const AffinityGroup> grouping) {
  std::set<Party> seen;
  std::set<std::string> names;
  for (const auto& g : grouping) {
    if (g.name.empty()) throw ValidationError("affinity group without a name");
    if (!names.insert(g.name).second) throw ValidationError("duplicate affinity group '" + g.name + "'");
    if (g.members.empty()) throw ValidationError("affinity group '" + g.name + "' has no members");
    for (Party p : g.members) {
      if (p == Party::indeterminado) throw ValidationError("affinity group '" + g.name + "' contains Indeterminado");
      if (!seen.insert(p).second) {
        throw ValidationError("party " + std::string(party_code(p)) + " is in more than one affinity group");
      }
    }
  }
}

DistinctiveTermReport distinctive_terms(std::span<const ClassificationResult> results,
                                        std::span<const AffinityGroup> grouping,
                                        const std::map<std::string, corpus::TokenizedText>& tokens,
                                        TermRanking ranking) {
  validate_grouping(grouping);
  std::array<std::optional<std::size_t>, kAllParties.size()> group_of{};
  for (std::size_t g = 0; g < grouping.size(); ++g) {
    for (Party p : grouping[g].members) group_of[index_of(p)] = g;
  }

  std::vector<TermCounts> freq(grouping.size());
  std::vector<std::size_t> group_total(grouping.size(), 0);
  for (const auto& r : results) {
    auto g = group_of[index_of(r.party)];
    if (!g) continue;
    auto it = tokens.find(r.comment_ref);
    if (it == tokens.end()) throw ValidationError("no tokens for comment '" + r.comment_ref + "'");
    for (const auto& tok : it->second.tokens) {
      ++freq[*g][text::to_lower(tok)];
      ++group_total[*g];
    }
  }

  TermCounts pooled;
  std::size_t pooled_total = 0;
  for (std::size_t g = 0; g < freq.size(); ++g) {
    for (const auto& [term, n] : freq[g]) pooled[term] += n;
    pooled_total += group_total[g];
  }

  DistinctiveTermReport report;
  report.ranking = ranking;
  for (std::size_t g = 0; g < grouping.size(); ++g) {
    GroupTerms out{grouping[g].name, {}};
    for (const auto& [term, n] : freq[g]) {
      if (ranking == TermRanking::strict) {
        if (pooled.at(term) == n) out.terms.push_back({term, n, 0.0});
        continue;
      }
      // Informative Dirichlet prior from the pooled counts, group vs rest.
      const double prior = static_cast<double>(pooled.at(term));
      const double prior_total = static_cast<double>(pooled_total);
      const double in = static_cast<double>(n);
      const double rest = prior - in;
      const double in_total = static_cast<double>(group_total[g]);
      const double rest_total = prior_total - in_total;
      const double in_other = in_total - in + prior_total - prior;
      const double rest_other = rest_total - rest + prior_total - prior;
      if (in_other <= 0 || rest_other <= 0) continue;
      const double delta = std::log((in + prior) / in_other) - std::log((rest + prior) / rest_other);
      const double z = delta / std::sqrt(1.0 / (in + prior) + 1.0 / (rest + prior));
      if (z > 0) out.terms.push_back({term, n, z});
    }
    if (ranking == TermRanking::strict) {
      std::stable_sort(out.terms.begin(), out.terms.end(),
                       [](const TermScore& a, const TermScore& b) { return a.frequency > b.frequency; });
    } else {
      std::stable_sort(out.terms.begin(), out.terms.end(),
                       [](const TermScore& a, const TermScore& b) { return a.z > b.z; });
    }
    report.groups.push_back(std::move(out));
  }
  return report;
}

}  // namespace polmine::analysis
