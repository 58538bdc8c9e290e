#pragma once

#include <array>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "polmine/classifier.hpp"
#include "polmine/corpus.hpp"
#include "polmine/labels.hpp"

namespace polmine::analysis {

using classifier::ClassificationResult;

struct AffinityDistribution {
  std::array<std::size_t, kAllParties.size()> counts{};

  std::size_t count(Party p) const { return counts[index_of(p)]; }
  std::size_t total() const;

  friend bool operator==(const AffinityDistribution&, const AffinityDistribution&) = default;
};

// Counts over every result, Indeterminado included. Throws ValidationError
// when results is empty.
AffinityDistribution affinity_distribution(std::span<const ClassificationResult> results);

// Party x category counts with row-normalized shares. Rows are kept in
// party enum order; columns are sorted labels.
struct InterestMatrix {
  std::vector<Party> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::vector<double>> shares;  // all zero for an empty row

  // Indeterminado is reported but marked, since it is not an affinity.
  static bool flagged(Party p) { return p == Party::indeterminado; }

  std::size_t count(Party row, std::string_view column) const;
  double share(Party row, std::string_view column) const;

  // Builds shares from counts. Throws ValidationError on a shape mismatch.
  static InterestMatrix from_counts(std::vector<Party> rows, std::vector<std::string> columns,
                                    std::vector<std::vector<std::size_t>> counts);

  friend bool operator==(const InterestMatrix&, const InterestMatrix&) = default;
};

// Rows for every party, columns for every category among articles. Throws
// ValidationError naming a result whose comment is not in the corpus.
InterestMatrix topic_interest(std::span<const ClassificationResult> results,
                              std::span<const corpus::Article> articles);

// Rows for the parties with a program. Throws ValidationError for a program
// that declares no topic.
InterestMatrix program_topics(std::span<const classifier::PartyProgram> programs);

struct AffinityGroup {
  std::string name;
  std::set<Party> members;

  friend bool operator==(const AffinityGroup&, const AffinityGroup&) = default;
};

// Throws ValidationError for empty or overlapping groups, duplicate names, or
// a group holding Indeterminado.
void validate_grouping(std::span<const AffinityGroup> grouping);

enum class TermRanking {
  strict,    // terms found in no other group, by in-group frequency
  log_odds,  // weighted log-odds z-score against the other groups
};

struct TermScore {
  std::string term;
  std::size_t frequency = 0;  // occurrences in the group's comments
  double z = 0.0;             // log_odds ranking only

  friend bool operator==(const TermScore&, const TermScore&) = default;
};

struct GroupTerms {
  std::string group;
  std::vector<TermScore> terms;

  friend bool operator==(const GroupTerms&, const GroupTerms&) = default;
};

struct DistinctiveTermReport {
  TermRanking ranking = TermRanking::strict;
  std::vector<GroupTerms> groups;  // grouping order

  friend bool operator==(const DistinctiveTermReport&, const DistinctiveTermReport&) = default;
};

// Terms are the lowercase tokens of each comment. Results whose party is
// Indeterminado or outside every group are ignored. Throws ValidationError
// for an invalid grouping or a result with no tokens entry.
DistinctiveTermReport distinctive_terms(std::span<const ClassificationResult> results,
                                        std::span<const AffinityGroup> grouping,
                                        const std::map<std::string, corpus::TokenizedText>& tokens,
                                        TermRanking ranking = TermRanking::strict);

}  // namespace polmine::analysis
