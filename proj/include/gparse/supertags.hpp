#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gparse/hypergraph.hpp"
#include "gparse/lexicon.hpp"

namespace gparse {

// Per-sentence supertag scores: the local model. All scores are finite
// log-probabilities (<= 0); every token has at least one candidate.
class SupertagTable {
 public:
  SupertagTable() = default;
  explicit SupertagTable(std::vector<std::vector<ScoredCategory>> tags);

  static SupertagTable from_lexicon(const std::vector<std::string>& words, const Lexicon& lexicon);

  std::int32_t length() const { return static_cast<std::int32_t>(tags_.size()); }
  const std::vector<ScoredCategory>& tags(std::int32_t token) const { return tags_[static_cast<std::size_t>(token)]; }
  double max_score(std::int32_t token) const { return max_[static_cast<std::size_t>(token)]; }
  std::optional<double> score(std::int32_t token, const Category& category) const;

  // Sum of the best tag score of every token outside `span`, in O(1).
  double outside(Span span) const;

 private:
  std::vector<std::vector<ScoredCategory>> tags_;
  std::vector<double> max_;
  std::vector<double> prefix_;  // prefix_[k] = sum of max_[t] for t < k
};

// s_local(e): the supertag score when the head is a leaf, zero otherwise.
// Throws DataError for a leaf whose category the table does not offer.
double score_local(const ParseNode& head, const SupertagTable& table);

// Admissible outside estimate h(e); depends only on the head's span.
inline double heuristic(Span span, const SupertagTable& table) { return table.outside(span); }

struct TaggedSentence {
  std::vector<std::string> words;
  SupertagTable table;
};

// Blocks separated by blank lines; line i of a block is
// `word<TAB>cat1:logp1 cat2:logp2 ...`.
std::vector<TaggedSentence> read_supertag_file(std::istream& in);
std::vector<TaggedSentence> load_supertag_file(const std::string& path);
void write_supertag_block(std::ostream& out, const TaggedSentence& sentence);

}  // namespace gparse
