#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gparse/category.hpp"

namespace gparse {

struct ScoredCategory {
  Category category;
  double logprob = 0.0;
};

// Categories offered to words the lexicon has never seen, each scored with
// the same flat penalty.
struct OovPolicy {
  std::vector<Category> fallback;
  double penalty = -10.0;
};

class Lexicon {
 public:
  // Rejects non-finite or positive log-probabilities.
  void add(const std::string& word, const Category& category, double logprob);
  void set_oov_policy(OovPolicy policy) { oov_ = std::move(policy); }
  const std::optional<OovPolicy>& oov_policy() const { return oov_; }

  bool contains(const std::string& word) const { return entries_.count(word) != 0; }
  // Throws DataError naming the word when it is unknown and no OOV policy is set.
  std::vector<ScoredCategory> lexical_categories(const std::string& word) const;

  const std::map<std::string, std::vector<ScoredCategory>>& entries() const { return entries_; }

  // `word<TAB>category<TAB>logprob` per line, `#` starts a comment line.
  static Lexicon read(std::istream& in);
  static Lexicon load(const std::string& path);
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::vector<ScoredCategory>> entries_;
  std::optional<OovPolicy> oov_;
};

}  // namespace gparse
