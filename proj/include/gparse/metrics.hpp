#pragma once

#include <cstddef>

#include "gparse/tree.hpp"

namespace gparse {

// Labeled-span counts over every node (leaves included), matched as a
// multiset of (span, category) pairs.
struct SpanCounts {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  SpanCounts& operator+=(const SpanCounts& o);
  double precision() const;
  double recall() const;
  double f1() const;  // percentage, 0 when either side is empty
};

SpanCounts labeled_span_counts(const Tree& predicted, const Tree& gold);

// Leaf categories that agree position by position.
std::size_t supertag_matches(const Tree& predicted, const Tree& gold);

// Corpus-level accumulator. An empty prediction counts as a failed parse:
// nothing predicted, every gold span and tag missed.
class EvalSummary {
 public:
  void add(const Tree& predicted, const Tree& gold);

  const SpanCounts& spans() const { return spans_; }
  std::size_t sentences() const { return sentences_; }
  double f1() const { return spans_.f1(); }
  double supertag_accuracy() const;  // percentage
  double exact_match() const;        // percentage

 private:
  SpanCounts spans_;
  std::size_t sentences_ = 0;
  std::size_t exact_ = 0;
  std::size_t tags_matched_ = 0;
  std::size_t tags_total_ = 0;
};

}  // namespace gparse
