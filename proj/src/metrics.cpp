#include "gparse/metrics.hpp"

#include <algorithm>

namespace gparse {

SpanCounts& SpanCounts::operator+=(const SpanCounts& o) {
  matched += o.matched;
  predicted += o.predicted;
  gold += o.gold;
  return *this;
}

double SpanCounts::precision() const { return predicted == 0 ? 0.0 : static_cast<double>(matched) / predicted; }

double SpanCounts::recall() const { return gold == 0 ? 0.0 : static_cast<double>(matched) / gold; }

double SpanCounts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 100.0 * 2.0 * p * r / (p + r);
}

SpanCounts labeled_span_counts(const Tree& predicted, const Tree& gold) {
  SpanCounts out;
  const auto p = predicted.empty() ? std::vector<LabeledSpan>{} : predicted.labeled_spans();
  const auto g = gold.labeled_spans();
  out.predicted = p.size();
  out.gold = g.size();
  // Both lists are sorted, so a merge walk gives the multiset intersection.
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < p.size() && j < g.size()) {
    if (p[i] < g[j]) {
      ++i;
    } else if (g[j] < p[i]) {
      ++j;
    } else {
      ++out.matched;
      ++i;
      ++j;
    }
  }
  return out;
}

std::size_t supertag_matches(const Tree& predicted, const Tree& gold) {
  if (predicted.empty()) return 0;
  const auto p = predicted.supertags();
  const auto g = gold.supertags();
  std::size_t n = 0;
  for (std::size_t t = 0; t < std::min(p.size(), g.size()); ++t) n += p[t] == g[t];
  return n;
}

void EvalSummary::add(const Tree& predicted, const Tree& gold) {
  ++sentences_;
  spans_ += labeled_span_counts(predicted, gold);
  tags_matched_ += supertag_matches(predicted, gold);
  tags_total_ += gold.supertags().size();
  if (!predicted.empty() && predicted == gold) ++exact_;
}

double EvalSummary::supertag_accuracy() const {
  return tags_total_ == 0 ? 0.0 : 100.0 * static_cast<double>(tags_matched_) / tags_total_;
}

double EvalSummary::exact_match() const {
  return sentences_ == 0 ? 0.0 : 100.0 * static_cast<double>(exact_) / sentences_;
}

}  // namespace gparse
