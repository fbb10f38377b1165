#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gparse/category.hpp"
#include "gparse/grammar.hpp"

namespace gparse {

// Half-open token interval [start, end).
struct Span {
  std::int32_t start = 0;
  std::int32_t end = 0;

  std::int32_t length() const { return end - start; }
  bool contains(std::int32_t token) const { return start <= token && token < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct TreeNode {
  Span span;
  Category category;
  RuleKind rule = RuleKind::Lex;
  std::int32_t left = -1;   // only child for unary nodes
  std::int32_t right = -1;
};

struct LabeledSpan {
  Span span;
  std::string category;

  friend bool operator==(const LabeledSpan&, const LabeledSpan&) = default;
  friend bool operator<(const LabeledSpan& a, const LabeledSpan& b) {
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    if (a.span.end != b.span.end) return a.span.end < b.span.end;
    return a.category < b.category;
  }
};

// An owned derivation. Nodes are stored children-first; the last node added
// is the root.
class Tree {
 public:
  std::int32_t add_leaf(std::int32_t token, Category category);
  std::int32_t add_unary(Category category, std::int32_t child);
  std::int32_t add_binary(Category category, RuleKind rule, std::int32_t left, std::int32_t right);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  std::int32_t root() const { return static_cast<std::int32_t>(nodes_.size()) - 1; }
  const TreeNode& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  // Number of nodes under (and including) `i`.
  std::size_t subtree_size(std::int32_t i) const;

  // `(<category> <rule> child child)` with leaves `(<category> LEX <token>)`.
  std::string to_bracketed() const;
  std::string to_bracketed(std::int32_t i) const;
  static Tree parse_bracketed(std::string_view text);

  // Leaf categories in token order.
  std::vector<Category> supertags() const;
  // (span, category) of every node, sorted.
  std::vector<LabeledSpan> labeled_spans() const;

  friend bool operator==(const Tree& a, const Tree& b);
  friend bool operator!=(const Tree& a, const Tree& b) { return !(a == b); }

 private:
  std::vector<TreeNode> nodes_;
};

bool subtrees_equal(const Tree& a, std::int32_t ia, const Tree& b, std::int32_t ib);

}  // namespace gparse
