#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gparse/category.hpp"
#include "gparse/grammar.hpp"
#include "gparse/tree.hpp"

namespace gparse {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;
// The start node: an empty parse with span [0, 0), never combined with anything.
inline constexpr NodeId kStartNode = 0;

// A vertex of the parse forest. Its identity is the whole subtree below it,
// so every node is reachable through exactly one hyperedge.
struct ParseNode {
  Span span;
  Category category;
  RuleKind rule = RuleKind::Lex;
  std::array<NodeId, 2> children{kNoNode, kNoNode};
  std::uint64_t subtree_hash = 0;
  std::uint32_t size = 0;  // nodes in the subtree

  // Memoized path score g of the unique path from the start node.
  double inside = std::numeric_limits<double>::quiet_NaN();
  double local = 0.0;
  std::optional<double> global;  // empty while pending

  // Computation-graph units backing the global score, -1 if not evaluated.
  std::int32_t state_unit = -1;
  std::int32_t score_unit = -1;

  int arity() const { return (children[0] != kNoNode) + (children[1] != kNoNode); }
  bool is_leaf() const { return rule == RuleKind::Lex; }
  bool scored() const { return inside == inside; }
};

// Owns every node created by one search instance. Nodes refer to their
// children by id, so whole subtrees are shared rather than copied.
class NodeArena {
 public:
  NodeArena();

  NodeId make_leaf(std::int32_t token, Category category);
  NodeId make_unary(Category category, NodeId child);
  NodeId make_binary(Category category, RuleKind rule, NodeId left, NodeId right);

  const ParseNode& operator[](NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  ParseNode& operator[](NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  // Deep structural equality; hashes only short-circuit the negative case.
  bool equal(NodeId a, NodeId b) const;
  bool equal(NodeId a, const Tree& tree, std::int32_t node) const;

  // Every node of the subtree rooted at `id`, children before parents.
  void collect_subtree(NodeId id, std::vector<NodeId>& out) const;

  Tree extract(NodeId id) const;
  // Copies a subtree of `tree` into the arena and returns its root.
  NodeId import(const Tree& tree, std::int32_t node);
  std::string to_bracketed(NodeId id) const;

 private:
  NodeId push(ParseNode node);
  std::vector<ParseNode> nodes_;
};

std::uint64_t tree_subtree_hash(const Tree& tree, std::int32_t node);

enum class Stage : std::uint8_t { Fused, LocalHalf, GlobalHalf };

// A rule production. Its tails are the head's children (the start node for
// leaves), so the head id identifies the edge.
struct Hyperedge {
  NodeId head = kNoNode;
  double local_score = 0.0;
  std::optional<double> global_score;
  Stage stage = Stage::Fused;
};

// g(path(e)) = s(e) + sum of the tails' memoized path scores; memoized on the
// head. Throws InternalError when a tail has not been scored.
double path_score(NodeArena& arena, NodeId head, double edge_score);

struct AgendaEntry {
  double priority = 0.0;
  std::uint32_t size = 0;
  std::uint64_t seq = 0;
  std::int32_t edge = -1;
  bool gold = false;
};

// Binary max-heap of edges keyed by priority; equal priorities pop the
// smaller subtree first, then the earlier insertion. Entries flagged gold are
// mirrored in a second heap so the best gold entry is available in O(1).
class Agenda {
 public:
  // Throws std::domain_error on a non-finite priority.
  void push(std::int32_t edge, double priority, std::uint32_t size, bool gold = false);
  // Throws SearchExhausted when empty.
  AgendaEntry pop_max();

  const AgendaEntry& top() const;
  const AgendaEntry* gold_top() const { return gold_.empty() ? nullptr : &gold_.front(); }
  std::size_t gold_count() const { return gold_.size(); }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  std::size_t pushed() const { return next_seq_; }
  // Heap order, not sorted.
  const std::vector<AgendaEntry>& entries() const { return heap_; }

  static bool before(const AgendaEntry& a, const AgendaEntry& b);

 private:
  std::vector<AgendaEntry> heap_;
  std::vector<AgendaEntry> gold_;
  std::uint64_t next_seq_ = 0;
};

// Explored nodes, indexed for combination lookup by the positions where their
// spans start and end. The start node counts towards size() but is never
// returned by lookups.
class Forest {
 public:
  explicit Forest(std::int32_t sentence_length);

  // False (and no change) when an equal subtree was already explored.
  bool insert(const NodeArena& arena, NodeId id);
  bool contains(const NodeArena& arena, NodeId id) const;

  const std::vector<NodeId>& ending_at(std::int32_t position) const { return by_end_[static_cast<std::size_t>(position)]; }
  const std::vector<NodeId>& starting_at(std::int32_t position) const { return by_start_[static_cast<std::size_t>(position)]; }
  std::vector<NodeId> find(const NodeArena& arena, Span span, const Category& category) const;

  std::size_t size() const { return count_; }
  const std::vector<NodeId>& explored() const { return order_; }

 private:
  std::vector<std::vector<NodeId>> by_start_;
  std::vector<std::vector<NodeId>> by_end_;
  std::unordered_multimap<std::uint64_t, NodeId> by_hash_;
  std::vector<NodeId> order_;
  std::size_t count_ = 1;
};

// Adds `y` to the forest and creates every head reachable in one step: unary
// rules on `y` (unless `y` was itself produced by a unary rule) followed by
// binary combinations with adjacent explored nodes, `y` on the right first.
// Returns the new heads, unscored. A duplicate `y` yields nothing.
std::vector<NodeId> expand(Forest& forest, NodeArena& arena, NodeId y, const Grammar& grammar);

}  // namespace gparse
