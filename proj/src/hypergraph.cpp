#include "gparse/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gparse/error.hpp"

namespace gparse {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finaliser over the running combination
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t node_hash(const Category& c, RuleKind rule, Span span, std::uint64_t left, std::uint64_t right) {
  std::uint64_t h = mix(c.hash(), static_cast<std::uint64_t>(rule));
  h = mix(h, static_cast<std::uint64_t>(span.start));
  h = mix(h, static_cast<std::uint64_t>(span.end));
  h = mix(h, left);
  return mix(h, right);
}

}  // namespace

NodeArena::NodeArena() {
  ParseNode start;
  start.span = Span{0, 0};
  start.rule = RuleKind::Lex;
  start.inside = 0.0;
  start.size = 0;
  nodes_.push_back(std::move(start));
}

NodeId NodeArena::push(ParseNode node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId NodeArena::make_leaf(std::int32_t token, Category category) {
  ParseNode n;
  n.span = Span{token, token + 1};
  n.rule = RuleKind::Lex;
  n.size = 1;
  n.subtree_hash = node_hash(category, n.rule, n.span, 0, 0);
  n.category = std::move(category);
  return push(std::move(n));
}

NodeId NodeArena::make_unary(Category category, NodeId child) {
  ParseNode n;
  const auto& c = (*this)[child];
  n.span = c.span;
  n.rule = RuleKind::Unary;
  n.children = {child, kNoNode};
  n.size = c.size + 1;
  n.subtree_hash = node_hash(category, n.rule, n.span, c.subtree_hash, 0);
  n.category = std::move(category);
  return push(std::move(n));
}

NodeId NodeArena::make_binary(Category category, RuleKind rule, NodeId left, NodeId right) {
  const auto& l = (*this)[left];
  const auto& r = (*this)[right];
  if (l.span.end != r.span.start) throw InternalError("binary node over non-adjacent spans");
  ParseNode n;
  n.span = Span{l.span.start, r.span.end};
  n.rule = rule;
  n.children = {left, right};
  n.size = l.size + r.size + 1;
  n.subtree_hash = node_hash(category, rule, n.span, l.subtree_hash, r.subtree_hash);
  n.category = std::move(category);
  return push(std::move(n));
}

bool NodeArena::equal(NodeId a, NodeId b) const {
  if (a == b) return true;
  const auto& x = (*this)[a];
  const auto& y = (*this)[b];
  if (x.subtree_hash != y.subtree_hash || x.size != y.size || x.rule != y.rule || x.span != y.span ||
      x.category != y.category) {
    return false;
  }
  for (int k = 0; k < 2; ++k) {
    if ((x.children[k] == kNoNode) != (y.children[k] == kNoNode)) return false;
    if (x.children[k] != kNoNode && !equal(x.children[k], y.children[k])) return false;
  }
  return true;
}

bool NodeArena::equal(NodeId a, const Tree& tree, std::int32_t node) const {
  const auto& x = (*this)[a];
  const auto& y = tree.node(node);
  if (x.rule != y.rule || x.span != y.span || x.category != y.category) return false;
  std::array<std::int32_t, 2> kids{y.left, y.right};
  for (int k = 0; k < 2; ++k) {
    if ((x.children[k] == kNoNode) != (kids[k] < 0)) return false;
    if (kids[k] >= 0 && !equal(x.children[k], tree, kids[k])) return false;
  }
  return true;
}

void NodeArena::collect_subtree(NodeId id, std::vector<NodeId>& out) const {
  const auto& n = (*this)[id];
  for (NodeId child : n.children) {
    if (child != kNoNode) collect_subtree(child, out);
  }
  out.push_back(id);
}

Tree NodeArena::extract(NodeId id) const {
  Tree tree;
  auto rec = [&](auto&& self, NodeId n) -> std::int32_t {
    const auto& node = (*this)[n];
    switch (node.arity()) {
      case 0: return tree.add_leaf(node.span.start, node.category);
      case 1: return tree.add_unary(node.category, self(self, node.children[0]));
      default: {
        std::int32_t l = self(self, node.children[0]);
        std::int32_t r = self(self, node.children[1]);
        return tree.add_binary(node.category, node.rule, l, r);
      }
    }
  };
  rec(rec, id);
  return tree;
}

NodeId NodeArena::import(const Tree& tree, std::int32_t node) {
  const auto& n = tree.node(node);
  switch (n.rule) {
    case RuleKind::Lex: return make_leaf(n.span.start, n.category);
    case RuleKind::Unary: return make_unary(n.category, import(tree, n.left));
    default: {
      NodeId l = import(tree, n.left);
      NodeId r = import(tree, n.right);
      return make_binary(n.category, n.rule, l, r);
    }
  }
}

std::string NodeArena::to_bracketed(NodeId id) const { return extract(id).to_bracketed(); }

std::uint64_t tree_subtree_hash(const Tree& tree, std::int32_t node) {
  const auto& n = tree.node(node);
  std::uint64_t l = n.left >= 0 ? tree_subtree_hash(tree, n.left) : 0;
  std::uint64_t r = n.right >= 0 ? tree_subtree_hash(tree, n.right) : 0;
  return node_hash(n.category, n.rule, n.span, l, r);
}

double path_score(NodeArena& arena, NodeId head, double edge_score) {
  auto& node = arena[head];
  double g = edge_score;
  for (NodeId tail : node.children) {
    if (tail == kNoNode) continue;
    const auto& t = arena[tail];
    if (!t.scored()) throw InternalError("path_score: tail node has no memoized path score");
    g += t.inside;
  }
  arena[head].inside = g;
  return g;
}

bool Agenda::before(const AgendaEntry& a, const AgendaEntry& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  if (a.size != b.size) return a.size < b.size;
  return a.seq < b.seq;
}

namespace {
// std heap functions keep the "largest" element at the front.
bool heap_less(const AgendaEntry& a, const AgendaEntry& b) { return Agenda::before(b, a); }
}  // namespace

void Agenda::push(std::int32_t edge, double priority, std::uint32_t size, bool gold) {
  if (!std::isfinite(priority)) throw std::domain_error("agenda priority must be finite");
  AgendaEntry entry{priority, size, next_seq_++, edge, gold};
  heap_.push_back(entry);
  std::push_heap(heap_.begin(), heap_.end(), heap_less);
  if (gold) {
    gold_.push_back(entry);
    std::push_heap(gold_.begin(), gold_.end(), heap_less);
  }
}

const AgendaEntry& Agenda::top() const {
  if (heap_.empty()) throw SearchExhausted();
  return heap_.front();
}

AgendaEntry Agenda::pop_max() {
  if (heap_.empty()) throw SearchExhausted();
  std::pop_heap(heap_.begin(), heap_.end(), heap_less);
  AgendaEntry entry = heap_.back();
  heap_.pop_back();
  if (entry.gold) {
    // The overall maximum is also the maximum of the gold subset.
    if (gold_.empty() || gold_.front().seq != entry.seq) throw InternalError("gold agenda out of sync");
    std::pop_heap(gold_.begin(), gold_.end(), heap_less);
    gold_.pop_back();
  }
  return entry;
}

Forest::Forest(std::int32_t sentence_length)
    : by_start_(static_cast<std::size_t>(sentence_length) + 1), by_end_(static_cast<std::size_t>(sentence_length) + 1) {}

bool Forest::contains(const NodeArena& arena, NodeId id) const {
  auto range = by_hash_.equal_range(arena[id].subtree_hash);
  for (auto it = range.first; it != range.second; ++it) {
    if (arena.equal(it->second, id)) return true;
  }
  return false;
}

bool Forest::insert(const NodeArena& arena, NodeId id) {
  if (id == kStartNode) return false;
  if (contains(arena, id)) return false;
  const auto& node = arena[id];
  by_hash_.emplace(node.subtree_hash, id);
  by_start_[static_cast<std::size_t>(node.span.start)].push_back(id);
  by_end_[static_cast<std::size_t>(node.span.end)].push_back(id);
  order_.push_back(id);
  ++count_;
  return true;
}

std::vector<NodeId> Forest::find(const NodeArena& arena, Span span, const Category& category) const {
  std::vector<NodeId> out;
  for (NodeId id : by_start_[static_cast<std::size_t>(span.start)]) {
    const auto& n = arena[id];
    if (n.span == span && n.category == category) out.push_back(id);
  }
  return out;
}

std::vector<NodeId> expand(Forest& forest, NodeArena& arena, NodeId y, const Grammar& grammar) {
  std::vector<NodeId> heads;
  if (!forest.insert(arena, y)) return heads;
  const Span span = arena[y].span;
  if (arena[y].rule != RuleKind::Unary) {
    for (auto& p : grammar.unary_rules(arena[y].category)) heads.push_back(arena.make_unary(std::move(p.category), y));
  }
  // Copies: make_* may reallocate the arena.
  const std::vector<NodeId> lefts = forest.ending_at(span.start);
  for (NodeId l : lefts) {
    for (auto& p : grammar.combine(arena[l].category, arena[y].category)) {
      heads.push_back(arena.make_binary(std::move(p.category), p.rule, l, y));
    }
  }
  const std::vector<NodeId> rights = forest.starting_at(span.end);
  for (NodeId r : rights) {
    for (auto& p : grammar.combine(arena[y].category, arena[r].category)) {
      heads.push_back(arena.make_binary(std::move(p.category), p.rule, y, r));
    }
  }
  return heads;
}

}  // namespace gparse
