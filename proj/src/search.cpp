#include "gparse/search.hpp"

#include "gparse/error.hpp"

namespace gparse {

EdgeScorer::EdgeScorer(const SearchProblem& problem, bool keep_activations, const Eigen::MatrixXd* dropout) {
  if (!problem.params) return;
  graph_.emplace(*problem.params, keep_activations);
  encoding_ = graph_->encode_sentence(problem.words, dropout);
}

double EdgeScorer::score(NodeArena& arena, NodeId id) {
  auto& node = arena[id];
  if (!graph_) {
    node.global = 0.0;
    return 0.0;
  }
  std::int32_t left = -1;
  std::int32_t right = -1;
  switch (node.arity()) {
    case 0: {
      auto in = graph_->leaf_state(node.span.start, encoding_);
      left = in.left;
      right = in.right;
      break;
    }
    case 1:
      left = graph_->unary_left();
      right = arena[node.children[0]].state_unit;
      break;
    default:
      left = arena[node.children[0]].state_unit;
      right = arena[node.children[1]].state_unit;
      break;
  }
  if (left < 0 || right < 0) throw InternalError("EdgeScorer: child has no latent state");
  const std::int32_t state = graph_->tree_unit(node.rule, node.category, left, right);
  const std::int32_t head = graph_->score_head(state);
  ++evaluations_;
  auto& scored = arena[id];
  scored.state_unit = state;
  scored.score_unit = head;
  scored.global = graph_->score(head);
  return *scored.global;
}

double score_tree(const SearchProblem& problem, const Tree& tree, std::vector<double>* node_globals,
                  std::vector<LatentState>* node_states) {
  NodeArena arena;
  EdgeScorer scorer(problem, false);
  std::vector<NodeId> ids(tree.size(), kNoNode);
  double total = 0.0;
  if (node_globals) node_globals->assign(tree.size(), 0.0);
  if (node_states) node_states->assign(tree.size(), LatentState{});
  // Tree nodes are stored children first.
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(static_cast<std::int32_t>(i));
    NodeId id;
    switch (n.rule) {
      case RuleKind::Lex: id = arena.make_leaf(n.span.start, n.category); break;
      case RuleKind::Unary: id = arena.make_unary(n.category, ids[static_cast<std::size_t>(n.left)]); break;
      default:
        id = arena.make_binary(n.category, n.rule, ids[static_cast<std::size_t>(n.left)],
                               ids[static_cast<std::size_t>(n.right)]);
    }
    ids[i] = id;
    const double local = score_local(arena[id], *problem.table);
    const double global = scorer.score(arena, id);
    total += local + global;
    if (node_globals) (*node_globals)[i] = global;
    if (node_states && scorer.graph()) {
      (*node_states)[i] = {scorer.graph()->c(arena[id].state_unit), scorer.graph()->h(arena[id].state_unit)};
    }
  }
  return total;
}

ForestSearch::ForestSearch(const SearchProblem& problem, SearchOptions options)
    : problem_(problem),
      options_(std::move(options)),
      forest_(problem.length()),
      scorer_(problem, options_.keep_activations, options_.dropout) {
  if (!problem.global_enabled()) options_.lazy = false;
}

double ForestSearch::heuristic(Span span) const {
  double h = options_.use_heuristic ? gparse::heuristic(span, *problem_.table) : 0.0;
  if (span.start != 0 || span.end != problem_.length()) h += options_.heuristic_offset;
  return h;
}

bool ForestSearch::complete(NodeId id) const {
  const auto& n = arena_[id];
  return n.span.start == 0 && n.span.end == problem_.length() && problem_.roots.accepts(n.category);
}

double ForestSearch::priority(NodeId head) const { return arena_[head].inside + heuristic(arena_[head].span); }

void ForestSearch::push_edge(std::int32_t edge_id, double priority) {
  const NodeId head = edges_[static_cast<std::size_t>(edge_id)].head;
  const bool gold = options_.is_gold && options_.is_gold(arena_, head);
  agenda_.push(edge_id, priority, arena_[head].size, gold);
}

void ForestSearch::create_edge(NodeId head) {
  Hyperedge e;
  e.head = head;
  e.local_score = score_local(arena_[head], *problem_.table);
  arena_[head].local = e.local_score;
  const auto edge_id = static_cast<std::int32_t>(edges_.size());
  if (options_.lazy && !arena_[head].is_leaf()) {
    e.stage = Stage::LocalHalf;
    double g_tails = 0.0;
    for (NodeId tail : arena_[head].children) {
      if (tail != kNoNode) g_tails += arena_[tail].inside;
    }
    edges_.push_back(e);
    push_edge(edge_id, g_tails + e.local_score + heuristic(arena_[head].span));
    return;
  }
  e.stage = Stage::Fused;
  e.global_score = scorer_.score(arena_, head);
  path_score(arena_, head, e.local_score + *e.global_score);
  edges_.push_back(e);
  push_edge(edge_id, priority(head));
}

void ForestSearch::initialize() {
  for (std::int32_t t = 0; t < problem_.length(); ++t) {
    for (const auto& tag : problem_.table->tags(t)) create_edge(arena_.make_leaf(t, tag.category));
  }
}

ForestSearch::Step ForestSearch::step() {
  Step out;
  out.entry = agenda_.pop_max();
  auto& e = edges_[static_cast<std::size_t>(out.entry.edge)];
  if (e.stage == Stage::LocalHalf) {
    e.stage = Stage::GlobalHalf;
    e.global_score = scorer_.score(arena_, e.head);
    path_score(arena_, e.head, e.local_score + *e.global_score);
    push_edge(out.entry.edge, priority(e.head));
    out.resolved_local_half = true;
    return out;
  }
  const NodeId y = e.head;
  if (forest_.contains(arena_, y)) return out;
  for (NodeId head : expand(forest_, arena_, y, *problem_.grammar)) create_edge(head);
  out.explored = y;
  return out;
}

}  // namespace gparse
