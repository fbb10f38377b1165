#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gparse/global_model.hpp"
#include "gparse/grammar.hpp"
#include "gparse/hypergraph.hpp"
#include "gparse/supertags.hpp"

namespace gparse {

// Everything a search needs to know about one sentence. `params` == nullptr
// disables global scoring (the pure supertag-factored model).
struct SearchProblem {
  const Grammar* grammar = nullptr;
  const SupertagTable* table = nullptr;
  std::vector<std::string> words;
  RootSet roots = RootSet::defaults();
  const ParameterStore* params = nullptr;

  std::int32_t length() const { return table->length(); }
  bool global_enabled() const { return params != nullptr; }
};

// Incremental global scoring over one computation graph: each call evaluates
// a single recursive unit on top of the children's stored states.
class EdgeScorer {
 public:
  EdgeScorer(const SearchProblem& problem, bool keep_activations, const Eigen::MatrixXd* dropout = nullptr);

  // Fills node.global, node.state_unit and node.score_unit. Children must
  // already be scored. Returns 0 without building anything when the global
  // model is disabled.
  double score(NodeArena& arena, NodeId id);

  bool enabled() const { return graph_.has_value(); }
  ComputationGraph* graph() { return graph_ ? &*graph_ : nullptr; }
  const ComputationGraph* graph() const { return graph_ ? &*graph_ : nullptr; }
  std::size_t evaluations() const { return evaluations_; }

 private:
  std::optional<ComputationGraph> graph_;
  SentenceEncoding encoding_;
  std::size_t evaluations_ = 0;
};

// Scores every node of an owned tree from scratch (local + global), returning
// the total. Optional per-node outputs follow tree node order.
double score_tree(const SearchProblem& problem, const Tree& tree, std::vector<double>* node_globals = nullptr,
                  std::vector<LatentState>* node_states = nullptr);

struct SearchOptions {
  // Split non-leaf edges into a local half and a global half.
  bool lazy = false;
  bool use_heuristic = true;
  // Test hook: added to h for every span short of the whole sentence.
  double heuristic_offset = 0.0;
  bool keep_activations = false;
  const Eigen::MatrixXd* dropout = nullptr;
  // Marks agenda entries whose head belongs to the gold derivation.
  std::function<bool(const NodeArena&, NodeId)> is_gold;
};

// Agenda-driven exploration of the parse forest. One instance per sentence;
// not thread safe.
class ForestSearch {
 public:
  ForestSearch(const SearchProblem& problem, SearchOptions options);

  // Pushes a fused hyperedge from the start node for every supertag.
  void initialize();

  struct Step {
    AgendaEntry entry;
    NodeId explored = kNoNode;  // set when the pop explored a new node
    bool resolved_local_half = false;
  };
  // Pops the agenda maximum. A local half gets its global score and is
  // pushed back as a global half; anything else explores its head.
  Step step();

  bool complete(NodeId id) const;
  double heuristic(Span span) const;
  double priority(NodeId head) const;  // g + h of a fully scored head

  const SearchProblem& problem() const { return problem_; }
  const Agenda& agenda() const { return agenda_; }
  const Forest& forest() const { return forest_; }
  const NodeArena& arena() const { return arena_; }
  const std::vector<Hyperedge>& edges() const { return edges_; }
  const Hyperedge& edge(std::int32_t id) const { return edges_[static_cast<std::size_t>(id)]; }
  EdgeScorer& scorer() { return scorer_; }
  const EdgeScorer& scorer() const { return scorer_; }

 private:
  void create_edge(NodeId head);
  void push_edge(std::int32_t edge_id, double priority);

  const SearchProblem& problem_;
  SearchOptions options_;
  NodeArena arena_;
  Forest forest_;
  Agenda agenda_;
  std::vector<Hyperedge> edges_;
  EdgeScorer scorer_;
};

}  // namespace gparse
