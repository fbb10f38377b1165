#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gparse/search.hpp"
#include "gparse/tree.hpp"

namespace gparse {

struct DecodeLimits {
  std::size_t max_forest_size = 500000;
  std::size_t max_agenda_size = 2000000;
  std::size_t max_tree_units = 200000;
};

enum class Certificate { Optimal, Backoff, Failed };
std::string_view certificate_name(Certificate c);

struct DecodeStats {
  std::size_t nodes_explored = 0;
  std::size_t edges_pushed = 0;
  std::size_t global_evals = 0;
  double wall_seconds = 0.0;
  // The returned parse came from the supertag-factored fallback.
  bool used_backoff_model = false;
};

struct DecodeResult {
  Tree parse;  // empty when FAILED
  double score = 0.0;  // full-model score of `parse`
  Certificate certificate = Certificate::Failed;
  DecodeStats stats;
  std::vector<double> popped_priorities;  // only with DecodeOptions::trace
};

struct DecodeOptions {
  DecodeLimits limits;
  bool lazy = true;
  bool use_heuristic = true;
  double heuristic_offset = 0.0;  // fault-injection hook, see SearchOptions
  bool trace = false;
  // On a limit, fall back to the supertag-factored model.
  bool backoff = true;
};

// Exact A* over the parse forest. Returns OPTIMAL at the first explored
// complete parse, BACKOFF (after re-decoding with the local model) when a
// limit is hit, FAILED when the agenda runs dry.
DecodeResult decode_astar(const SearchProblem& problem, const DecodeOptions& options);

// A* with h = 0.
DecodeResult decode_best_first(const SearchProblem& problem, DecodeOptions options);

// Bottom-up beam search keeping the top `beam_width` subtrees per span.
// Never claims optimality.
DecodeResult decode_beam(const SearchProblem& problem, std::size_t beam_width);

// Rescores the `n` best local-model parses with the full model.
DecodeResult decode_rerank(const SearchProblem& problem, std::size_t n);

struct ScoredTree {
  Tree tree;
  double score = 0.0;
};

// Exact n-best complete parses under the local model from a chart. Ties are
// broken by bracketed string, so the lists for increasing n are nested.
std::vector<ScoredTree> local_kbest(const SearchProblem& problem, std::size_t n);

}  // namespace gparse
