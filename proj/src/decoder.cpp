#include "gparse/decoder.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include "gparse/error.hpp"

namespace gparse {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool over_limits(const ForestSearch& s, const DecodeLimits& limits) {
  return s.forest().size() > limits.max_forest_size || s.agenda().size() > limits.max_agenda_size ||
         s.scorer().evaluations() > limits.max_tree_units;
}

// Supertag-factored fallback: the local-model Viterbi parse, rescored with
// the full model.
void back_off(const SearchProblem& problem, DecodeResult& result) {
  auto best = local_kbest(problem, 1);
  result.stats.used_backoff_model = true;
  if (best.empty()) {
    result.certificate = Certificate::Failed;
    return;
  }
  result.parse = std::move(best.front().tree);
  result.score = score_tree(problem, result.parse);
  if (problem.global_enabled()) result.stats.global_evals += result.parse.size();
  result.certificate = Certificate::Backoff;
}

}  // namespace

std::string_view certificate_name(Certificate c) {
  switch (c) {
    case Certificate::Optimal: return "OPTIMAL";
    case Certificate::Backoff: return "BACKOFF";
    case Certificate::Failed: return "FAILED";
  }
  return "?";
}

DecodeResult decode_astar(const SearchProblem& problem, const DecodeOptions& options) {
  const auto start = Clock::now();
  if (problem.length() == 0) throw DataError("cannot decode an empty sentence");
  SearchOptions so;
  so.lazy = options.lazy;
  so.use_heuristic = options.use_heuristic;
  so.heuristic_offset = options.heuristic_offset;
  ForestSearch search(problem, so);
  search.initialize();

  DecodeResult result;
  bool exceeded = false;
  while (!search.agenda().empty()) {
    if (over_limits(search, options.limits)) {
      exceeded = true;
      break;
    }
    auto step = search.step();
    if (options.trace) result.popped_priorities.push_back(step.entry.priority);
    if (step.explored != kNoNode && search.complete(step.explored)) {
      result.parse = search.arena().extract(step.explored);
      result.score = search.arena()[step.explored].inside;
      result.certificate = Certificate::Optimal;
      break;
    }
  }
  result.stats.nodes_explored = search.forest().size() - 1;
  result.stats.edges_pushed = search.edges().size();
  result.stats.global_evals = search.scorer().evaluations();
  if (exceeded) {
    if (options.backoff) {
      back_off(problem, result);
    } else {
      result.certificate = Certificate::Failed;
    }
  }
  result.stats.wall_seconds = seconds_since(start);
  return result;
}

DecodeResult decode_best_first(const SearchProblem& problem, DecodeOptions options) {
  options.use_heuristic = false;
  return decode_astar(problem, options);
}

DecodeResult decode_beam(const SearchProblem& problem, std::size_t beam_width) {
  if (beam_width == 0) throw ConfigError("beam width must be at least 1");
  const auto start = Clock::now();
  const std::int32_t n = problem.length();
  if (n == 0) throw DataError("cannot decode an empty sentence");
  NodeArena arena;
  EdgeScorer scorer(problem, false);
  auto cell_index = [n](std::int32_t i, std::int32_t j) { return static_cast<std::size_t>(i * (n + 1) + j); };
  std::vector<std::vector<NodeId>> cells(static_cast<std::size_t>((n + 1) * (n + 1)));
  std::size_t scored = 0;

  auto score_node = [&](NodeId id) {
    const double local = score_local(arena[id], *problem.table);
    arena[id].local = local;
    const double global = scorer.score(arena, id);
    path_score(arena, id, local + global);
    ++scored;
  };

  for (std::int32_t len = 1; len <= n; ++len) {
    for (std::int32_t i = 0; i + len <= n; ++i) {
      const std::int32_t j = i + len;
      std::vector<NodeId> cands;
      if (len == 1) {
        for (const auto& tag : problem.table->tags(i)) cands.push_back(arena.make_leaf(i, tag.category));
      } else {
        for (std::int32_t k = i + 1; k < j; ++k) {
          for (NodeId l : cells[cell_index(i, k)]) {
            for (NodeId r : cells[cell_index(k, j)]) {
              for (auto& p : problem.grammar->combine(arena[l].category, arena[r].category)) {
                cands.push_back(arena.make_binary(std::move(p.category), p.rule, l, r));
              }
            }
          }
        }
      }
      for (NodeId id : cands) score_node(id);
      const std::size_t base = cands.size();
      for (std::size_t c = 0; c < base; ++c) {
        const NodeId child = cands[c];
        for (auto& p : problem.grammar->unary_rules(arena[child].category)) {
          NodeId id = arena.make_unary(std::move(p.category), child);
          score_node(id);
          cands.push_back(id);
        }
      }
      std::sort(cands.begin(), cands.end(), [&](NodeId a, NodeId b) {
        if (arena[a].inside != arena[b].inside) return arena[a].inside > arena[b].inside;
        if (arena[a].size != arena[b].size) return arena[a].size < arena[b].size;
        return a < b;
      });
      if (cands.size() > beam_width) cands.resize(beam_width);
      cells[cell_index(i, j)] = std::move(cands);
    }
  }

  DecodeResult result;
  for (NodeId id : cells[cell_index(0, n)]) {
    if (problem.roots.accepts(arena[id].category)) {
      result.parse = arena.extract(id);
      result.score = arena[id].inside;
      result.certificate = Certificate::Backoff;
      break;
    }
  }
  std::size_t kept = 0;
  for (const auto& c : cells) kept += c.size();
  result.stats.nodes_explored = kept;
  result.stats.edges_pushed = scored;
  result.stats.global_evals = scorer.evaluations();
  result.stats.wall_seconds = seconds_since(start);
  return result;
}

DecodeResult decode_rerank(const SearchProblem& problem, std::size_t n) {
  if (n == 0) throw ConfigError("n-best size must be at least 1");
  const auto start = Clock::now();
  DecodeResult result;
  auto nbest = local_kbest(problem, n);
  bool found = false;
  for (auto& candidate : nbest) {
    const double s = score_tree(problem, candidate.tree);
    if (problem.global_enabled()) result.stats.global_evals += candidate.tree.size();
    if (!found || s > result.score) {
      result.score = s;
      result.parse = candidate.tree;
      found = true;
    }
  }
  result.certificate = found ? Certificate::Backoff : Certificate::Failed;
  result.stats.nodes_explored = nbest.size();
  result.stats.edges_pushed = nbest.size();
  result.stats.wall_seconds = seconds_since(start);
  return result;
}

namespace {

struct ChartDeriv {
  double score = 0.0;
  std::string key;  // bracketed form, also the tie-breaker
  RuleKind rule = RuleKind::Lex;
  std::int32_t left_item = -1;
  std::int32_t left_rank = -1;
  std::int32_t right_item = -1;
  std::int32_t right_rank = -1;
  bool left_from_base = false;
};

struct ChartItem {
  Span span;
  Category category;
  std::vector<ChartDeriv> base;  // leaf and binary derivations
  std::vector<ChartDeriv> full;  // base merged with unary derivations
};

bool deriv_before(const ChartDeriv& a, const ChartDeriv& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.key < b.key;
}

void keep_best(std::vector<ChartDeriv>& list, std::size_t n) {
  if (list.size() > n) {
    std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(n), list.end(), deriv_before);
    list.resize(n);
  } else {
    std::sort(list.begin(), list.end(), deriv_before);
  }
}

class KBestChart {
 public:
  KBestChart(const SearchProblem& problem, std::size_t n) : problem_(problem), n_(n), len_(problem.length()) {
    cells_.resize(static_cast<std::size_t>((len_ + 1) * (len_ + 1)));
  }

  std::vector<ScoredTree> run() {
    for (std::int32_t len = 1; len <= len_; ++len) {
      for (std::int32_t i = 0; i + len <= len_; ++i) fill(i, i + len);
    }
    std::vector<std::pair<std::int32_t, ChartDeriv>> roots;
    for (const auto& [_, item_id] : cell(0, len_)) {
      const auto& item = items_[static_cast<std::size_t>(item_id)];
      if (!problem_.roots.accepts(item.category)) continue;
      for (const auto& d : item.full) roots.emplace_back(item_id, d);
    }
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) { return deriv_before(a.second, b.second); });
    if (roots.size() > n_) roots.resize(n_);
    std::vector<ScoredTree> out;
    for (const auto& [item_id, d] : roots) {
      Tree tree;
      build(tree, item_id, d);
      out.push_back({std::move(tree), d.score});
    }
    return out;
  }

 private:
  using Cell = std::vector<std::pair<std::string, std::int32_t>>;  // category -> item, insertion ordered

  Cell& cell(std::int32_t i, std::int32_t j) { return cells_[static_cast<std::size_t>(i * (len_ + 1) + j)]; }

  std::int32_t item_for(std::unordered_map<std::string, std::int32_t>& index, Span span, const Category& c) {
    auto it = index.find(c.str());
    if (it != index.end()) return it->second;
    items_.push_back({span, c, {}, {}});
    auto id = static_cast<std::int32_t>(items_.size() - 1);
    index.emplace(c.str(), id);
    return id;
  }

  void fill(std::int32_t i, std::int32_t j) {
    const Span span{i, j};
    std::unordered_map<std::string, std::int32_t> index;
    std::vector<std::int32_t> order;
    auto touch = [&](const Category& c) {
      auto before = items_.size();
      auto id = item_for(index, span, c);
      if (items_.size() != before) order.push_back(id);
      return id;
    };
    if (j - i == 1) {
      for (const auto& tag : problem_.table->tags(i)) {
        auto id = touch(tag.category);
        ChartDeriv d;
        d.score = tag.logprob;
        d.key = "(" + tag.category.str() + " LEX " + std::to_string(i) + ")";
        items_[static_cast<std::size_t>(id)].base.push_back(std::move(d));
      }
    } else {
      for (std::int32_t k = i + 1; k < j; ++k) {
        const Cell lefts = cell(i, k);
        const Cell rights = cell(k, j);
        for (const auto& [lc, li] : lefts) {
          for (const auto& [rc, ri] : rights) {
            const Category lcat = items_[static_cast<std::size_t>(li)].category;
            const Category rcat = items_[static_cast<std::size_t>(ri)].category;
            for (const auto& p : problem_.grammar->combine(lcat, rcat)) {
              auto id = touch(p.category);
              const auto& ld = items_[static_cast<std::size_t>(li)].full;
              const auto& rd = items_[static_cast<std::size_t>(ri)].full;
              std::vector<ChartDeriv> fresh;
              for (std::size_t a = 0; a < ld.size(); ++a) {
                for (std::size_t b = 0; b < rd.size(); ++b) {
                  ChartDeriv d;
                  d.score = ld[a].score + rd[b].score;
                  d.key = "(" + p.category.str() + " " + std::string(rule_name(p.rule)) + " " + ld[a].key + " " +
                          rd[b].key + ")";
                  d.rule = p.rule;
                  d.left_item = li;
                  d.left_rank = static_cast<std::int32_t>(a);
                  d.right_item = ri;
                  d.right_rank = static_cast<std::int32_t>(b);
                  fresh.push_back(std::move(d));
                }
              }
              auto& base = items_[static_cast<std::size_t>(id)].base;
              base.insert(base.end(), std::make_move_iterator(fresh.begin()), std::make_move_iterator(fresh.end()));
              keep_best(base, n_);
            }
          }
        }
      }
    }
    for (auto id : order) keep_best(items_[static_cast<std::size_t>(id)].base, n_);

    // Unary derivations read only the base lists, so they never chain.
    std::vector<std::pair<std::int32_t, ChartDeriv>> unary;
    const std::vector<std::int32_t> base_items = order;
    for (auto id : base_items) {
      const Category from = items_[static_cast<std::size_t>(id)].category;
      for (const auto& p : problem_.grammar->unary_rules(from)) {
        auto target = touch(p.category);
        const auto& base = items_[static_cast<std::size_t>(id)].base;
        for (std::size_t r = 0; r < base.size(); ++r) {
          ChartDeriv d;
          d.score = base[r].score;
          d.key = "(" + p.category.str() + " UNARY " + base[r].key + ")";
          d.rule = RuleKind::Unary;
          d.left_item = id;
          d.left_rank = static_cast<std::int32_t>(r);
          d.left_from_base = true;
          unary.emplace_back(target, std::move(d));
        }
      }
    }
    for (auto id : order) items_[static_cast<std::size_t>(id)].full = items_[static_cast<std::size_t>(id)].base;
    for (auto& [target, d] : unary) items_[static_cast<std::size_t>(target)].full.push_back(std::move(d));
    for (auto id : order) keep_best(items_[static_cast<std::size_t>(id)].full, n_);

    auto& c = cell(i, j);
    for (auto id : order) {
      if (!items_[static_cast<std::size_t>(id)].full.empty()) c.emplace_back(items_[static_cast<std::size_t>(id)].category.str(), id);
    }
  }

  std::int32_t build(Tree& tree, std::int32_t item_id, const ChartDeriv& d) {
    const auto& item = items_[static_cast<std::size_t>(item_id)];
    switch (d.rule) {
      case RuleKind::Lex: return tree.add_leaf(item.span.start, item.category);
      case RuleKind::Unary: {
        const auto& child = items_[static_cast<std::size_t>(d.left_item)];
        const auto& list = d.left_from_base ? child.base : child.full;
        auto c = build(tree, d.left_item, list[static_cast<std::size_t>(d.left_rank)]);
        return tree.add_unary(item.category, c);
      }
      default: {
        const auto& l = items_[static_cast<std::size_t>(d.left_item)];
        const auto& r = items_[static_cast<std::size_t>(d.right_item)];
        auto lc = build(tree, d.left_item, l.full[static_cast<std::size_t>(d.left_rank)]);
        auto rc = build(tree, d.right_item, r.full[static_cast<std::size_t>(d.right_rank)]);
        return tree.add_binary(item.category, d.rule, lc, rc);
      }
    }
  }

  const SearchProblem& problem_;
  std::size_t n_;
  std::int32_t len_;
  std::vector<ChartItem> items_;
  std::vector<Cell> cells_;
};

}  // namespace

std::vector<ScoredTree> local_kbest(const SearchProblem& problem, std::size_t n) {
  if (n == 0) return {};
  return KBestChart(problem, n).run();
}

}  // namespace gparse
