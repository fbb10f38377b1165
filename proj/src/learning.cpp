#include "gparse/learning.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <random>

#include "gparse/error.hpp"
#include "gparse/metrics.hpp"
#include "gparse/parallel.hpp"

namespace gparse {

std::string_view update_name(UpdateKind kind) {
  switch (kind) {
    case UpdateKind::Greedy: return "greedy";
    case UpdateKind::MaxViolation: return "max";
    case UpdateKind::AllViolations: return "all";
  }
  return "?";
}

UpdateKind parse_update_kind(std::string_view text) {
  if (text == "greedy") return UpdateKind::Greedy;
  if (text == "max") return UpdateKind::MaxViolation;
  if (text == "all") return UpdateKind::AllViolations;
  throw ConfigError("unknown update kind '" + std::string(text) + "' (expected greedy, max or all)");
}

GoldDerivation::GoldDerivation(Tree tree) : tree_(std::move(tree)) {
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(tree_.size()); ++i) {
    by_hash_.emplace(tree_subtree_hash(tree_, i), i);
  }
}

bool GoldDerivation::contains(const NodeArena& arena, NodeId id) const {
  auto [lo, hi] = by_hash_.equal_range(arena[id].subtree_hash);
  for (auto it = lo; it != hi; ++it) {
    if (arena.equal(id, tree_, it->second)) return true;
  }
  return false;
}

ViolationPoint violation(const Agenda& agenda) {
  const AgendaEntry* gold = agenda.gold_top();
  if (!gold) throw InternalError("violation: no gold entry on the agenda");
  ViolationPoint p;
  p.top = agenda.top();
  p.gold = *gold;
  p.v = p.top.priority - p.gold.priority;
  return p;
}

CollectResult collect_violations(const SearchProblem& problem, const GoldDerivation& gold,
                                 const CollectOptions& options) {
  SearchOptions so;
  so.lazy = false;
  so.keep_activations = true;
  so.dropout = options.dropout;
  so.is_gold = [&gold](const NodeArena& arena, NodeId id) { return gold.contains(arena, id); };

  CollectResult out;
  out.search = std::make_unique<ForestSearch>(problem, std::move(so));
  auto& search = *out.search;
  search.initialize();
  const auto& limits = options.limits;
  while (search.agenda().gold_count() > 0) {
    if (search.forest().size() > limits.max_forest_size || search.agenda().size() > limits.max_agenda_size ||
        search.scorer().evaluations() > limits.max_tree_units) {
      out.record.limit_hit = true;
      break;
    }
    const auto p = violation(search.agenda());
    if (p.v > 0.0) {
      out.record.entries.push_back({p.v, search.edge(p.top.edge).head, search.edge(p.gold.edge).head,
                                    p.top.priority, p.gold.priority});
    }
    search.step();
    ++out.record.pops;
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> loss_terms(const ViolationRecord& record, UpdateKind kind) {
  std::vector<std::pair<std::size_t, double>> out;
  if (record.empty()) return out;
  switch (kind) {
    case UpdateKind::Greedy: out.emplace_back(0, 1.0); break;
    case UpdateKind::MaxViolation: {
      std::size_t best = 0;
      for (std::size_t t = 1; t < record.size(); ++t) {
        if (record.entries[t].v > record.entries[best].v) best = t;
      }
      out.emplace_back(best, 1.0);
      break;
    }
    case UpdateKind::AllViolations:
      for (std::size_t t = 0; t < record.size(); ++t) out.emplace_back(t, 1.0);
      break;
  }
  return out;
}

double loss(const ViolationRecord& record, UpdateKind kind) {
  double total = 0.0;
  for (auto [t, w] : loss_terms(record, kind)) total += w * record.entries[t].v;
  return total;
}

namespace {

void add_path_seeds(const ForestSearch& search, NodeId head, double weight, std::map<std::int32_t, double>& seeds) {
  std::vector<NodeId> nodes;
  search.arena().collect_subtree(head, nodes);
  for (NodeId n : nodes) {
    const auto unit = search.arena()[n].score_unit;
    if (unit < 0) throw InternalError("violation path contains an unscored edge");
    seeds[unit] += weight;
  }
}

void run_backward(const ForestSearch& search, const std::map<std::int32_t, double>& seeds, ParameterStore& grads) {
  std::vector<std::pair<std::int32_t, double>> list;
  for (auto [unit, w] : seeds) {
    if (w != 0.0) list.emplace_back(unit, w);
  }
  if (list.empty()) return;
  const auto* graph = search.scorer().graph();
  if (!graph) return;
  graph->backward(list, grads);
}

}  // namespace

void violation_subgradient(const ForestSearch& search, const ViolationEntry& entry, double weight,
                           ParameterStore& grads) {
  if (!search.scorer().enabled()) return;
  std::map<std::int32_t, double> seeds;
  add_path_seeds(search, entry.top_head, weight, seeds);
  add_path_seeds(search, entry.gold_head, -weight, seeds);
  run_backward(search, seeds, grads);
}

void loss_gradient(const ForestSearch& search, const ViolationRecord& record, UpdateKind kind, ParameterStore& grads) {
  if (!search.scorer().enabled()) return;
  std::map<std::int32_t, double> seeds;
  for (auto [t, w] : loss_terms(record, kind)) {
    add_path_seeds(search, record.entries[t].top_head, w, seeds);
    add_path_seeds(search, record.entries[t].gold_head, -w, seeds);
  }
  run_backward(search, seeds, grads);
}

double frozen_loss(const SearchProblem& problem, const ForestSearch& search, const ViolationRecord& record,
                   UpdateKind kind, const ParameterStore& params) {
  SearchProblem rescored = problem;
  rescored.params = &params;
  auto priority = [&](NodeId head) {
    const Tree t = search.arena().extract(head);
    return score_tree(rescored, t) + search.heuristic(search.arena()[head].span);
  };
  double total = 0.0;
  for (auto [t, w] : loss_terms(record, kind)) {
    const auto& e = record.entries[t];
    total += w * (priority(e.top_head) - priority(e.gold_head));
  }
  return total;
}

Adam::Adam(const ParameterStore& shape, AdamConfig config)
    : config_(config), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

void Adam::step(ParameterStore& params, const ParameterStore& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].size() != g[k].size()) throw InternalError("Adam: gradient shape mismatch for " + p[k].name);
    for (Eigen::Index i = 0; i < p[k].size(); ++i) {
      const double gi = g[k].data[i];
      double& mi = m[k].data[i];
      double& vi = v[k].data[i];
      mi = config_.beta1 * mi + (1.0 - config_.beta1) * gi;
      vi = config_.beta2 * vi + (1.0 - config_.beta2) * gi * gi;
      p[k].data[i] -= config_.learning_rate * (mi / c1) / (std::sqrt(vi / c2) + config_.epsilon);
    }
  }
}

std::optional<std::string> gold_unreachable(const Grammar& grammar, const RootSet& roots, const SupertagTable& table,
                                            const Tree& gold) {
  if (gold.empty()) return "empty gold tree";
  const auto root = gold.node(gold.root());
  if (root.span.start != 0 || root.span.end != table.length()) return "gold tree does not span the sentence";
  if (!roots.accepts(root.category)) return "gold root " + root.category.str() + " is not a root category";
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(gold.size()); ++i) {
    const auto& n = gold.node(i);
    auto has = [&](const std::vector<Production>& ps) {
      return std::any_of(ps.begin(), ps.end(),
                         [&](const Production& p) { return p.rule == n.rule && p.category == n.category; });
    };
    switch (n.rule) {
      case RuleKind::Lex:
        if (!table.score(n.span.start, n.category)) {
          return "gold supertag " + n.category.str() + " of token " + std::to_string(n.span.start) +
                 " is not in the table";
        }
        break;
      case RuleKind::Unary: {
        const auto& child = gold.node(n.left);
        if (child.rule == RuleKind::Unary) return "gold tree chains unary rules";
        if (!has(grammar.unary_rules(child.category))) return "unary " + n.category.str() + " is not licensed";
        break;
      }
      default:
        if (!has(grammar.combine(gold.node(n.left).category, gold.node(n.right).category))) {
          return std::string(rule_name(n.rule)) + " -> " + n.category.str() + " is not licensed";
        }
    }
  }
  return std::nullopt;
}

DevScore evaluate_decoder(const std::vector<TrainExample>& data, const Grammar& grammar, const RootSet& roots,
                          const ParameterStore* params, const DecodeLimits& limits, int jobs) {
  DecodeOptions options;
  options.limits = limits;
  std::vector<Tree> parses(data.size());
  parallel_for(data.size(), jobs, [&](std::size_t i) {
    SearchProblem problem{&grammar, &data[i].table, data[i].words, roots, params};
    parses[i] = decode_astar(problem, options).parse;
  });
  // Summed in input order so the result does not depend on scheduling.
  EvalSummary summary;
  for (std::size_t i = 0; i < data.size(); ++i) summary.add(parses[i], data[i].gold);
  return {summary.f1(), summary.exact_match()};
}

namespace {

Eigen::MatrixXd dropout_mask(int rows, int cols, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(1.0 - p);
  Eigen::MatrixXd mask(rows, cols);
  const double scale = 1.0 / (1.0 - p);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) mask(i, j) = keep(rng) ? scale : 0.0;
  }
  return mask;
}

}  // namespace

TrainResult train(const std::vector<TrainExample>& corpus, const std::vector<TrainExample>& dev,
                  const Grammar& grammar, const RootSet& roots, ParameterStore& params, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  if (config.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (config.dropout < 0.0 || config.dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");

  TrainResult result;
  std::vector<std::optional<GoldDerivation>> golds;
  std::size_t unreachable = 0;
  for (const auto& ex : corpus) {
    if (auto why = gold_unreachable(grammar, roots, ex.table, ex.gold)) {
      golds.emplace_back();
      ++unreachable;
    } else {
      golds.emplace_back(GoldDerivation(ex.gold));
    }
  }

  const bool track_dev = config.early_stopping && !dev.empty();
  ParameterStore best;
  if (track_dev && config.epochs > 0) {
    best = params;
    result.best_dev_f1 = evaluate_decoder(dev, grammar, roots, &params, config.dev_limits, config.dev_jobs).f1;
  }

  std::mt19937_64 rng(config.seed);
  Adam adam(params, config.adam);
  ParameterStore grads = params.zeros_like();
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  CollectOptions collect;
  collect.limits = config.limits;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    EpochMetrics m;
    m.epoch = epoch;
    m.skipped = unreachable;
    double loss_sum = 0.0;
    double violations_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t k : order) {
      if (!golds[k]) continue;
      const auto& ex = corpus[k];
      SearchProblem problem{&grammar, &ex.table, ex.words, roots, &params};
      Eigen::MatrixXd mask;
      collect.dropout = nullptr;
      if (config.dropout > 0.0) {
        mask = dropout_mask(params.dims.word, problem.length(), config.dropout, rng);
        collect.dropout = &mask;
      }
      auto collected = collect_violations(problem, *golds[k], collect);
      const double l = loss(collected.record, config.update);
      if (!std::isfinite(l)) {
        std::cerr << "epoch " << epoch << ": non-finite loss on training sentence " << k << ", aborting epoch\n";
        m.aborted = true;
        break;
      }
      loss_sum += l;
      violations_sum += static_cast<double>(collected.record.size());
      ++counted;
      if (collected.record.empty()) continue;
      grads.set_zero();
      loss_gradient(*collected.search, collected.record, config.update, grads);
      if (!grads.all_finite()) {
        std::cerr << "epoch " << epoch << ": non-finite gradient on training sentence " << k << ", aborting epoch\n";
        m.aborted = true;
        break;
      }
      adam.step(params, grads);
      ++m.updates;
    }
    if (counted > 0) {
      m.mean_loss = loss_sum / static_cast<double>(counted);
      m.mean_violations = violations_sum / static_cast<double>(counted);
    }
    if (!dev.empty()) {
      const auto score = evaluate_decoder(dev, grammar, roots, &params, config.dev_limits, config.dev_jobs);
      m.dev_f1 = score.f1;
      m.dev_exact = score.exact;
    }
    if (track_dev && m.dev_f1 > result.best_dev_f1) {
      result.best_dev_f1 = m.dev_f1;
      result.best_epoch = epoch;
      best = params;
    }
    result.epochs.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  if (track_dev && config.epochs > 0) {
    params = std::move(best);
  } else if (!result.epochs.empty()) {
    result.best_epoch = result.epochs.back().epoch;
    result.best_dev_f1 = result.epochs.back().dev_f1;
  }
  return result;
}

}  // namespace gparse
