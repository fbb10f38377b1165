#include <random>
#include <sstream>

#include "doctest.h"
#include "gparse/error.hpp"
#include "gparse/oracle.hpp"
#include "gparse/supertags.hpp"
#include "gparse/synthetic.hpp"

using namespace gparse;

namespace {

SupertagTable table_with_maxima(const std::vector<double>& maxima) {
  std::vector<std::vector<ScoredCategory>> tags;
  for (double m : maxima) {
    tags.push_back({{Category::atomic("N"), m - 1.0}, {Category::atomic("NP"), m}});
  }
  return SupertagTable(std::move(tags));
}

}  // namespace

TEST_CASE("score_local reads leaf scores and is zero elsewhere") {
  std::vector<std::vector<ScoredCategory>> tags = {
      {{parse_category("NP/NP"), -0.2}, {parse_category("NP"), -0.9}},
      {{parse_category("NP"), -0.4}},
  };
  SupertagTable table(tags);
  NodeArena arena;
  NodeId bananas = arena.make_leaf(1, parse_category("NP"));
  CHECK(score_local(arena[bananas], table) == -0.4);
  NodeId fruit = arena.make_leaf(0, parse_category("NP/NP"));
  NodeId np = arena.make_binary(parse_category("NP"), RuleKind::ForwardApply, fruit, bananas);
  CHECK(score_local(arena[np], table) == 0.0);
  NodeId n = arena.make_leaf(0, parse_category("N"));
  NodeId unary = arena.make_unary(parse_category("NP"), n);
  CHECK(score_local(arena[unary], table) == 0.0);
  // A leaf the table does not offer.
  CHECK_THROWS_AS(score_local(arena[n], table), DataError);
}

TEST_CASE("heuristic sums the best scores outside the span") {
  SupertagTable table = table_with_maxima({-0.1, -0.2, -0.3});
  CHECK(table.max_score(1) == -0.2);
  CHECK(heuristic(Span{1, 2}, table) == doctest::Approx(-0.4));
  CHECK(heuristic(Span{0, 3}, table) == 0.0);
  CHECK(heuristic(Span{0, 1}, table) == doctest::Approx(-0.5));
}

TEST_CASE("heuristic matches a naive sum and is monotone") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> score(-5.0, 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + static_cast<int>(rng() % 12);
    std::vector<std::vector<ScoredCategory>> tags(n);
    std::vector<double> maxima(n, -1e300);
    for (int t = 0; t < n; ++t) {
      int k = 1 + static_cast<int>(rng() % 4);
      for (int j = 0; j < k; ++j) {
        double s = score(rng);
        tags[t].push_back({Category::atomic("C" + std::to_string(j)), s});
        maxima[t] = std::max(maxima[t], s);
      }
    }
    SupertagTable table(tags);
    for (int i = 0; i < n; ++i) {
      CHECK(table.max_score(i) == maxima[i]);
      for (int j = i + 1; j <= n; ++j) {
        double naive = 0.0;
        for (int t = 0; t < n; ++t) {
          if (t < i || t >= j) naive += maxima[t];
        }
        CHECK(heuristic(Span{i, j}, table) == doctest::Approx(naive).epsilon(1e-12));
        if (i > 0) CHECK(heuristic(Span{i - 1, j}, table) >= heuristic(Span{i, j}, table) - 1e-12);
        if (j < n) CHECK(heuristic(Span{i, j + 1}, table) >= heuristic(Span{i, j}, table) - 1e-12);
      }
    }
  }
}

TEST_CASE("supertag tables reject positive or missing scores") {
  CHECK_THROWS_AS(SupertagTable({{{Category::atomic("N"), 0.1}}}), DataError);
  std::vector<std::vector<ScoredCategory>> empty_token(1);
  CHECK_THROWS_AS(SupertagTable{empty_token}, DataError);
}

TEST_CASE("supertag file round trip") {
  std::istringstream in(
      "Fruit\tNP/NP:-0.2 NP:-0.9\n"
      "flies\tNP:-0.3 S\\NP:-0.8\n"
      "\n"
      "bananas\tNP:0\n");
  auto sentences = read_supertag_file(in);
  REQUIRE(sentences.size() == 2);
  CHECK(sentences[0].words == std::vector<std::string>{"Fruit", "flies"});
  CHECK(sentences[0].table.score(1, parse_category("S\\NP")).value() == doctest::Approx(-0.8));
  CHECK_FALSE(sentences[0].table.score(1, parse_category("S")).has_value());
  std::ostringstream out;
  for (const auto& s : sentences) write_supertag_block(out, s);
  std::istringstream again(out.str());
  auto back = read_supertag_file(again);
  REQUIRE(back.size() == 2);
  CHECK(back[0].table.tags(0)[1].logprob == sentences[0].table.tags(0)[1].logprob);
  CHECK(back[1].words == sentences[1].words);
}

TEST_CASE("heuristic bounds every completion on small sentences") {
  // For each subtree y of each enumerated parse, the score of the rest of the
  // parse (total minus the inside score of y) never exceeds h(span(y)).
  ToyGrammar toy = random_toy_grammar(7);
  auto sentences = random_sentences(toy, 25, 6, 3);
  ParameterStore model = random_model(toy.words, toy.categories, ModelDims{4, 3, 4}, 1);
  for (bool global : {false, true}) {
    for (const auto& words : sentences) {
      auto table = SupertagTable::from_lexicon(words, toy.lexicon);
      SearchProblem problem{&toy.grammar, &table, words, toy.roots, global ? &model : nullptr};
      for (const auto& parse : enumerate_parses(problem)) {
        std::vector<double> globals;
        score_tree(problem, parse.tree, &globals);
        std::vector<double> inside(parse.tree.size());
        for (std::size_t i = 0; i < parse.tree.size(); ++i) {
          const auto& n = parse.tree.node(static_cast<std::int32_t>(i));
          double local = 0.0;
          if (n.rule == RuleKind::Lex) local = *table.score(n.span.start, n.category);
          inside[i] = local + globals[i];
          if (n.left >= 0) inside[i] += inside[n.left];
          if (n.right >= 0) inside[i] += inside[n.right];
          CHECK(parse.score - inside[i] <= heuristic(n.span, table) + 1e-12);
        }
        CHECK(inside.back() == doctest::Approx(parse.score).epsilon(1e-12));
      }
    }
  }
}
