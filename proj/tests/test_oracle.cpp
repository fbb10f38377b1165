#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "gparse/error.hpp"
#include "gparse/oracle.hpp"
#include "gparse/synthetic.hpp"

using namespace gparse;

TEST_CASE("enumeration of the fruit-flies sentence contains both sentence readings") {
  Fixture fx = fruit_flies_fixture();
  auto table = SupertagTable::from_lexicon(fx.sentences[0], fx.lexicon);
  SearchProblem p{&fx.grammar, &table, fx.sentences[0], fx.roots, &fx.model};
  auto all = enumerate_parses(p);
  std::set<std::string> seen;
  for (const auto& t : all) seen.insert(t.tree.to_bracketed());
  CHECK(seen.size() == all.size());
  CHECK(seen.count(fruit_flies_expected()) == 1);
  CHECK(seen.count("(S BA (S BA (NP LEX 0) (S\\NP LEX 1)) (S\\S FA ((S\\S)/NP LEX 2) (NP LEX 3)))") == 1);
}

TEST_CASE("a single word yields one parse per tag and unary result") {
  Lexicon lex;
  lex.add("w", parse_category("NP"), -0.5);
  lex.add("w", parse_category("S"), -1.0);
  lex.add("w", parse_category("N"), -0.2);
  Grammar g(GrammarConfig{}, UnaryTable::defaults());
  std::vector<std::string> words = {"w"};
  auto table = SupertagTable::from_lexicon(words, lex);
  SearchProblem p{&g, &table, words, RootSet::parse("S,NP,N"), nullptr};
  auto all = enumerate_parses(p);
  CHECK(all.size() == 4);
  auto best = cky_viterbi(p);
  REQUIRE(best);
  CHECK(best->tree.to_bracketed() == "(N LEX 0)");
  CHECK(best->score == -0.2);

  SearchProblem only_s{&g, &table, words, RootSet::parse("S"), nullptr};
  CHECK(enumerate_parses(only_s).size() == 1);
  CHECK(cky_viterbi(only_s)->score == -1.0);
}

TEST_CASE("enumeration refuses long sentences") {
  Lexicon lex;
  lex.add("w", parse_category("NP"), -0.5);
  Grammar g;
  std::vector<std::string> words(8, "w");
  auto table = SupertagTable::from_lexicon(words, lex);
  SearchProblem p{&g, &table, words, RootSet::defaults(), nullptr};
  CHECK_THROWS_AS(enumerate_parses(p), ConfigError);
  CHECK_NOTHROW(enumerate_parses(p, 8));
}

TEST_CASE("oracle scores agree with incremental scoring") {
  ToyGrammar toy = random_toy_grammar(7);
  auto sentences = random_sentences(toy, 20, 6, 40);
  ParameterStore model = random_model(toy.words, toy.categories, ModelDims{5, 3, 4}, 6);
  for (const auto& words : sentences) {
    auto table = SupertagTable::from_lexicon(words, toy.lexicon);
    SearchProblem p{&toy.grammar, &table, words, toy.roots, &model};
    auto all = enumerate_parses(p);
    std::set<std::string> distinct;
    for (const auto& t : all) {
      distinct.insert(t.tree.to_bracketed());
      CHECK(std::fabs(t.score - score_tree(p, t.tree)) < 1e-12);
    }
    CHECK(distinct.size() == all.size());
  }
}

TEST_CASE("CKY agrees with local-only enumeration and A*") {
  ToyGrammar toy = random_toy_grammar(7);
  auto sentences = random_sentences(toy, 60, 6, 41);
  for (const auto& words : sentences) {
    auto table = SupertagTable::from_lexicon(words, toy.lexicon);
    SearchProblem p{&toy.grammar, &table, words, toy.roots, nullptr};
    auto best = cky_viterbi(p);
    REQUIRE(best);
    double max_enum = -1e300;
    for (const auto& t : enumerate_parses(p)) max_enum = std::max(max_enum, t.score);
    CHECK(std::fabs(best->score - max_enum) <= 1e-12);
    CHECK(best->score == doctest::Approx(score_tree(p, best->tree)).epsilon(1e-12));
    auto a = decode_astar(p, DecodeOptions{});
    REQUIRE(a.certificate == Certificate::Optimal);
    CHECK(std::fabs(a.score - best->score) <= 1e-12);
  }
}
