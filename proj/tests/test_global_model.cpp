#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "gparse/error.hpp"
#include "gparse/global_model.hpp"
#include "gparse/oracle.hpp"
#include "gparse/search.hpp"
#include "gparse/synthetic.hpp"

using namespace gparse;

namespace {

const std::vector<std::string> kWords = {"a", "b", "c"};
const std::vector<Category> kCats = {parse_category("NP"), parse_category("S\\NP"), parse_category("S"),
                                     parse_category("N")};

ParameterStore small_model(std::uint64_t seed, ModelDims dims = {3, 2, 3}) {
  ParameterStore p = random_model(kWords, kCats, dims, seed);
  // Nonzero biases and boundary states so every tensor influences the output.
  std::mt19937_64 rng(seed + 100);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& t : p.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (t.data[i] == 0.0) t.data[i] = u(rng);
    }
  }
  return p;
}

void check_state(const Eigen::VectorXd& got, const std::vector<double>& want, double tol) {
  REQUIRE(static_cast<std::size_t>(got.size()) == want.size());
  for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::fabs(got[k] - want[k]) < tol);
}

// Builds a small scored structure: three leaves, a unary node over the first,
// and a binary node, with score heads everywhere. Returns the score units.
struct Built {
  std::vector<std::int32_t> scores;
};

Built build(ComputationGraph& g, const std::vector<std::string>& words) {
  auto enc = g.encode_sentence(words);
  Built b;
  std::vector<std::int32_t> leaves;
  for (std::int32_t t = 0; t < static_cast<std::int32_t>(words.size()); ++t) {
    auto in = g.leaf_state(t, enc);
    leaves.push_back(g.tree_unit(RuleKind::Lex, kCats[static_cast<std::size_t>(t) % 2], in.left, in.right));
    b.scores.push_back(g.score_head(leaves.back()));
  }
  auto unary = g.tree_unit(RuleKind::Unary, kCats[2], g.unary_left(), leaves[0]);
  b.scores.push_back(g.score_head(unary));
  auto bin = g.tree_unit(RuleKind::BackwardApply, kCats[2], unary, leaves[1]);
  b.scores.push_back(g.score_head(bin));
  auto comp = g.tree_unit(RuleKind::ForwardCompose, kCats[3], bin, leaves[2]);
  b.scores.push_back(g.score_head(comp));
  return b;
}

double weighted_total(const ParameterStore& p, const std::vector<double>& weights) {
  ComputationGraph g(p, false);
  auto b = build(g, {"a", "c", "zzz"});
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) total += weights[k] * g.score(b.scores[k]);
  return total;
}

// Largest |analytic - numeric| / max(1, |numeric|) over every scalar of
// every tensor, central differences with step 1e-5.
double worst_gradient_error(const ParameterStore& params, const ParameterStore& grads,
                            const std::function<double(const ParameterStore&)>& f) {
  double worst = 0.0;
  auto gt = grads.tensors();
  ParameterStore q = params;
  auto qt = q.tensors();
  for (std::size_t k = 0; k < qt.size(); ++k) {
    for (Eigen::Index i = 0; i < qt[k].size(); ++i) {
      const double saved = qt[k].data[i];
      qt[k].data[i] = saved + 1e-5;
      const double up = f(q);
      qt[k].data[i] = saved - 1e-5;
      const double down = f(q);
      qt[k].data[i] = saved;
      const double numeric = (up - down) / 2e-5;
      worst = std::max(worst, std::fabs(gt[k].data[i] - numeric) / std::max(1.0, std::fabs(numeric)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("zero parameters give zero chain and tree states") {
  ParameterStore p = ParameterStore::create(ModelDims{3, 2, 4}, Vocabulary{}, Vocabulary{});
  ComputationGraph g(p, false);
  auto enc = g.encode_sentence({"x", "y", "z"});
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(g.c(enc.forward[t]).isZero(0.0));
    CHECK(g.h(enc.forward[t]).isZero(0.0));
    CHECK(g.c(enc.backward[t]).isZero(0.0));
    CHECK(g.h(enc.backward[t]).isZero(0.0));
  }
  auto in = g.leaf_state(1, enc);
  auto y = g.tree_unit(RuleKind::Lex, parse_category("NP"), in.left, in.right);
  CHECK(g.c(y).isZero(0.0));
  CHECK(g.h(y).isZero(0.0));
  CHECK(g.score(g.score_head(y)) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("forward chain state at a token ignores later words") {
  ParameterStore p = small_model(3);
  ComputationGraph g1(p, false), g2(p, false);
  auto e1 = g1.encode_sentence({"a", "b", "c"});
  auto e2 = g2.encode_sentence({"a", "c"});
  CHECK(g1.h(e1.forward[0]) == g2.h(e2.forward[0]));
  CHECK(g1.c(e1.forward[0]) == g2.c(e2.forward[0]));
  CHECK(g1.h(e1.backward[2]) == g2.h(e2.backward[1]));
}

TEST_CASE("chain states match the straight-line evaluator") {
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    ModelDims dims{2 + static_cast<int>(seed % 3), 2, 2 + static_cast<int>(seed % 3)};
    ParameterStore p = small_model(seed, dims);
    std::vector<std::string> words = {"b", "a", "unseen", "c", "a"};
    ComputationGraph g(p, false);
    auto enc = g.encode_sentence(words);
    std::vector<reference::State> fwd, bwd;
    reference::encode(p, words, fwd, bwd);
    for (std::size_t t = 0; t < words.size(); ++t) {
      check_state(g.c(enc.forward[t]), fwd[t].c, 1e-12);
      check_state(g.h(enc.forward[t]), fwd[t].h, 1e-12);
      check_state(g.c(enc.backward[t]), bwd[t].c, 1e-12);
      check_state(g.h(enc.backward[t]), bwd[t].h, 1e-12);
      for (Eigen::Index k = 0; k < g.h(enc.forward[t]).size(); ++k) {
        CHECK(std::fabs(g.h(enc.forward[t])[k]) < 1.0);
      }
    }
  }
}

TEST_CASE("dropout masks apply identically in both evaluators") {
  ParameterStore p = small_model(8);
  std::vector<std::string> words = {"a", "b"};
  Eigen::MatrixXd mask(p.dims.word, 2);
  mask << 0.0, 1.0 / 0.6, 1.0 / 0.6, 0.0, 1.0 / 0.6, 1.0 / 0.6;
  ComputationGraph g(p, false);
  auto enc = g.encode_sentence(words, &mask);
  std::vector<reference::State> fwd, bwd;
  reference::encode(p, words, fwd, bwd, &mask);
  for (std::size_t t = 0; t < 2; ++t) {
    check_state(g.h(enc.forward[t]), fwd[t].h, 1e-12);
    check_state(g.h(enc.backward[t]), bwd[t].h, 1e-12);
  }
}

TEST_CASE("leaf_state selects the chain states at the token") {
  ParameterStore p = small_model(2);
  ComputationGraph g(p, false);
  auto enc = g.encode_sentence({"c"});
  auto in = g.leaf_state(0, enc);
  CHECK(in.left == enc.forward[0]);
  CHECK(in.right == enc.backward[0]);
  CHECK_THROWS_AS(g.leaf_state(1, enc), InternalError);
}

TEST_CASE("tree units match the straight-line evaluator") {
  ParameterStore p = small_model(11, ModelDims{3, 3, 3});
  std::vector<std::string> words = {"a", "b", "c"};
  ComputationGraph g(p, false);
  auto enc = g.encode_sentence(words);
  std::vector<reference::State> fwd, bwd;
  reference::encode(p, words, fwd, bwd);

  auto in0 = g.leaf_state(0, enc);
  auto in1 = g.leaf_state(1, enc);
  auto l0 = g.tree_unit(RuleKind::Lex, kCats[0], in0.left, in0.right);
  auto l1 = g.tree_unit(RuleKind::Lex, kCats[1], in1.left, in1.right);
  auto r0 = reference::tree_unit(p, RuleKind::Lex, kCats[0], fwd[0], bwd[0]);
  auto r1 = reference::tree_unit(p, RuleKind::Lex, kCats[1], fwd[1], bwd[1]);
  check_state(g.c(l0), r0.c, 1e-12);
  check_state(g.h(l1), r1.h, 1e-12);

  auto ba = g.tree_unit(RuleKind::BackwardApply, kCats[2], l0, l1);
  auto rba = reference::tree_unit(p, RuleKind::BackwardApply, kCats[2], r0, r1);
  check_state(g.c(ba), rba.c, 1e-12);
  check_state(g.h(ba), rba.h, 1e-12);

  auto un = g.tree_unit(RuleKind::Unary, kCats[0], g.unary_left(), l0);
  reference::State unary_left{std::vector<double>(p.c_unary.data(), p.c_unary.data() + p.c_unary.size()),
                              std::vector<double>(p.h_unary.data(), p.h_unary.data() + p.h_unary.size())};
  auto run = reference::tree_unit(p, RuleKind::Unary, kCats[0], unary_left, r0);
  check_state(g.h(un), run.h, 1e-12);

  CHECK(std::fabs(g.score(g.score_head(ba)) - reference::score(p, rba)) < 1e-12);
}

TEST_CASE("saturated input gate makes the cell the candidate") {
  ParameterStore p = small_model(4);
  auto& rule = p.rules[static_cast<std::size_t>(RuleKind::ForwardApply)];
  rule.b_i.setConstant(1000.0);
  ComputationGraph g(p, false);
  auto enc = g.encode_sentence({"a", "b"});
  auto in0 = g.leaf_state(0, enc);
  auto in1 = g.leaf_state(1, enc);
  auto l = g.tree_unit(RuleKind::Lex, kCats[0], in0.left, in0.right);
  auto r = g.tree_unit(RuleKind::Lex, kCats[1], in1.left, in1.right);
  auto y = g.tree_unit(RuleKind::ForwardApply, kCats[2], l, r);
  const int hd = p.dims.hidden;
  Eigen::VectorXd input(2 * hd + p.dims.category);
  input << g.h(l), g.h(r), p.category_embeddings.col(p.categories.lookup(kCats[2].str()));
  Eigen::VectorXd candidate = (rule.w_c * input + rule.b_c).array().tanh().matrix();
  CHECK(g.c(y) == candidate);
}

TEST_CASE("missing rule parameters are a configuration error") {
  ParameterStore p = small_model(4);
  p.rules[static_cast<std::size_t>(RuleKind::ForwardCompose)].w_i.resize(0, 0);
  ComputationGraph g(p, false);
  auto enc = g.encode_sentence({"a", "b"});
  auto in = g.leaf_state(0, enc);
  auto l = g.tree_unit(RuleKind::Lex, kCats[0], in.left, in.right);
  try {
    g.tree_unit(RuleKind::ForwardCompose, kCats[0], l, l);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("FC") != std::string::npos);
  }
}

TEST_CASE("log_sigmoid is stable and non-positive") {
  CHECK(log_sigmoid(0.0) == doctest::Approx(-0.693147).epsilon(1e-6));
  CHECK(log_sigmoid(-40.0) == doctest::Approx(-40.0).epsilon(1e-15));
  CHECK(std::isfinite(log_sigmoid(-1000.0)));
  CHECK(log_sigmoid(1000.0) <= 0.0);
  CHECK(log_sigmoid(30.0) < 0.0);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> z(-1000.0, 1000.0);
  for (int i = 0; i < 10000; ++i) {
    double v = z(rng);
    double got = log_sigmoid(v);
    long double want = reference::log_sigmoid(static_cast<long double>(v));
    REQUIRE(got <= 0.0);
    CHECK(std::fabs(got - static_cast<double>(want)) <= 1e-10 * std::max(1.0, std::fabs(static_cast<double>(want))));
  }
}

TEST_CASE("backward of an empty or cancelling seed is zero") {
  ParameterStore p = small_model(5);
  ComputationGraph g(p, true);
  auto b = build(g, {"a", "b", "c"});
  ParameterStore grads = p.zeros_like();
  g.backward({}, grads);
  CHECK(grads.squared_norm() == 0.0);
  g.backward({{b.scores[3], 1.0}, {b.scores[3], -1.0}}, grads);
  CHECK(grads.squared_norm() == 0.0);
  CHECK_THROWS_AS(g.backward({{0, 1.0}}, grads), InternalError);

  ComputationGraph light(p, false);
  auto lb = build(light, {"a", "b", "c"});
  CHECK_THROWS_AS(light.backward({{lb.scores[0], 1.0}}, grads), InternalError);
}

TEST_CASE("backward of a single leaf score matches finite differences") {
  ParameterStore p = small_model(6);
  ComputationGraph g(p, true);
  auto b = build(g, {"a", "c", "zzz"});
  ParameterStore grads = p.zeros_like();
  g.backward({{b.scores[1], 1.0}}, grads);
  CHECK(grads.squared_norm() > 0.0);
  double err = worst_gradient_error(p, grads, [](const ParameterStore& q) {
    return weighted_total(q, {0.0, 1.0});
  });
  CHECK(err < 1e-4);
}

TEST_CASE("backward over a shared structure matches finite differences") {
  ParameterStore p = small_model(7);
  std::vector<double> weights = {0.5, -1.0, 2.0, 1.0, -0.7, 1.3};
  ComputationGraph g(p, true);
  auto b = build(g, {"a", "c", "zzz"});
  std::vector<std::pair<std::int32_t, double>> seeds;
  for (std::size_t k = 0; k < weights.size(); ++k) seeds.emplace_back(b.scores[k], weights[k]);
  ParameterStore grads = p.zeros_like();
  g.backward(seeds, grads);
  double err = worst_gradient_error(p, grads, [&](const ParameterStore& q) { return weighted_total(q, weights); });
  CHECK(err < 1e-4);
}

TEST_CASE("shared children accumulate like disjoint copies") {
  // Two trees over the same leaf: one graph shares the leaf unit, the other
  // builds it twice. Gradients of the summed scores must agree.
  ParameterStore p = small_model(9);
  std::vector<std::string> words = {"a", "b"};

  ComputationGraph shared(p, true);
  auto enc = shared.encode_sentence(words);
  auto in0 = shared.leaf_state(0, enc);
  auto in1 = shared.leaf_state(1, enc);
  auto leaf = shared.tree_unit(RuleKind::Lex, kCats[0], in0.left, in0.right);
  auto other = shared.tree_unit(RuleKind::Lex, kCats[1], in1.left, in1.right);
  auto t1 = shared.tree_unit(RuleKind::BackwardApply, kCats[2], leaf, other);
  auto t2 = shared.tree_unit(RuleKind::Unary, kCats[3], shared.unary_left(), leaf);
  ParameterStore g_shared = p.zeros_like();
  shared.backward({{shared.score_head(t1), 1.0}, {shared.score_head(t2), 1.0}}, g_shared);

  ParameterStore g_split = p.zeros_like();
  {
    ComputationGraph a(p, true);
    auto e = a.encode_sentence(words);
    auto i0 = a.leaf_state(0, e);
    auto i1 = a.leaf_state(1, e);
    auto l = a.tree_unit(RuleKind::Lex, kCats[0], i0.left, i0.right);
    auto o = a.tree_unit(RuleKind::Lex, kCats[1], i1.left, i1.right);
    a.backward({{a.score_head(a.tree_unit(RuleKind::BackwardApply, kCats[2], l, o)), 1.0}}, g_split);
  }
  {
    ComputationGraph a(p, true);
    auto e = a.encode_sentence(words);
    auto i0 = a.leaf_state(0, e);
    auto l = a.tree_unit(RuleKind::Lex, kCats[0], i0.left, i0.right);
    a.backward({{a.score_head(a.tree_unit(RuleKind::Unary, kCats[3], a.unary_left(), l)), 1.0}}, g_split);
  }
  auto s = g_shared.tensors();
  auto d = g_split.tensors();
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (Eigen::Index i = 0; i < s[k].size(); ++i) CHECK(std::fabs(s[k].data[i] - d[k].data[i]) < 1e-12);
  }
}

TEST_CASE("incremental scoring is bitwise identical to whole-tree scoring") {
  ToyGrammar toy = random_toy_grammar(7);
  auto sentences = random_sentences(toy, 5, 5, 21);
  ParameterStore model = random_model(toy.words, toy.categories, ModelDims{6, 3, 5}, 2);
  for (const auto& words : sentences) {
    auto table = SupertagTable::from_lexicon(words, toy.lexicon);
    SearchProblem problem{&toy.grammar, &table, words, toy.roots, &model};
    ForestSearch search(problem, SearchOptions{});
    search.initialize();
    while (!search.agenda().empty()) search.step();
    for (NodeId id : search.forest().explored()) {
      Tree tree = search.arena().extract(id);
      std::vector<double> globals;
      std::vector<LatentState> states;
      score_tree(problem, tree, &globals, &states);
      const auto& node = search.arena()[id];
      REQUIRE(node.global.has_value());
      CHECK(globals.back() == *node.global);
      CHECK(states.back().h == search.scorer().graph()->h(node.state_unit));
    }
  }
}

TEST_CASE("model serialization is bit-stable") {
  ParameterStore p = small_model(12, ModelDims{4, 3, 5});
  p.word_embeddings(0, 0) = 0.1 + 0.2;  // not exactly representable in short decimal
  ParameterStore back = ParameterStore::from_json(p.to_json());
  CHECK(bitwise_equal(p, back));
  CHECK(back.to_json() == p.to_json());
  CHECK(back.words.items() == p.words.items());

  std::string text = p.to_json();
  auto pos = text.find("\"score\"");
  REQUIRE(pos != std::string::npos);
  CHECK_THROWS_AS(ParameterStore::from_json(text.substr(0, pos) + "\"scorx\"" + text.substr(pos + 7)), ConfigError);
  CHECK_THROWS_AS(ParameterStore::from_json("{not json"), ConfigError);
}
