#include "gparse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "gparse/error.hpp"
#include "gparse/oracle.hpp"
#include "gparse/supertags.hpp"

namespace gparse {

namespace {

Category cat(std::string_view text) { return parse_category(text); }

std::vector<Category> cats(std::initializer_list<std::string_view> texts) {
  std::vector<Category> out;
  for (auto t : texts) out.push_back(cat(t));
  return out;
}

const std::vector<Category>& toy_pool() {
  static const auto pool = cats({"N", "NP", "NP/N", "N/N", "S\\NP", "(S\\NP)/NP", "(NP\\NP)/NP",
                                 "((S\\NP)\\(S\\NP))/NP", "S/S", "S\\S", "NP\\NP", "(S\\NP)/(S\\NP)", "S/NP",
                                 "S/(S\\NP)"});
  return pool;
}

// Categories that show up as results of the pool's combinations.
const std::vector<Category>& toy_results() {
  static const auto results = cats({"S", "(S\\NP)\\(S\\NP)", "NP\\NP", "S/N", "(S\\NP)/N", "S/(S\\NP)"});
  return results;
}

Vocabulary vocabulary_of(const std::vector<std::string>& items) {
  Vocabulary v;
  for (const auto& s : items) v.add(s);
  return v;
}

Vocabulary vocabulary_of(const std::vector<Category>& items) {
  Vocabulary v;
  for (const auto& c : items) v.add(c.str());
  return v;
}

}  // namespace

ToyGrammar random_toy_grammar(std::uint64_t seed, int vocabulary) {
  std::mt19937_64 rng(seed);
  ToyGrammar toy;
  toy.grammar = Grammar(GrammarConfig{true}, UnaryTable::defaults());
  const auto& pool = toy_pool();
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> count(2, 3);
  std::uniform_real_distribution<double> logprob(-4.0, -0.01);
  for (int w = 0; w < vocabulary; ++w) {
    const std::string word = "w" + std::to_string(w);
    toy.words.push_back(word);
    std::set<std::size_t> chosen;
    const int k = count(rng);
    while (static_cast<int>(chosen.size()) < k) chosen.insert(pick(rng));
    for (auto c : chosen) toy.lexicon.add(word, pool[c], logprob(rng));
  }
  toy.categories = pool;
  for (const auto& c : toy_results()) toy.categories.push_back(c);
  toy.categories.push_back(cat("S"));
  return toy;
}

std::vector<std::vector<std::string>> random_sentences(const ToyGrammar& toy, std::size_t count,
                                                       std::int32_t max_length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int32_t> length(1, max_length);
  std::uniform_int_distribution<std::size_t> word(0, toy.words.size() - 1);
  std::vector<std::vector<std::string>> out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000 * (count + 1)) throw InternalError("random_sentences: grammar derives too few sentences");
    std::vector<std::string> s(static_cast<std::size_t>(length(rng)));
    for (auto& w : s) w = toy.words[word(rng)];
    const auto table = SupertagTable::from_lexicon(s, toy.lexicon);
    SearchProblem problem{&toy.grammar, &table, s, toy.roots, nullptr};
    if (cky_viterbi(problem)) out.push_back(std::move(s));
  }
  return out;
}

ParameterStore random_model(const std::vector<std::string>& words, const std::vector<Category>& categories,
                            const ModelDims& dims, std::uint64_t seed) {
  auto params = ParameterStore::create(dims, vocabulary_of(words), vocabulary_of(categories));
  params.initialize(seed);
  return params;
}

ParameterStore rigged_model(const std::vector<std::string>& words, const std::vector<Category>& neutral,
                            const std::vector<Category>& penalized) {
  std::vector<Category> all = neutral;
  all.insert(all.end(), penalized.begin(), penalized.end());
  auto params = ParameterStore::create(ModelDims{1, 1, 1}, vocabulary_of(words), vocabulary_of(all));
  for (const auto& c : neutral) params.category_embeddings(0, params.categories.lookup(c.str())) = 1.0;
  for (const auto& c : penalized) params.category_embeddings(0, params.categories.lookup(c.str())) = -1.0;
  // Input and output gates saturate open, so h = tanh(tanh(A x)) for the
  // category input x and the score is log sigmoid(B h).
  for (auto& rule : params.rules) {
    rule.w_c(0, 2) = 20.0;
    rule.b_i(0) = 40.0;
    rule.b_o(0) = 40.0;
  }
  params.score(0) = 20.0;
  return params;
}

namespace {

struct TreeBuilder {
  Tree tree;
  std::int32_t next = 0;

  std::int32_t leaf(std::string_view c) { return tree.add_leaf(next++, cat(c)); }
  std::int32_t fa(std::string_view c, std::int32_t l, std::int32_t r) {
    return tree.add_binary(cat(c), RuleKind::ForwardApply, l, r);
  }
  std::int32_t ba(std::string_view c, std::int32_t l, std::int32_t r) {
    return tree.add_binary(cat(c), RuleKind::BackwardApply, l, r);
  }
};

const std::vector<std::string> kDeterminers{"the", "a"};
const std::vector<std::string> kNouns{"dog", "man", "telescope", "bone", "park"};
const std::vector<std::string> kPrepositions{"with", "near"};

bool attaches_to_verb(const std::string& object_noun) { return object_noun == "telescope" || object_noun == "park"; }

struct NounPhrase {
  std::string determiner;
  bool adjective = false;
  std::string noun;
};

class PlantedGenerator {
 public:
  explicit PlantedGenerator(std::uint64_t seed) : rng_(seed) {}

  CorpusRecord sentence() {
    std::uniform_int_distribution<int> templ(0, 9);
    const int t = templ(rng_);
    words_.clear();
    b_ = TreeBuilder{};
    if (t < 7) return transitive_pp();
    if (t < 8) return intransitive_pp();
    return subject_pp();
  }

 private:
  const std::string& choose(const std::vector<std::string>& from) {
    std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
    return from[d(rng_)];
  }

  NounPhrase draw_np() {
    std::bernoulli_distribution adjective(0.3);
    NounPhrase np;
    np.determiner = choose(kDeterminers);
    np.adjective = adjective(rng_);
    np.noun = choose(kNouns);
    return np;
  }

  std::int32_t emit(const NounPhrase& np) {
    words_.push_back(np.determiner);
    const auto det = b_.leaf("NP/N");
    std::int32_t nom;
    if (np.adjective) {
      words_.push_back("big");
      const auto adj = b_.leaf("N/N");
      words_.push_back(np.noun);
      nom = b_.fa("N", adj, b_.leaf("N"));
    } else {
      words_.push_back(np.noun);
      nom = b_.leaf("N");
    }
    return b_.fa("NP", det, nom);
  }

  std::int32_t verb_pp(const std::string& prep, const NounPhrase& object) {
    words_.push_back(prep);
    const auto p = b_.leaf("((S\\NP)\\(S\\NP))/NP");
    return b_.fa("(S\\NP)\\(S\\NP)", p, emit(object));
  }

  std::int32_t noun_pp(const std::string& prep, const NounPhrase& object) {
    words_.push_back(prep);
    const auto p = b_.leaf("(NP\\NP)/NP");
    return b_.fa("NP\\NP", p, emit(object));
  }

  CorpusRecord transitive_pp() {
    const auto subject_np = draw_np();
    const auto object_np = draw_np();
    const auto prep = choose(kPrepositions);
    const auto pp_np = draw_np();

    const auto subject = emit(subject_np);
    words_.push_back("saw");
    const auto verb = b_.leaf("(S\\NP)/NP");
    const auto object = emit(object_np);
    if (attaches_to_verb(pp_np.noun)) {
      const auto vp = b_.fa("S\\NP", verb, object);
      return finish(subject, b_.ba("S\\NP", vp, verb_pp(prep, pp_np)));
    }
    const auto np = b_.ba("NP", object, noun_pp(prep, pp_np));
    return finish(subject, b_.fa("S\\NP", verb, np));
  }

  CorpusRecord intransitive_pp() {
    const auto subject_np = draw_np();
    const auto prep = choose(kPrepositions);
    const auto pp_np = draw_np();
    const auto subject = emit(subject_np);
    words_.push_back("slept");
    const auto verb = b_.leaf("S\\NP");
    return finish(subject, b_.ba("S\\NP", verb, verb_pp(prep, pp_np)));
  }

  CorpusRecord subject_pp() {
    const auto head_np = draw_np();
    const auto prep = choose(kPrepositions);
    const auto pp_np = draw_np();
    const auto object_np = draw_np();
    const auto head = emit(head_np);
    const auto subject = b_.ba("NP", head, noun_pp(prep, pp_np));
    words_.push_back("saw");
    const auto verb = b_.leaf("(S\\NP)/NP");
    return finish(subject, b_.fa("S\\NP", verb, emit(object_np)));
  }

  CorpusRecord finish(std::int32_t subject, std::int32_t vp) {
    b_.ba("S", subject, vp);
    return {words_, std::move(b_.tree)};
  }

  std::mt19937_64 rng_;
  std::vector<std::string> words_;
  TreeBuilder b_;
};

}  // namespace

PlantedCorpus planted_corpus(std::uint64_t seed, std::size_t train_size, std::size_t dev_size) {
  PlantedCorpus pc;
  pc.grammar = Grammar(GrammarConfig{false}, UnaryTable::defaults());
  // The supertag scores lean towards noun attachment, so the local model
  // gets every verb attachment wrong.
  const double noun_attach = std::log(0.6);
  const double verb_attach = std::log(0.4);
  for (const auto& d : kDeterminers) pc.lexicon.add(d, cat("NP/N"), 0.0);
  pc.lexicon.add("big", cat("N/N"), 0.0);
  for (const auto& n : kNouns) pc.lexicon.add(n, cat("N"), 0.0);
  pc.lexicon.add("saw", cat("(S\\NP)/NP"), 0.0);
  pc.lexicon.add("slept", cat("S\\NP"), 0.0);
  for (const auto& p : kPrepositions) {
    pc.lexicon.add(p, cat("(NP\\NP)/NP"), noun_attach);
    pc.lexicon.add(p, cat("((S\\NP)\\(S\\NP))/NP"), verb_attach);
  }
  for (const auto& [w, _] : pc.lexicon.entries()) pc.words.push_back(w);
  pc.categories = cats({"N", "NP", "S", "N/N", "NP/N", "S\\NP", "(S\\NP)/NP", "(NP\\NP)/NP",
                        "((S\\NP)\\(S\\NP))/NP", "NP\\NP", "(S\\NP)\\(S\\NP)"});
  PlantedGenerator gen(seed);
  for (std::size_t i = 0; i < train_size; ++i) pc.train.push_back(gen.sentence());
  for (std::size_t i = 0; i < dev_size; ++i) pc.dev.push_back(gen.sentence());
  return pc;
}

Fixture fruit_flies_fixture() {
  Fixture f;
  f.grammar = Grammar(GrammarConfig{false}, UnaryTable::defaults());
  f.lexicon.add("Fruit", cat("NP/NP"), -0.2);
  f.lexicon.add("Fruit", cat("NP"), -0.9);
  f.lexicon.add("flies", cat("NP"), -0.3);
  f.lexicon.add("flies", cat("S\\NP"), -0.8);
  f.lexicon.add("like", cat("(S\\NP)/NP"), -0.4);
  f.lexicon.add("like", cat("(S\\S)/NP"), -0.7);
  f.lexicon.add("bananas", cat("NP"), 0.0);
  f.sentences = {{"Fruit", "flies", "like", "bananas"}};
  f.model = rigged_model({"Fruit", "flies", "like", "bananas"},
                         cats({"NP", "NP/NP", "S\\NP", "(S\\NP)/NP", "(S\\S)/NP", "S\\S", "S"}), {});
  return f;
}

std::string fruit_flies_expected() {
  TreeBuilder b;
  const auto fruit = b.leaf("NP/NP");
  const auto np = b.fa("NP", fruit, b.leaf("NP"));
  const auto like = b.leaf("(S\\NP)/NP");
  const auto vp = b.fa("S\\NP", like, b.leaf("NP"));
  b.ba("S", np, vp);
  return b.tree.to_bracketed();
}

Fixture garden_path_fixture() {
  Fixture f;
  UnaryTable unary = UnaryTable::defaults();
  for (int k = 1; k <= 4; ++k) unary.add(cat("J"), cat("K" + std::to_string(k)));
  std::vector<Category> penalized;
  for (int k = 1; k <= 12; ++k) {
    const auto p = cat("P" + std::to_string(k));
    unary.add(p, cat("NP"));
    penalized.push_back(p);
  }
  f.grammar = Grammar(GrammarConfig{false}, std::move(unary));

  // Sentence 1: "gb gc" derives four junk items (J and its unary images)
  // that outscore the S\NP the best parse needs.
  f.lexicon.add("ga", cat("NP"), 0.0);
  f.lexicon.add("ga", cat("S/K1"), -5.0);
  f.lexicon.add("gb", cat("(S\\NP)/Z"), -0.5);
  f.lexicon.add("gb", cat("J/R"), 0.0);
  f.lexicon.add("gc", cat("Z"), -0.5);
  f.lexicon.add("gc", cat("R"), 0.0);
  // Sentence 2: twelve locally better readings of "rd" are all penalized.
  f.lexicon.add("ra", cat("NP"), 0.0);
  f.lexicon.add("rb", cat("(S\\NP)/NP"), 0.0);
  for (int k = 1; k <= 12; ++k) f.lexicon.add("rd", penalized[static_cast<std::size_t>(k - 1)], -0.01 * k);
  f.lexicon.add("rd", cat("NP"), -3.0);
  f.sentences = {{"ga", "gb", "gc"}, {"ra", "rb", "rd"}};

  auto neutral = cats({"NP", "S", "S\\NP", "(S\\NP)/NP", "(S\\NP)/Z", "Z", "J/R", "R", "J", "K1", "K2", "K3", "K4",
                       "S/K1"});
  f.model = rigged_model({"ga", "gb", "gc", "ra", "rb", "rd"}, neutral, penalized);
  return f;
}

}  // namespace gparse
