#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gparse/corpus.hpp"
#include "gparse/grammar.hpp"
#include "gparse/lexicon.hpp"
#include "gparse/parameters.hpp"

namespace gparse {

// Generators for test grammars, corpora and hand-set models.

struct ToyGrammar {
  Grammar grammar;
  Lexicon lexicon;
  RootSet roots = RootSet::defaults();
  std::vector<std::string> words;
  std::vector<Category> categories;  // every lexical category plus common results
};

// Random lexicon of `vocabulary` words with 2-3 categories each drawn from a
// fixed pool, composition enabled.
ToyGrammar random_toy_grammar(std::uint64_t seed, int vocabulary = 16);

// Random sentences of length 1..max_length that the grammar can derive.
std::vector<std::vector<std::string>> random_sentences(const ToyGrammar& toy, std::size_t count,
                                                       std::int32_t max_length, std::uint64_t seed);

// Vocabularies built from the given items, Glorot-initialized.
ParameterStore random_model(const std::vector<std::string>& words, const std::vector<Category>& categories,
                            const ModelDims& dims, std::uint64_t seed);

// A 1-dimensional model whose node score depends only on the node category:
// about 0 for categories listed in `neutral`, about -15 for `penalized` and
// log(1/2) for anything else.
ParameterStore rigged_model(const std::vector<std::string>& words, const std::vector<Category>& neutral,
                            const std::vector<Category>& penalized);

// Prepositional-phrase attachment corpus. The gold attachment is decided by
// the object noun of the phrase, while the supertag scores always prefer
// noun attachment; only the global model sees the noun.
struct PlantedCorpus {
  Grammar grammar;
  Lexicon lexicon;
  RootSet roots = RootSet::defaults();
  std::vector<CorpusRecord> train;
  std::vector<CorpusRecord> dev;
  std::vector<std::string> words;
  std::vector<Category> categories;
};
PlantedCorpus planted_corpus(std::uint64_t seed, std::size_t train_size = 100, std::size_t dev_size = 50);

struct Fixture {
  Grammar grammar;
  Lexicon lexicon;
  RootSet roots = RootSet::defaults();
  std::vector<std::vector<std::string>> sentences;
  ParameterStore model;
};

// "Fruit flies like bananas" with both readings in the lexicon; the
// NP/NP reading has the better supertag scores.
Fixture fruit_flies_fixture();
std::string fruit_flies_expected();  // bracketed form of the expected derivation

// Two sentences that mislead pruning decoders. In the first, a span fills
// any small beam with items that cannot combine further. In the second, the
// ten best parses under the supertag scores all contain a category the
// model penalizes.
Fixture garden_path_fixture();

}  // namespace gparse
