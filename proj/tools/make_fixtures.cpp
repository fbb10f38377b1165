// Regenerates the files under data/ from the seeded generators.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gparse/decoder.hpp"
#include "gparse/supertags.hpp"
#include "gparse/synthetic.hpp"

namespace fs = std::filesystem;
using namespace gparse;

namespace {

std::ofstream open(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_sentences(const fs::path& p, const std::vector<std::vector<std::string>>& sentences) {
  auto out = open(p);
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << '\n';
  }
}

void write_fixture(const fs::path& dir, const Fixture& f) {
  auto lex = open(dir / "lexicon.tsv");
  f.lexicon.write(lex);
  auto unary = open(dir / "unary.tsv");
  f.grammar.unary_table().write(unary);
  write_sentences(dir / "sentences.txt", f.sentences);
  f.model.save((dir / "model.json").string());
  // The model's optimum doubles as the gold reading.
  std::vector<CorpusRecord> gold;
  for (const auto& s : f.sentences) {
    const auto table = SupertagTable::from_lexicon(s, f.lexicon);
    SearchProblem problem{&f.grammar, &table, s, f.roots, &f.model};
    gold.push_back({s, decode_astar(problem, DecodeOptions{}).parse});
  }
  auto corpus = open(dir / "gold.txt");
  write_corpus(corpus, gold);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2 || argv[1][0] == '-') {
    std::cerr << "usage: make-fixtures <data-dir>\n";
    return 1;
  }
  const fs::path root = argv[1];

  const auto toy = random_toy_grammar(7);
  {
    auto lex = open(root / "toy" / "lexicon.tsv");
    toy.lexicon.write(lex);
  }
  write_sentences(root / "toy" / "sentences.txt", random_sentences(toy, 200, 7, 11));
  random_model(toy.words, toy.categories, ModelDims{8, 4, 8}, 3).save((root / "toy" / "model.json").string());

  const auto pc = planted_corpus(1);
  {
    auto lex = open(root / "planted" / "lexicon.tsv");
    pc.lexicon.write(lex);
    auto train_out = open(root / "planted" / "train.txt");
    write_corpus(train_out, pc.train);
    auto dev_out = open(root / "planted" / "dev.txt");
    write_corpus(dev_out, pc.dev);
  }
  write_fixture(root / "fruit_flies", fruit_flies_fixture());
  write_fixture(root / "garden_path", garden_path_fixture());
  return 0;
}
