#include "gparse/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gparse/error.hpp"

namespace gparse {

std::vector<std::string> split_tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

namespace {

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

std::vector<CorpusRecord> read_corpus(std::istream& in) {
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw DataError("corpus line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    CorpusRecord rec;
    rec.words = split_tokens(line);
    if (!std::getline(in, line) || blank(line)) {
      ++lineno;
      fail("expected a bracketed derivation after the tokens line");
    }
    ++lineno;
    try {
      rec.gold = Tree::parse_bracketed(line);
    } catch (const ParseError& e) {
      fail(e.what());
    } catch (const DataError& e) {
      fail(e.what());
    }
    const auto leaves = rec.gold.supertags().size();
    if (leaves != rec.words.size()) {
      fail("derivation has " + std::to_string(leaves) + " leaves for " + std::to_string(rec.words.size()) +
           " tokens");
    }
    const auto span = rec.gold.node(rec.gold.root()).span;
    if (span.start != 0 || span.end != static_cast<std::int32_t>(rec.words.size())) {
      fail("derivation does not span the sentence");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CorpusRecord> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path);
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records) {
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.words.size(); ++i) out << (i ? " " : "") << r.words[i];
    out << '\n' << r.gold.to_bracketed() << "\n\n";
  }
}

std::vector<std::vector<std::string>> read_sentences(std::istream& in) {
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!blank(line)) out.push_back(split_tokens(line));
  }
  return out;
}

}  // namespace gparse
