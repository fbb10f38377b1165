#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gparse/tree.hpp"

namespace gparse {

struct CorpusRecord {
  std::vector<std::string> words;
  Tree gold;
};

// Records are a whitespace-separated tokens line, a bracketed derivation
// line and a blank line. Errors carry the 1-based line number.
std::vector<CorpusRecord> read_corpus(std::istream& in);
std::vector<CorpusRecord> load_corpus(const std::string& path);
void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records);

// One sentence per line, tokens separated by whitespace. Blank lines are skipped.
std::vector<std::vector<std::string>> read_sentences(std::istream& in);

std::vector<std::string> split_tokens(const std::string& line);

}  // namespace gparse
