#include "gparse/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "gparse/error.hpp"

namespace gparse {

void Lexicon::add(const std::string& word, const Category& category, double logprob) {
  if (!std::isfinite(logprob) || logprob > 0.0) {
    throw DataError("lexicon entry for '" + word + "' has invalid log-probability " +
                    std::to_string(logprob));
  }
  auto& list = entries_[word];
  for (auto& entry : list) {
    if (entry.category == category) {
      entry.logprob = std::max(entry.logprob, logprob);
      return;
    }
  }
  list.push_back({category, logprob});
}

std::vector<ScoredCategory> Lexicon::lexical_categories(const std::string& word) const {
  auto it = entries_.find(word);
  if (it != entries_.end()) return it->second;
  if (!oov_ || oov_->fallback.empty()) {
    throw DataError("word '" + word + "' is not in the lexicon and no OOV policy is configured");
  }
  std::vector<ScoredCategory> out;
  for (const auto& c : oov_->fallback) out.push_back({c, oov_->penalty});
  return out;
}

Lexicon Lexicon::read(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw DataError("lexicon line " + std::to_string(line_no) +
                      ": expected word<TAB>category<TAB>logprob");
    }
    try {
      std::size_t used = 0;
      std::string number = line.substr(t2 + 1);
      double lp = std::stod(number, &used);
      if (used != number.size()) throw std::invalid_argument("trailing characters");
      lex.add(line.substr(0, t1), parse_category(line.substr(t1 + 1, t2 - t1 - 1)), lp);
    } catch (const std::invalid_argument&) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": bad log-probability");
    } catch (const std::out_of_range&) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": bad log-probability");
    } catch (const ParseError& e) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon '" + path + "'");
  return read(in);
}

void Lexicon::write(std::ostream& out) const {
  auto precision = out.precision(17);
  for (const auto& [word, list] : entries_) {
    for (const auto& entry : list) out << word << '\t' << entry.category.str() << '\t' << entry.logprob << '\n';
  }
  out.precision(precision);
}

}  // namespace gparse
