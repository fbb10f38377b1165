#include "gparse/supertags.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gparse/error.hpp"

namespace gparse {

SupertagTable::SupertagTable(std::vector<std::vector<ScoredCategory>> tags) : tags_(std::move(tags)) {
  max_.reserve(tags_.size());
  prefix_.assign(tags_.size() + 1, 0.0);
  for (std::size_t t = 0; t < tags_.size(); ++t) {
    if (tags_[t].empty()) throw DataError("token " + std::to_string(t) + " has no supertag candidates");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& tag : tags_[t]) {
      if (!std::isfinite(tag.logprob) || tag.logprob > 0.0) {
        throw DataError("token " + std::to_string(t) + ": supertag score for " + tag.category.str() +
                        " must be a finite log-probability");
      }
      best = std::max(best, tag.logprob);
    }
    max_.push_back(best);
    prefix_[t + 1] = prefix_[t] + best;
  }
}

SupertagTable SupertagTable::from_lexicon(const std::vector<std::string>& words, const Lexicon& lexicon) {
  std::vector<std::vector<ScoredCategory>> tags;
  tags.reserve(words.size());
  for (const auto& w : words) tags.push_back(lexicon.lexical_categories(w));
  return SupertagTable(std::move(tags));
}

std::optional<double> SupertagTable::score(std::int32_t token, const Category& category) const {
  if (token < 0 || token >= length()) return std::nullopt;
  for (const auto& tag : tags(token)) {
    if (tag.category == category) return tag.logprob;
  }
  return std::nullopt;
}

double SupertagTable::outside(Span span) const {
  const double total = prefix_.back();
  return prefix_[static_cast<std::size_t>(span.start)] + (total - prefix_[static_cast<std::size_t>(span.end)]);
}

double score_local(const ParseNode& head, const SupertagTable& table) {
  if (!head.is_leaf()) return 0.0;
  auto s = table.score(head.span.start, head.category);
  if (!s) {
    throw DataError("no supertag " + head.category.str() + " for token " + std::to_string(head.span.start));
  }
  return *s;
}

std::vector<TaggedSentence> read_supertag_file(std::istream& in) {
  std::vector<TaggedSentence> out;
  std::vector<std::string> words;
  std::vector<std::vector<ScoredCategory>> tags;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (words.empty()) return;
    out.push_back({std::move(words), SupertagTable(std::move(tags))});
    words.clear();
    tags.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("supertag line " + std::to_string(line_no) + ": expected word<TAB>tags");
    }
    words.push_back(line.substr(0, tab));
    std::vector<ScoredCategory> cands;
    std::istringstream items(line.substr(tab + 1));
    std::string item;
    while (items >> item) {
      auto colon = item.rfind(':');
      if (colon == std::string::npos) {
        throw DataError("supertag line " + std::to_string(line_no) + ": expected category:logprob");
      }
      try {
        cands.push_back({parse_category(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      } catch (const ParseError& e) {
        throw DataError("supertag line " + std::to_string(line_no) + ": " + e.what());
      } catch (const std::exception&) {
        throw DataError("supertag line " + std::to_string(line_no) + ": bad score in '" + item + "'");
      }
    }
    tags.push_back(std::move(cands));
  }
  try {
    flush();
  } catch (const DataError& e) {
    throw DataError(std::string("supertag file: ") + e.what());
  }
  return out;
}

std::vector<TaggedSentence> load_supertag_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open supertag file '" + path + "'");
  return read_supertag_file(in);
}

void write_supertag_block(std::ostream& out, const TaggedSentence& sentence) {
  auto precision = out.precision(17);
  for (std::int32_t t = 0; t < sentence.table.length(); ++t) {
    out << sentence.words[static_cast<std::size_t>(t)] << '\t';
    bool first = true;
    for (const auto& tag : sentence.table.tags(t)) {
      if (!first) out << ' ';
      out << tag.category.str() << ':' << tag.logprob;
      first = false;
    }
    out << '\n';
  }
  out << '\n';
  out.precision(precision);
}

}  // namespace gparse
