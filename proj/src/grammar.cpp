#include "gparse/grammar.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gparse/error.hpp"

namespace gparse {

int rule_arity(RuleKind rule) {
  switch (rule) {
    case RuleKind::Lex: return 0;
    case RuleKind::Unary: return 1;
    default: return 2;
  }
}

std::string_view rule_name(RuleKind rule) {
  switch (rule) {
    case RuleKind::Lex: return "LEX";
    case RuleKind::Unary: return "UNARY";
    case RuleKind::ForwardApply: return "FA";
    case RuleKind::BackwardApply: return "BA";
    case RuleKind::ForwardCompose: return "FC";
    case RuleKind::BackwardCompose: return "BC";
  }
  return "?";
}

RuleKind parse_rule_name(std::string_view name) {
  for (int k = 0; k < kRuleKinds; ++k) {
    auto rule = static_cast<RuleKind>(k);
    if (rule_name(rule) == name) return rule;
  }
  throw DataError("unknown rule name '" + std::string(name) + "'");
}

void UnaryTable::add(const Category& from, const Category& to) {
  auto& targets = rules_[from];
  for (const auto& t : targets) {
    if (t == to) return;
  }
  targets.push_back(to);
  order_.emplace_back(from, to);
  ++count_;
}

void UnaryTable::write(std::ostream& out) const {
  for (const auto& [from, to] : order_) out << from.str() << '\t' << to.str() << '\n';
}

const std::vector<Category>& UnaryTable::lookup(const Category& from) const {
  static const std::vector<Category> kEmpty;
  auto it = rules_.find(from);
  return it == rules_.end() ? kEmpty : it->second;
}

UnaryTable UnaryTable::read(std::istream& in) {
  UnaryTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("unary rules line " + std::to_string(line_no) + ": expected from<TAB>to");
    }
    try {
      table.add(parse_category(line.substr(0, tab)), parse_category(line.substr(tab + 1)));
    } catch (const ParseError& e) {
      throw DataError("unary rules line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

UnaryTable UnaryTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open unary rule table '" + path + "'");
  return read(in);
}

UnaryTable UnaryTable::defaults() {
  UnaryTable table;
  table.add(Category::atomic("N"), Category::atomic("NP"));
  return table;
}

std::vector<Production> Grammar::combine(const Category& left, const Category& right) const {
  std::vector<Production> out;
  // X/Y Y -> X
  if (!left.is_atomic() && left.slash() == Slash::Forward && left.argument() == right) {
    out.push_back({left.result(), RuleKind::ForwardApply});
  }
  // Y X\Y -> X
  if (!right.is_atomic() && right.slash() == Slash::Backward && right.argument() == left) {
    out.push_back({right.result(), RuleKind::BackwardApply});
  }
  if (config_.composition) {
    // X/Y Y/Z -> X/Z
    if (!left.is_atomic() && !right.is_atomic() && left.slash() == Slash::Forward &&
        right.slash() == Slash::Forward && left.argument() == right.result()) {
      out.push_back({Category::functor(left.result(), Slash::Forward, right.argument()),
                     RuleKind::ForwardCompose});
    }
    // Y\Z X\Y -> X\Z
    if (!left.is_atomic() && !right.is_atomic() && left.slash() == Slash::Backward &&
        right.slash() == Slash::Backward && right.argument() == left.result()) {
      out.push_back({Category::functor(right.result(), Slash::Backward, left.argument()),
                     RuleKind::BackwardCompose});
    }
  }
  return out;
}

std::vector<Production> Grammar::unary_rules(const Category& c) const {
  std::vector<Production> out;
  for (const auto& to : unary_.lookup(c)) out.push_back({to, RuleKind::Unary});
  return out;
}

RootSet RootSet::defaults() { return RootSet({Category::atomic("S"), Category::atomic("NP")}); }

RootSet RootSet::parse(std::string_view text) {
  std::vector<Category> roots;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = text.substr(start, comma - start);
    if (!item.empty()) roots.push_back(parse_category(item));
    start = comma + 1;
  }
  if (roots.empty()) throw ConfigError("empty root category set");
  return RootSet(std::move(roots));
}

bool RootSet::accepts(const Category& c) const {
  for (const auto& root : roots_) {
    if (root == c) return true;
    if (root.is_atomic() && root.feature().empty() && c.is_atomic() && c.name() == root.name()) {
      return true;
    }
  }
  return false;
}

}  // namespace gparse
