#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gparse/category.hpp"

namespace gparse {

enum class RuleKind : std::uint8_t {
  Lex,
  Unary,
  ForwardApply,
  BackwardApply,
  ForwardCompose,
  BackwardCompose,
};

inline constexpr int kRuleKinds = 6;

int rule_arity(RuleKind rule);
std::string_view rule_name(RuleKind rule);
RuleKind parse_rule_name(std::string_view name);

struct Production {
  Category category;
  RuleKind rule;

  friend bool operator==(const Production&, const Production&) = default;
};

struct GrammarConfig {
  // Forward (X/Y Y/Z -> X/Z) and backward (Y\Z X\Y -> X\Z) harmonic composition.
  bool composition = false;
};

// from -> to rules. Unary results are never fed back into the table.
class UnaryTable {
 public:
  void add(const Category& from, const Category& to);
  const std::vector<Category>& lookup(const Category& from) const;
  std::size_t size() const { return count_; }

  // `from<TAB>to` per line; `#` comments and blank lines are skipped.
  static UnaryTable read(std::istream& in);
  static UnaryTable load(const std::string& path);
  // Rules in insertion order.
  void write(std::ostream& out) const;

  // The table used when no file is given: N -> NP.
  static UnaryTable defaults();

 private:
  std::unordered_map<Category, std::vector<Category>, CategoryHash> rules_;
  std::vector<std::pair<Category, Category>> order_;
  std::size_t count_ = 0;
};

class Grammar {
 public:
  Grammar() = default;
  Grammar(GrammarConfig config, UnaryTable unary) : config_(config), unary_(std::move(unary)) {}

  // Canonical order: application before composition, forward before backward.
  std::vector<Production> combine(const Category& left, const Category& right) const;
  std::vector<Production> unary_rules(const Category& c) const;

  const GrammarConfig& config() const { return config_; }
  const UnaryTable& unary_table() const { return unary_; }

 private:
  GrammarConfig config_;
  UnaryTable unary_;
};

// Categories accepted at the root of a complete parse. A bare atomic entry
// such as `S` accepts every featured variant (`S[dcl]`, ...); anything else
// must match exactly.
class RootSet {
 public:
  RootSet() = default;
  explicit RootSet(std::vector<Category> roots) : roots_(std::move(roots)) {}

  static RootSet defaults();
  // Comma separated list, e.g. "S,NP".
  static RootSet parse(std::string_view text);

  bool accepts(const Category& c) const;
  const std::vector<Category>& roots() const { return roots_; }

 private:
  std::vector<Category> roots_;
};

}  // namespace gparse
