#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace gparse {

enum class Slash { Forward, Backward };

// A CCG category: either atomic (`NP`, `S[dcl]`) or a functor `X/Y`, `X\Y`.
// Immutable and cheap to copy; equality is structural and is decided on the
// canonical string, which is computed once at construction.
class Category {
 public:
  Category() = default;

  static Category atomic(std::string name, std::string feature = {});
  static Category functor(Category result, Slash slash, Category argument);

  bool valid() const { return node_ != nullptr; }
  bool is_atomic() const;
  const std::string& name() const;
  const std::string& feature() const;
  Slash slash() const;
  const Category& result() const;
  const Category& argument() const;
  int depth() const;

  // Canonical form: functor children are parenthesised when complex.
  const std::string& str() const;
  std::size_t hash() const;

  friend bool operator==(const Category& a, const Category& b) {
    return a.node_ == b.node_ || (a.node_ && b.node_ && a.str() == b.str());
  }
  friend bool operator!=(const Category& a, const Category& b) { return !(a == b); }
  friend bool operator<(const Category& a, const Category& b) { return a.str() < b.str(); }

 private:
  struct Node;
  explicit Category(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Parses `(S\NP)/NP`, `S[dcl]\NP`, ... Unparenthesised chains associate to
// the left, so `S\NP/NP` is `(S\NP)/NP`. Throws ParseError with the offending
// character offset.
Category parse_category(std::string_view text);

struct CategoryHash {
  std::size_t operator()(const Category& c) const { return c.hash(); }
};

}  // namespace gparse
