#include "gparse/tree.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "gparse/error.hpp"

namespace gparse {

std::int32_t Tree::add_leaf(std::int32_t token, Category category) {
  nodes_.push_back({Span{token, token + 1}, std::move(category), RuleKind::Lex, -1, -1});
  return root();
}

std::int32_t Tree::add_unary(Category category, std::int32_t child) {
  Span span = node(child).span;
  nodes_.push_back({span, std::move(category), RuleKind::Unary, child, -1});
  return root();
}

std::int32_t Tree::add_binary(Category category, RuleKind rule, std::int32_t left, std::int32_t right) {
  if (rule_arity(rule) != 2) throw InternalError("add_binary with a non-binary rule");
  if (node(left).span.end != node(right).span.start) {
    throw DataError("binary children are not adjacent");
  }
  Span span{node(left).span.start, node(right).span.end};
  nodes_.push_back({span, std::move(category), rule, left, right});
  return root();
}

std::size_t Tree::subtree_size(std::int32_t i) const {
  const auto& n = node(i);
  std::size_t size = 1;
  if (n.left >= 0) size += subtree_size(n.left);
  if (n.right >= 0) size += subtree_size(n.right);
  return size;
}

std::string Tree::to_bracketed() const { return empty() ? std::string() : to_bracketed(root()); }

std::string Tree::to_bracketed(std::int32_t i) const {
  const auto& n = node(i);
  std::string out = "(" + n.category.str() + " " + std::string(rule_name(n.rule));
  if (n.rule == RuleKind::Lex) {
    out += " " + std::to_string(n.span.start);
  } else {
    out += " " + to_bracketed(n.left);
    if (n.right >= 0) out += " " + to_bracketed(n.right);
  }
  out += ")";
  return out;
}

namespace {

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  Tree read() {
    Tree tree;
    skip_space();
    read_node(tree);
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after tree");
    return tree;
  }

 private:
  std::int32_t read_node(Tree& tree) {
    expect('(');
    std::string_view cat_text = read_token();
    Category category;
    try {
      category = parse_category(cat_text);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), pos_ - cat_text.size() + e.offset());
    }
    skip_space();
    std::string_view rule_text = read_token();
    RuleKind rule;
    try {
      rule = parse_rule_name(rule_text);
    } catch (const DataError&) {
      fail("unknown rule '" + std::string(rule_text) + "'");
    }
    skip_space();
    std::int32_t id = -1;
    if (rule == RuleKind::Lex) {
      std::string_view digits = read_token();
      std::int32_t token = -1;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), token);
      if (ec != std::errc() || ptr != digits.data() + digits.size() || token < 0) {
        fail("expected a token index");
      }
      id = tree.add_leaf(token, std::move(category));
    } else if (rule == RuleKind::Unary) {
      std::int32_t child = read_node(tree);
      id = tree.add_unary(std::move(category), child);
    } else {
      std::int32_t left = read_node(tree);
      skip_space();
      std::int32_t right = read_node(tree);
      if (tree.node(left).span.end != tree.node(right).span.start) fail("binary children are not adjacent");
      id = tree.add_binary(std::move(category), rule, left, right);
    }
    skip_space();
    expect(')');
    skip_space();
    return id;
  }

  std::string_view read_token() {
    std::size_t start = pos_;
    // A category may itself start with '(' and contain balanced parentheses.
    int depth = 0;
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(ch))) break;
      if (ch == '(') ++depth;
      if (ch == ')') {
        if (depth == 0) break;
        --depth;
      }
      ++pos_;
    }
    if (pos_ == start) fail("expected a token");
    return text_.substr(start, pos_ - start);
  }

  void expect(char ch) {
    if (pos_ >= text_.size() || text_[pos_] != ch) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError("bracketed tree: " + what, pos_); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Tree Tree::parse_bracketed(std::string_view text) { return BracketReader(text).read(); }

std::vector<Category> Tree::supertags() const {
  std::vector<std::pair<std::int32_t, Category>> leaves;
  for (const auto& n : nodes_) {
    if (n.rule == RuleKind::Lex) leaves.emplace_back(n.span.start, n.category);
  }
  std::sort(leaves.begin(), leaves.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Category> out;
  for (auto& [_, c] : leaves) out.push_back(std::move(c));
  return out;
}

std::vector<LabeledSpan> Tree::labeled_spans() const {
  std::vector<LabeledSpan> out;
  for (const auto& n : nodes_) out.push_back({n.span, n.category.str()});
  std::sort(out.begin(), out.end());
  return out;
}

bool subtrees_equal(const Tree& a, std::int32_t ia, const Tree& b, std::int32_t ib) {
  const auto& x = a.node(ia);
  const auto& y = b.node(ib);
  if (x.rule != y.rule || x.span != y.span || x.category != y.category) return false;
  if ((x.left < 0) != (y.left < 0) || (x.right < 0) != (y.right < 0)) return false;
  if (x.left >= 0 && !subtrees_equal(a, x.left, b, y.left)) return false;
  if (x.right >= 0 && !subtrees_equal(a, x.right, b, y.right)) return false;
  return true;
}

bool operator==(const Tree& a, const Tree& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  return subtrees_equal(a, a.root(), b, b.root());
}

}  // namespace gparse
