#include "gparse/category.hpp"

#include <algorithm>
#include <cctype>

#include "gparse/error.hpp"

namespace gparse {

struct Category::Node {
  std::string name;
  std::string feature;
  Slash slash = Slash::Forward;
  Category result;
  Category argument;
  int depth = 0;
  std::string text;
  std::size_t hash = 0;
};

namespace {

void append_child(std::string& out, const Category& c) {
  if (c.is_atomic()) {
    out += c.str();
  } else {
    out += '(';
    out += c.str();
    out += ')';
  }
}

}  // namespace

Category Category::atomic(std::string name, std::string feature) {
  auto node = std::make_shared<Node>();
  node->text = name;
  if (!feature.empty()) node->text += "[" + feature + "]";
  node->name = std::move(name);
  node->feature = std::move(feature);
  node->depth = 0;
  node->hash = std::hash<std::string>{}(node->text);
  return Category(std::move(node));
}

Category Category::functor(Category result, Slash slash, Category argument) {
  auto node = std::make_shared<Node>();
  append_child(node->text, result);
  node->text += slash == Slash::Forward ? '/' : '\\';
  append_child(node->text, argument);
  node->slash = slash;
  node->depth = 1 + std::max(result.depth(), argument.depth());
  node->result = std::move(result);
  node->argument = std::move(argument);
  node->hash = std::hash<std::string>{}(node->text);
  return Category(std::move(node));
}

bool Category::is_atomic() const { return node_->depth == 0; }
const std::string& Category::name() const { return node_->name; }
const std::string& Category::feature() const { return node_->feature; }
Slash Category::slash() const { return node_->slash; }
const Category& Category::result() const { return node_->result; }
const Category& Category::argument() const { return node_->argument; }
int Category::depth() const { return node_->depth; }
const std::string& Category::str() const { return node_->text; }
std::size_t Category::hash() const { return node_->hash; }

namespace {

class CategoryReader {
 public:
  explicit CategoryReader(std::string_view text) : text_(text) {}

  Category read_all() {
    if (text_.empty()) throw ParseError("empty category", 0);
    Category c = read_chain();
    if (pos_ != text_.size()) fail("unexpected character");
    return c;
  }

 private:
  Category read_chain() {
    Category left = read_primary();
    while (pos_ < text_.size() && (text_[pos_] == '/' || text_[pos_] == '\\')) {
      Slash slash = text_[pos_] == '/' ? Slash::Forward : Slash::Backward;
      ++pos_;
      Category right = read_primary();
      left = Category::functor(std::move(left), slash, std::move(right));
    }
    return left;
  }

  Category read_primary() {
    if (pos_ >= text_.size()) fail("unexpected end of category");
    if (text_[pos_] == '(') {
      ++pos_;
      Category inner = read_chain();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail("expected category name");
    std::string name(text_.substr(start, pos_ - start));
    std::string feature;
    if (pos_ < text_.size() && text_[pos_] == '[') {
      ++pos_;
      std::size_t fstart = pos_;
      while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
      if (pos_ == fstart) fail("expected feature name");
      feature = std::string(text_.substr(fstart, pos_ - fstart));
      if (pos_ >= text_.size() || text_[pos_] != ']') fail("expected ']'");
      ++pos_;
    }
    return Category::atomic(std::move(name), std::move(feature));
  }

  static bool is_name_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' || ch == '-';
  }

  [[noreturn]] void fail(const char* what) const {
    throw ParseError(std::string("category '") + std::string(text_) + "': " + what, pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Category parse_category(std::string_view text) { return CategoryReader(text).read_all(); }

}  // namespace gparse
