#include "gparse/parameters.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gparse/error.hpp"

namespace gparse {

namespace {

constexpr int kFormatVersion = 1;

void shape_chain(ChainParams& p, int hidden, int input) {
  p.w_i = Eigen::MatrixXd::Zero(hidden, 2 * hidden + input);
  p.w_c = Eigen::MatrixXd::Zero(hidden, hidden + input);
  p.w_o = Eigen::MatrixXd::Zero(hidden, 2 * hidden + input);
  p.b_i = Eigen::VectorXd::Zero(hidden);
  p.b_c = Eigen::VectorXd::Zero(hidden);
  p.b_o = Eigen::VectorXd::Zero(hidden);
}

void shape_tree(TreeParams& p, int hidden, int input) {
  p.w_i = Eigen::MatrixXd::Zero(hidden, 4 * hidden + input);
  p.w_f = Eigen::MatrixXd::Zero(hidden, 4 * hidden + input);
  p.w_c = Eigen::MatrixXd::Zero(hidden, 2 * hidden + input);
  p.w_o = Eigen::MatrixXd::Zero(hidden, 3 * hidden + input);
  p.b_i = Eigen::VectorXd::Zero(hidden);
  p.b_f = Eigen::VectorXd::Zero(hidden);
  p.b_c = Eigen::VectorXd::Zero(hidden);
  p.b_o = Eigen::VectorXd::Zero(hidden);
}

template <class Store, class Out>
void list_tensors(Store& s, Out& out) {
  auto add = [&](std::string name, auto& m) {
    out.push_back(TensorRef{std::move(name), const_cast<double*>(m.data()), m.rows(), m.cols()});
  };
  add("word_embeddings", s.word_embeddings);
  add("category_embeddings", s.category_embeddings);
  for (auto [prefix, chain] : {std::pair{"forward", &s.forward}, std::pair{"backward", &s.backward}}) {
    std::string p(prefix);
    add(p + ".w_i", chain->w_i);
    add(p + ".w_c", chain->w_c);
    add(p + ".w_o", chain->w_o);
    add(p + ".b_i", chain->b_i);
    add(p + ".b_c", chain->b_c);
    add(p + ".b_o", chain->b_o);
  }
  add("c_start", s.c_start);
  add("h_start", s.h_start);
  add("c_end", s.c_end);
  add("h_end", s.h_end);
  for (int k = 0; k < kRuleKinds; ++k) {
    std::string p = "rule." + std::string(rule_name(static_cast<RuleKind>(k)));
    auto& r = s.rules[static_cast<std::size_t>(k)];
    add(p + ".w_i", r.w_i);
    add(p + ".w_f", r.w_f);
    add(p + ".w_c", r.w_c);
    add(p + ".w_o", r.w_o);
    add(p + ".b_i", r.b_i);
    add(p + ".b_f", r.b_f);
    add(p + ".b_c", r.b_c);
    add(p + ".b_o", r.b_o);
  }
  add("c_unary", s.c_unary);
  add("h_unary", s.h_unary);
  add("score", s.score);
}

}  // namespace

Vocabulary::Vocabulary() { add(std::string(kUnknownToken)); }

int Vocabulary::add(const std::string& item) {
  auto [it, inserted] = index_.emplace(item, static_cast<int>(items_.size()));
  if (inserted) items_.push_back(item);
  return it->second;
}

int Vocabulary::lookup(const std::string& item) const {
  auto it = index_.find(item);
  return it == index_.end() ? kUnknown : it->second;
}

ParameterStore ParameterStore::create(const ModelDims& dims, Vocabulary words, Vocabulary categories) {
  if (dims.word <= 0 || dims.category <= 0 || dims.hidden <= 0) throw ConfigError("model dimensions must be positive");
  ParameterStore s;
  s.dims = dims;
  s.words = std::move(words);
  s.categories = std::move(categories);
  const int h = dims.hidden;
  s.word_embeddings = Eigen::MatrixXd::Zero(dims.word, s.words.size());
  s.category_embeddings = Eigen::MatrixXd::Zero(dims.category, s.categories.size());
  shape_chain(s.forward, h, dims.word);
  shape_chain(s.backward, h, dims.word);
  s.c_start = s.h_start = s.c_end = s.h_end = Eigen::VectorXd::Zero(h);
  for (auto& r : s.rules) shape_tree(r, h, dims.category);
  s.c_unary = s.h_unary = Eigen::VectorXd::Zero(h);
  s.score = Eigen::VectorXd::Zero(h);
  return s;
}

ParameterStore ParameterStore::zeros_like() const { return create(dims, words, categories); }

void ParameterStore::initialize(std::uint64_t seed, double embedding_range) {
  std::mt19937_64 rng(seed);
  auto glorot = [&](auto& m) {
    double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  };
  auto uniform = [&](auto& m, double range) {
    std::uniform_real_distribution<double> dist(-range, range);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  };
  set_zero();
  uniform(word_embeddings, embedding_range);
  uniform(category_embeddings, embedding_range);
  for (auto* chain : {&forward, &backward}) {
    glorot(chain->w_i);
    glorot(chain->w_c);
    glorot(chain->w_o);
  }
  for (auto& r : rules) {
    glorot(r.w_i);
    glorot(r.w_f);
    glorot(r.w_c);
    glorot(r.w_o);
  }
  // score is a 1 x hidden map.
  double bound = std::sqrt(6.0 / static_cast<double>(dims.hidden + 1));
  uniform(score, bound);
}

std::vector<TensorRef> ParameterStore::tensors() {
  std::vector<TensorRef> out;
  list_tensors(*this, out);
  return out;
}

std::vector<TensorRef> ParameterStore::tensors() const {
  std::vector<TensorRef> out;
  list_tensors(*this, out);
  return out;
}

void ParameterStore::set_zero() {
  for (auto& t : tensors()) std::fill(t.data, t.data + t.size(), 0.0);
}

void ParameterStore::axpy(double alpha, const ParameterStore& other) {
  auto mine = tensors();
  auto theirs = other.tensors();
  if (mine.size() != theirs.size()) throw InternalError("axpy over mismatched parameter stores");
  for (std::size_t k = 0; k < mine.size(); ++k) {
    if (mine[k].size() != theirs[k].size()) throw InternalError("axpy shape mismatch in " + mine[k].name);
    for (Eigen::Index i = 0; i < mine[k].size(); ++i) mine[k].data[i] += alpha * theirs[k].data[i];
  }
}

bool ParameterStore::all_finite() const {
  for (const auto& t : tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (!std::isfinite(t.data[i])) return false;
    }
  }
  return true;
}

double ParameterStore::squared_norm() const {
  double sum = 0.0;
  for (const auto& t : tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) sum += t.data[i] * t.data[i];
  }
  return sum;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.size());
  return n;
}

std::string ParameterStore::to_json() const {
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["dims"] = {{"word", dims.word}, {"category", dims.category}, {"hidden", dims.hidden}};
  j["vocabulary"] = {{"words", words.items()}, {"categories", categories.items()}};
  nlohmann::ordered_json tensors_json = nlohmann::ordered_json::object();
  for (const auto& t : tensors()) {
    nlohmann::ordered_json value = nlohmann::ordered_json::array();
    if (t.cols == 1) {
      for (Eigen::Index r = 0; r < t.rows; ++r) value.push_back(t.data[r]);
    } else {
      for (Eigen::Index r = 0; r < t.rows; ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < t.cols; ++c) row.push_back(t.data[c * t.rows + r]);  // column-major storage
        value.push_back(std::move(row));
      }
    }
    tensors_json[t.name] = std::move(value);
  }
  j["tensors"] = std::move(tensors_json);
  return j.dump();
}

ParameterStore ParameterStore::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ConfigError("unsupported model format version " + j.at("format_version").dump());
    }
    ModelDims dims{j.at("dims").at("word").get<int>(), j.at("dims").at("category").get<int>(),
                   j.at("dims").at("hidden").get<int>()};
    Vocabulary words, categories;
    auto read_vocab = [](const nlohmann::json& items, Vocabulary& v, const char* what) {
      if (items.empty() || items[0].get<std::string>() != Vocabulary::kUnknownToken) {
        throw ConfigError(std::string("model ") + what + " vocabulary must start with <unk>");
      }
      for (std::size_t i = 1; i < items.size(); ++i) v.add(items[i].get<std::string>());
    };
    read_vocab(j.at("vocabulary").at("words"), words, "word");
    read_vocab(j.at("vocabulary").at("categories"), categories, "category");
    ParameterStore s = create(dims, std::move(words), std::move(categories));
    const auto& tj = j.at("tensors");
    for (auto& t : s.tensors()) {
      if (!tj.contains(t.name)) throw ConfigError("model file is missing tensor '" + t.name + "'");
      const auto& value = tj.at(t.name);
      if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != t.rows) {
        throw ConfigError("tensor '" + t.name + "' does not match the dimension header");
      }
      for (Eigen::Index r = 0; r < t.rows; ++r) {
        const auto& row = value[static_cast<std::size_t>(r)];
        if (t.cols == 1 && !row.is_array()) {
          t.data[r] = row.get<double>();
          continue;
        }
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != t.cols) {
          throw ConfigError("tensor '" + t.name + "' does not match the dimension header");
        }
        for (Eigen::Index c = 0; c < t.cols; ++c) t.data[c * t.rows + r] = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    if (!s.all_finite()) throw ConfigError("model file contains non-finite values");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

void ParameterStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file '" + path + "'");
  out << to_json() << '\n';
}

ParameterStore ParameterStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

bool bitwise_equal(const ParameterStore& a, const ParameterStore& b) {
  if (!(a.dims == b.dims) || a.words.items() != b.words.items() || a.categories.items() != b.categories.items()) {
    return false;
  }
  auto ta = a.tensors();
  auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t k = 0; k < ta.size(); ++k) {
    if (ta[k].name != tb[k].name || ta[k].size() != tb[k].size()) return false;
    if (std::memcmp(ta[k].data, tb[k].data, sizeof(double) * static_cast<std::size_t>(ta[k].size())) != 0) return false;
  }
  return true;
}

}  // namespace gparse
