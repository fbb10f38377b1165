#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "gparse/grammar.hpp"

namespace gparse {

struct ModelDims {
  int word = 50;
  int category = 16;
  int hidden = 64;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Index 0 is reserved for the unknown item.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocabulary();
  int add(const std::string& item);
  int lookup(const std::string& item) const;
  int size() const { return static_cast<int>(items_.size()); }
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, int> index_;
};

// Chain LSTM with coupled input/forget gates and an output gate that reads
// the candidate cell.
struct ChainParams {
  Eigen::MatrixXd w_i, w_c, w_o;  // [c,h,x], [h,x], [c~,h,x]
  Eigen::VectorXd b_i, b_c, b_o;
};

// Tree unit for one rule kind.
struct TreeParams {
  Eigen::MatrixXd w_i, w_f, w_c, w_o;  // [cl,hl,cr,hr,x] x2, [hl,hr,x], [c~,hl,hr,x]
  Eigen::VectorXd b_i, b_f, b_c, b_o;
};

struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const { return rows * cols; }
};

// All trainable tensors of the global model. The same type doubles as a
// gradient accumulator and as optimizer moment storage.
struct ParameterStore {
  ModelDims dims;
  Vocabulary words;
  Vocabulary categories;

  Eigen::MatrixXd word_embeddings;      // word x |words|
  Eigen::MatrixXd category_embeddings;  // category x |categories|
  ChainParams forward;
  ChainParams backward;
  Eigen::VectorXd c_start, h_start;  // predecessors of the first word (forward chain)
  Eigen::VectorXd c_end, h_end;      // successors of the last word (backward chain)
  std::array<TreeParams, kRuleKinds> rules;
  Eigen::VectorXd c_unary, h_unary;  // left input of unary nodes
  Eigen::VectorXd score;             // W in log sigmoid(W . h)

  // Zero tensors of the right shapes.
  static ParameterStore create(const ModelDims& dims, Vocabulary words, Vocabulary categories);
  ParameterStore zeros_like() const;

  // Glorot-uniform weights, zero biases and boundary states, uniform
  // embeddings in [-embedding_range, embedding_range].
  void initialize(std::uint64_t seed, double embedding_range = 0.1);

  std::vector<TensorRef> tensors();
  std::vector<TensorRef> tensors() const;  // data pointers must not be written through

  void set_zero();
  void axpy(double alpha, const ParameterStore& other);
  bool all_finite() const;
  double squared_norm() const;
  std::size_t parameter_count() const;

  // Structured JSON with a format version, a dimension header and named
  // tensors as nested arrays. Loading validates every shape.
  std::string to_json() const;
  static ParameterStore from_json(std::string_view text);
  void save(const std::string& path) const;
  static ParameterStore load(const std::string& path);
};

bool bitwise_equal(const ParameterStore& a, const ParameterStore& b);

}  // namespace gparse
