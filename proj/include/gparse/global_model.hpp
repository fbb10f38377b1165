#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gparse/category.hpp"
#include "gparse/grammar.hpp"
#include "gparse/parameters.hpp"

namespace gparse {

// Numerically stable log(sigmoid(z)) = -softplus(-z); strictly negative for finite z.
double log_sigmoid(double z);

enum class UnitKind : std::uint8_t {
  ForwardStart,  // learned state before the first word
  BackwardEnd,   // learned state after the last word
  UnaryLeft,     // learned left input of unary nodes
  ForwardStep,
  BackwardStep,
  Tree,
  Score,
};

struct LatentState {
  Eigen::VectorXd c;
  Eigen::VectorXd h;
};

// Per-token unit ids of the two chains.
struct SentenceEncoding {
  std::vector<std::int32_t> forward;
  std::vector<std::int32_t> backward;
};

// The left and right inputs of a leaf's tree unit.
struct LeafInputs {
  std::int32_t left;   // forward chain at the token
  std::int32_t right;  // backward chain at the token
};

// Append-only record of every unit evaluated for one sentence. Inputs are
// referenced by unit id and always precede their consumers, so the append
// order is a topological order and backward() walks it in reverse.
class ComputationGraph {
 public:
  // Without `keep_activations` only cell and hidden states are retained,
  // which is enough for decoding but not for backward().
  ComputationGraph(const ParameterStore& params, bool keep_activations);

  // Runs both chains over the words. `dropout`, when given, is a
  // word-dim x n mask multiplied into the embeddings.
  SentenceEncoding encode_sentence(const std::vector<std::string>& words, const Eigen::MatrixXd* dropout = nullptr);
  LeafInputs leaf_state(std::int32_t token, const SentenceEncoding& encoding) const;

  // Shared learned (c, h) used as the left input of every unary node.
  std::int32_t unary_left();

  // One recursive unit for `rule`; returns the id of the new state unit.
  std::int32_t tree_unit(RuleKind rule, const Category& category, std::int32_t left, std::int32_t right);
  // log sigmoid(W . h) of a state unit; returns the id of the score unit.
  std::int32_t score_head(std::int32_t state);

  const Eigen::VectorXd& c(std::int32_t unit) const { return units_[static_cast<std::size_t>(unit)].c; }
  const Eigen::VectorXd& h(std::int32_t unit) const { return units_[static_cast<std::size_t>(unit)].h; }
  double score(std::int32_t unit) const;
  UnitKind kind(std::int32_t unit) const { return units_[static_cast<std::size_t>(unit)].kind; }

  std::size_t size() const { return units_.size(); }
  std::size_t tree_units() const { return tree_units_; }
  const ParameterStore& params() const { return *params_; }

  // Accumulates d(sum_k w_k * score_k)/dtheta into `grads` for seeds
  // (score unit, w_k). Repeated seeds add up. Throws InternalError if a seed
  // does not name a score unit or activations were not kept.
  void backward(const std::vector<std::pair<std::int32_t, double>>& seeds, ParameterStore& grads) const;

 private:
  struct Unit {
    UnitKind kind;
    RuleKind rule = RuleKind::Lex;
    std::int32_t a = -1;  // chain predecessor / left input / scored state
    std::int32_t b = -1;  // right input
    std::int32_t index = -1;  // word or category id
    std::int32_t token = -1;
    Eigen::VectorXd c, h;
    // Retained for backward.
    Eigen::VectorXd i, f, ct, o, clr, tc, x;
    Eigen::VectorXd mask;  // dropout column of a chain step, empty when none
    double z = 0.0;
    double value = 0.0;
  };

  std::int32_t push(Unit unit);
  std::int32_t chain_step(UnitKind kind, std::int32_t prev, int word, std::int32_t token, const Eigen::MatrixXd* dropout);

  const ParameterStore* params_;
  bool keep_;
  std::vector<Unit> units_;
  std::int32_t unary_left_ = -1;
  std::size_t tree_units_ = 0;
};

}  // namespace gparse
