#pragma once

#include <optional>
#include <vector>

#include "gparse/decoder.hpp"
#include "gparse/parameters.hpp"

namespace gparse {

// Straight-line re-implementation of the global model: plain loops over
// scalars, no shared code with ComputationGraph.
namespace reference {

struct State {
  std::vector<double> c;
  std::vector<double> h;
};

// log sigmoid evaluated in extended precision.
long double log_sigmoid(long double z);

State chain_step(const ChainParams& p, const State& prev, const std::vector<double>& x);
// Per-token states of the forward and backward chains.
void encode(const ParameterStore& params, const std::vector<std::string>& words, std::vector<State>& forward,
            std::vector<State>& backward, const Eigen::MatrixXd* dropout = nullptr);
State tree_unit(const ParameterStore& params, RuleKind rule, const Category& category, const State& left,
                const State& right);
double score(const ParameterStore& params, const State& state);

}  // namespace reference

inline constexpr std::int32_t kEnumerationCap = 7;

// Every complete derivation of the sentence, each scored from scratch as the
// sum of local and global scores over its nodes. Throws ConfigError past
// `cap` tokens.
std::vector<ScoredTree> enumerate_parses(const SearchProblem& problem, std::int32_t cap = kEnumerationCap);

// Best complete parse under the local model alone, by CKY with back-pointers.
std::optional<ScoredTree> cky_viterbi(const SearchProblem& problem);

}  // namespace gparse
