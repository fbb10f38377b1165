#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gparse/decoder.hpp"
#include "gparse/search.hpp"

namespace gparse {

enum class UpdateKind { Greedy, MaxViolation, AllViolations };
std::string_view update_name(UpdateKind kind);
UpdateKind parse_update_kind(std::string_view text);

// The gold tree plus an index of its subtrees by fingerprint. Every subtree
// heads exactly one edge of the gold path, so membership of a head in the
// path is membership of its subtree here.
class GoldDerivation {
 public:
  explicit GoldDerivation(Tree tree);

  const Tree& tree() const { return tree_; }
  bool contains(const NodeArena& arena, NodeId id) const;

 private:
  Tree tree_;
  std::unordered_multimap<std::uint64_t, std::int32_t> by_hash_;
};

struct ViolationPoint {
  double v = 0.0;
  AgendaEntry top;   // e_max
  AgendaEntry gold;  // best gold entry
};

// v = best agenda priority - best gold agenda priority. Throws InternalError
// when no gold entry is on the agenda.
ViolationPoint violation(const Agenda& agenda);

struct ViolationEntry {
  double v = 0.0;
  NodeId top_head = kNoNode;
  NodeId gold_head = kNoNode;
  double top_priority = 0.0;
  double gold_priority = 0.0;
};

struct ViolationRecord {
  std::vector<ViolationEntry> entries;
  std::size_t pops = 0;
  bool limit_hit = false;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

struct CollectOptions {
  DecodeLimits limits{2000, 2000000, 200000};
  const Eigen::MatrixXd* dropout = nullptr;
};

// The finished constrained search; owns the arena and the computation graph
// the violation record points into.
struct CollectResult {
  std::unique_ptr<ForestSearch> search;
  ViolationRecord record;
};

// Runs the search with eager scoring while any gold edge is on the agenda and
// the limits hold, recording every positive violation before each pop.
CollectResult collect_violations(const SearchProblem& problem, const GoldDerivation& gold,
                                 const CollectOptions& options = {});

double loss(const ViolationRecord& record, UpdateKind kind);

// Entries of the record that the loss of `kind` depends on, with weights.
std::vector<std::pair<std::size_t, double>> loss_terms(const ViolationRecord& record, UpdateKind kind);

// Accumulates dv/dtheta of one entry, scaled by `weight`, into `grads`.
void violation_subgradient(const ForestSearch& search, const ViolationEntry& entry, double weight,
                           ParameterStore& grads);
// Gradient of loss(record, kind). Seeds of nodes shared by both paths cancel
// before the backward pass.
void loss_gradient(const ForestSearch& search, const ViolationRecord& record, UpdateKind kind, ParameterStore& grads);

// The loss of `record` with every agenda decision frozen (which entries were
// e_max and the best gold item) and both paths rescored under `params`.
double frozen_loss(const SearchProblem& problem, const ForestSearch& search, const ViolationRecord& record,
                   UpdateKind kind, const ParameterStore& params);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const ParameterStore& shape, AdamConfig config);
  // theta -= lr * m_hat / (sqrt(v_hat) + eps)
  void step(ParameterStore& params, const ParameterStore& grads);
  std::uint64_t steps() const { return t_; }

 private:
  AdamConfig config_;
  ParameterStore m_;
  ParameterStore v_;
  std::uint64_t t_ = 0;
};

struct TrainExample {
  std::vector<std::string> words;
  SupertagTable table;
  Tree gold;
};

struct TrainConfig {
  UpdateKind update = UpdateKind::AllViolations;
  int epochs = 30;
  AdamConfig adam;
  DecodeLimits limits{2000, 2000000, 200000};
  DecodeLimits dev_limits;
  int dev_jobs = 1;  // threads for dev decodes
  double dropout = 0.4;
  std::uint64_t seed = 1;
  bool shuffle = true;
  // Keep the parameters of the best dev epoch; otherwise keep the last.
  bool early_stopping = true;
};

struct EpochMetrics {
  int epoch = 0;
  double mean_loss = 0.0;
  double mean_violations = 0.0;
  double dev_f1 = 0.0;
  double dev_exact = 0.0;
  std::size_t updates = 0;
  std::size_t skipped = 0;
  bool aborted = false;
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  int best_epoch = 0;  // 0: the initial parameters were kept
  double best_dev_f1 = 0.0;
};

// Why a gold tree cannot be found by the search, or nullopt when it can.
std::optional<std::string> gold_unreachable(const Grammar& grammar, const RootSet& roots, const SupertagTable& table,
                                            const Tree& gold);

TrainResult train(const std::vector<TrainExample>& corpus, const std::vector<TrainExample>& dev,
                  const Grammar& grammar, const RootSet& roots, ParameterStore& params, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

// Labeled-span F1 and exact match of A* decodes.
struct DevScore {
  double f1 = 0.0;
  double exact = 0.0;
};
DevScore evaluate_decoder(const std::vector<TrainExample>& data, const Grammar& grammar, const RootSet& roots,
                          const ParameterStore* params, const DecodeLimits& limits, int jobs = 1);

}  // namespace gparse
