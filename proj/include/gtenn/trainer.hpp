#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "gtenn/graph.hpp"
#include "gtenn/model.hpp"
#include "gtenn/optim.hpp"

namespace gtenn {

struct TrainConfig {
  double margin = 1.0;
  std::size_t negatives = 5;
  std::size_t epochs = 300;
  /// Adam at 1e-2: with one full-batch step per epoch, 300 steps at 1e-3
  /// leave the weight-evolution GRU largely untrained.
  OptimizerConfig optimizer{OptimizerKind::Adam, 1e-2};
  /// Positive pairs per optimizer step and snapshot; 0 means full batch.
  std::size_t batch_size = 0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Positive pairs of one snapshot with `per_positive` negatives each, stored
/// flat: negatives[i * per_positive + q].
struct PairBatch {
  std::vector<std::pair<NodeId, NodeId>> positives;
  std::vector<NodeId> negatives;
  std::size_t per_positive = 0;
};

/// Both orientations of every edge of snapshot t.
std::vector<std::pair<NodeId, NodeId>> positive_pairs(const DynamicNetwork& network, std::size_t t);

/// p(v) ∝ degree^{3/4}. Throws if every degree is zero.
std::vector<double> negative_distribution(const std::vector<double>& degrees);

/// Draws negatives from a fixed distribution, rejecting the anchor itself and
/// its neighbors.
class NegativeSampler {
 public:
  static constexpr int kMaxTries = 1000;

  NegativeSampler(std::vector<double> distribution, std::vector<std::vector<NodeId>> neighbors);

  /// Q negatives for an anchor, or nullopt when the anchor is adjacent to
  /// every other node. After kMaxTries rejections for one draw, falls back to
  /// a uniform pick among valid nodes.
  std::optional<std::vector<NodeId>> sample(NodeId anchor, std::size_t q, Rng& rng) const;

  /// Single draw from the distribution without rejection.
  NodeId draw(Rng& rng) const;

 private:
  bool valid(NodeId anchor, NodeId candidate) const;

  std::vector<double> cdf_;
  std::vector<std::vector<NodeId>> neighbors_;
};

/// Mean over positives of Σ_q max(0, m + |h_x - h_y|² - |h_x - h_q|²), as a
/// 1x1 tape node. An empty batch yields a constant 0.
Var ranking_loss(Var embeddings, const PairBatch& batch, double margin);

struct EpochLog {
  std::size_t epoch = 0;
  double total_loss = 0.0;
  std::vector<double> snapshot_loss;
};

struct TrainResult {
  std::vector<Matrix> embeddings;  // h_1..h_T after the last update
  std::vector<EpochLog> log;
  std::size_t skipped_pairs = 0;   // positives with no valid negative, summed over epochs
};

/// Full-sequence training: every step runs the encoder over all snapshots,
/// sums the per-snapshot ranking losses, backpropagates once and updates.
/// Throws NumericError on a non-finite loss.
TrainResult train(const DynamicNetwork& network, GtennModel& model, const TrainConfig& config);

/// Normalized adjacency of every snapshot, in order.
std::vector<Matrix> normalized_adjacencies(const DynamicNetwork& network);

/// Forward pass without training.
std::vector<Matrix> embed(const DynamicNetwork& network, GtennModel& model);

/// CSV with header epoch,total_loss,loss_t1..loss_tT.
void write_training_log(std::ostream& out, const std::vector<EpochLog>& log);

}  // namespace gtenn
