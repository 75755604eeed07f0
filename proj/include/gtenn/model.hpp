#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gtenn/spatial.hpp"
#include "gtenn/temporal.hpp"

namespace gtenn {

/// Which encoder stages take part in a run.
///   Full:    evolving-weight convolutions followed by the temporal GRU.
///   GcnGru:  static-weight convolutions followed by the temporal GRU.
///   GcnOnly: static-weight convolutions; embeddings are the last layer output.
///   GruOnly: temporal GRU over the learnable node features alone.
enum class AblationMode { Full, GcnOnly, GruOnly, GcnGru };

AblationMode parse_ablation(std::string_view name);
std::string_view to_string(AblationMode mode);

struct ModelConfig {
  std::vector<std::size_t> dims{32, 32, 32};
  AblationMode mode = AblationMode::Full;
  /// Gates of the weight GRU also see a summary of the layer input.
  bool weight_feature_term = true;
  double leaky_slope = kLeakySlope;

  void validate() const;
};

/// All learnable state of the encoder: convolution stack, one weight GRU per
/// layer, and the temporal GRU.
class GtennModel {
 public:
  GtennModel(std::size_t nodes, ModelConfig config, std::uint64_t seed);

  /// Embeddings h_1..h_T for the given normalized adjacencies.
  std::vector<Var> forward(Tape& tape, const std::vector<Matrix>& normalized_adjacency);

  /// Parameters the configured mode actually uses.
  ParameterRefs parameters();

  const ModelConfig& config() const { return config_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t embedding_dim() const;

  GcnStack& stack() { return stack_; }
  std::vector<WeightGru>& weight_grus() { return weight_grus_; }
  TemporalGru& temporal() { return temporal_; }

 private:
  std::size_t nodes_;
  ModelConfig config_;
  GcnStack stack_;
  std::vector<WeightGru> weight_grus_;
  TemporalGru temporal_;
};

}  // namespace gtenn
