#include "gtenn/model.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace gtenn {

AblationMode parse_ablation(std::string_view name) {
  if (name == "full") return AblationMode::Full;
  if (name == "gcn_only") return AblationMode::GcnOnly;
  if (name == "gru_only") return AblationMode::GruOnly;
  if (name == "gcn_gru") return AblationMode::GcnGru;
  throw std::invalid_argument(
      fmt::format("unknown ablation '{}' (expected full, gcn_only, gru_only, gcn_gru)", name));
}

std::string_view to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::Full: return "full";
    case AblationMode::GcnOnly: return "gcn_only";
    case AblationMode::GruOnly: return "gru_only";
    case AblationMode::GcnGru: return "gcn_gru";
  }
  return "full";
}

void ModelConfig::validate() const {
  if (dims.size() < 2) throw std::invalid_argument("model: need at least one layer (two dims)");
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("model: layer widths must be positive");
  }
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) {
    throw std::invalid_argument("model: leaky slope must lie in (0, 1)");
  }
}

GtennModel::GtennModel(std::size_t nodes, ModelConfig config, std::uint64_t seed)
    : nodes_(nodes), config_(std::move(config)) {
  config_.validate();
  if (nodes == 0) throw std::invalid_argument("model: network has no nodes");
  Rng rng(derive_seed(seed, 0x6d6f64656c));
  stack_ = GcnStack(nodes, config_.dims, rng);
  for (std::size_t l = 1; l < config_.dims.size(); ++l) {
    weight_grus_.emplace_back(config_.dims[l - 1], config_.dims[l], l, rng);
  }
  const std::size_t input =
      config_.mode == AblationMode::GruOnly ? config_.dims.front() : config_.dims.back();
  temporal_ = TemporalGru(input, config_.dims.back(), rng);
}

std::size_t GtennModel::embedding_dim() const { return config_.dims.back(); }

std::vector<Var> GtennModel::forward(Tape& tape, const std::vector<Matrix>& normalized_adjacency) {
  std::vector<Var> spatial;
  if (config_.mode == AblationMode::GruOnly) {
    spatial.assign(normalized_adjacency.size(), tape.parameter(stack_.features));
    return temporal_forward(tape, spatial, temporal_);
  }

  SpatialOptions options;
  options.evolve = config_.mode == AblationMode::Full;
  options.feature_term = config_.weight_feature_term;
  options.slope = config_.leaky_slope;

  std::vector<Var> previous;
  if (options.evolve) {
    for (Parameter& w : stack_.weights) previous.push_back(tape.parameter(w));
  }
  for (const Matrix& a_hat : normalized_adjacency) {
    if (a_hat.rows() != nodes_) {
      throw ShapeError(fmt::format("model: adjacency {} does not match {} nodes",
                                   a_hat.shape_string(), nodes_));
    }
    SpatialResult r = spatial_forward(tape, tape.constant(a_hat), stack_, weight_grus_, previous,
                                      options);
    if (options.evolve) previous = r.weights;
    spatial.push_back(r.features);
  }
  if (config_.mode == AblationMode::GcnOnly) return spatial;
  return temporal_forward(tape, spatial, temporal_);
}

ParameterRefs GtennModel::parameters() {
  ParameterRefs refs{&stack_.features};
  const auto mode = config_.mode;
  if (mode != AblationMode::GruOnly) {
    for (Parameter& w : stack_.weights) refs.push_back(&w);
  }
  if (mode == AblationMode::Full) {
    for (WeightGru& g : weight_grus_) {
      const auto p = g.parameters(config_.weight_feature_term);
      refs.insert(refs.end(), p.begin(), p.end());
    }
  }
  if (mode != AblationMode::GcnOnly) {
    const auto p = temporal_.parameters();
    refs.insert(refs.end(), p.begin(), p.end());
  }
  return refs;
}

}  // namespace gtenn
