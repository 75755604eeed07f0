#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gtenn/autodiff.hpp"
#include "gtenn/random.hpp"

namespace gtenn {

inline constexpr double kLeakySlope = 0.01;

/// Learnable parameters of a stack of graph convolutions: the shared initial
/// node features and the per-layer weights used before the first snapshot.
struct GcnStack {
  std::vector<std::size_t> dims;  // d_0 .. d_L
  Parameter features;             // n x d_0
  std::vector<Parameter> weights; // layer l: d_{l-1} x d_l

  GcnStack() = default;
  GcnStack(std::size_t nodes, std::vector<std::size_t> dims, Rng& rng);

  std::size_t layers() const { return weights.size(); }
};

/// Matrix GRU that carries one layer's weight matrix from snapshot to
/// snapshot. Gate weights act on the previous weights (d_in x d_in) and on a
/// top-k summary of the layer input (d_in x d_in); biases have the weight's shape.
struct WeightGru {
  Parameter update_w, reset_w, cand_w;
  Parameter update_f, reset_f, cand_f;
  Parameter update_b, reset_b, cand_b;
  Parameter scores;  // d_in x 1, ranks node rows for the summary

  WeightGru() = default;
  WeightGru(std::size_t d_in, std::size_t d_out, std::size_t layer, Rng& rng);

  ParameterRefs parameters(bool feature_term);
};

/// LeakyReLU(A_hat * F * W).
Var gcn_layer(Var features, Var a_hat, Var weights, double slope = kLeakySlope);

/// The k rows of `features` with the largest features*scores (ties to the
/// lower row id), in descending score order, each scaled by tanh(score).
Var summarize_features(Var features, std::size_t k, Var scores);

/// One GRU step on a weight matrix. `summary` is the d_out x d_in summary of
/// the layer input, or nullopt to gate on the previous weights alone.
Var evolve_weights(Var w_prev, std::optional<Var> summary, WeightGru& gru);

struct SpatialOptions {
  /// When false the layer weights are the stack's static weights at every t.
  bool evolve = true;
  bool feature_term = true;
  double slope = kLeakySlope;
};

struct SpatialResult {
  Var features;              // F_t^L
  std::vector<Var> weights;  // W_t^l per layer
};

/// Runs all layers for one snapshot, interleaving weight evolution and
/// convolution layer by layer. `w_prev` holds W_{t-1}^l (the stack's initial
/// weights at t = 1); ignored when weights are static.
SpatialResult spatial_forward(Tape& tape, Var a_hat, GcnStack& stack, std::vector<WeightGru>& grus,
                              const std::vector<Var>& w_prev, const SpatialOptions& options);

}  // namespace gtenn
