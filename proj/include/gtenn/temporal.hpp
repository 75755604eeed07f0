#pragma once

#include <cstddef>
#include <vector>

#include "gtenn/autodiff.hpp"
#include "gtenn/random.hpp"

namespace gtenn {

/// Node-wise GRU shared across all nodes and snapshots. Rows of the input are
/// nodes, so input weights are d x d_h and biases are 1 x d_h rows.
struct TemporalGru {
  Parameter input_r, input_z, input_h;  // d x d_h
  Parameter recur_r, recur_z, recur_h;  // d_h x d_h
  Parameter bias_r, bias_z, bias_h;     // 1 x d_h

  TemporalGru() = default;
  TemporalGru(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

  std::size_t input_dim() const { return input_r.value.rows(); }
  std::size_t hidden_dim() const { return input_r.value.cols(); }
  ParameterRefs parameters();
};

/// One step for every node row at once:
///   r = σ(F W_r + h U_r + B_r)
///   z = σ(F W_z + h U_z + B_z)
///   ĥ = tanh(r ∘ (h U_h) + F W_h + B_h)
///   h' = (1 - z) ∘ h + z ∘ ĥ
/// Note z gates the new state here, the reverse of the weight GRU.
Var gru_cell(Var input, Var h_prev, TemporalGru& gru);

/// Applies gru_cell over the sequence starting from h_0 = 0 and returns h_1..h_T.
std::vector<Var> temporal_forward(Tape& tape, const std::vector<Var>& inputs, TemporalGru& gru);

}  // namespace gtenn
