#include "gtenn/temporal.hpp"

#include <fmt/format.h>

#include "gtenn/optim.hpp"

namespace gtenn {

TemporalGru::TemporalGru(std::size_t input_dim, std::size_t hidden_dim, Rng& rng)
    : input_r("temporal.input_r", scaled_uniform(input_dim, hidden_dim, rng)),
      input_z("temporal.input_z", scaled_uniform(input_dim, hidden_dim, rng)),
      input_h("temporal.input_h", scaled_uniform(input_dim, hidden_dim, rng)),
      recur_r("temporal.recur_r", scaled_uniform(hidden_dim, hidden_dim, rng)),
      recur_z("temporal.recur_z", scaled_uniform(hidden_dim, hidden_dim, rng)),
      recur_h("temporal.recur_h", scaled_uniform(hidden_dim, hidden_dim, rng)),
      bias_r("temporal.bias_r", Matrix(1, hidden_dim)),
      bias_z("temporal.bias_z", Matrix(1, hidden_dim)),
      bias_h("temporal.bias_h", Matrix(1, hidden_dim)) {}

ParameterRefs TemporalGru::parameters() {
  return {&input_r, &input_z, &input_h, &recur_r, &recur_z, &recur_h, &bias_r, &bias_z, &bias_h};
}

Var gru_cell(Var input, Var h_prev, TemporalGru& gru) {
  if (input.cols() != gru.input_dim() || h_prev.cols() != gru.hidden_dim() ||
      input.rows() != h_prev.rows()) {
    throw ShapeError(fmt::format("gru_cell: input {} and state {} do not fit a {}->{} cell",
                                 input.value().shape_string(), h_prev.value().shape_string(),
                                 gru.input_dim(), gru.hidden_dim()));
  }
  Tape& tape = *input.tape();
  auto p = [&](Parameter& param) { return tape.parameter(param); };

  Var reset = sigmoid(add_row(matmul(input, p(gru.input_r)) + matmul(h_prev, p(gru.recur_r)),
                              p(gru.bias_r)));
  Var update = sigmoid(add_row(matmul(input, p(gru.input_z)) + matmul(h_prev, p(gru.recur_z)),
                               p(gru.bias_z)));
  Var candidate = tanh(add_row(
      hadamard(reset, matmul(h_prev, p(gru.recur_h))) + matmul(input, p(gru.input_h)),
      p(gru.bias_h)));
  return hadamard(one_minus(update), h_prev) + hadamard(update, candidate);
}

std::vector<Var> temporal_forward(Tape& tape, const std::vector<Var>& inputs, TemporalGru& gru) {
  std::vector<Var> hidden;
  if (inputs.empty()) return hidden;
  const std::size_t rows = inputs.front().rows();
  for (const Var& x : inputs) {
    if (x.rows() != rows || x.cols() != inputs.front().cols()) {
      throw ShapeError(fmt::format("temporal_forward: input {} differs from first input {}",
                                   x.value().shape_string(), inputs.front().value().shape_string()));
    }
  }
  Var h = tape.constant(Matrix(rows, gru.hidden_dim()));
  for (const Var& x : inputs) {
    h = gru_cell(x, h, gru);
    hidden.push_back(h);
  }
  return hidden;
}

}  // namespace gtenn
