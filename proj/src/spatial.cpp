#include "gtenn/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "gtenn/optim.hpp"

namespace gtenn {

GcnStack::GcnStack(std::size_t nodes, std::vector<std::size_t> dims_in, Rng& rng)
    : dims(std::move(dims_in)) {
  if (dims.size() < 2) throw std::invalid_argument("gcn stack needs at least one layer");
  features = Parameter("features", scaled_uniform(nodes, dims[0], rng));
  for (std::size_t l = 1; l < dims.size(); ++l) {
    weights.emplace_back(fmt::format("gcn{}.weight", l), scaled_uniform(dims[l - 1], dims[l], rng));
  }
}

WeightGru::WeightGru(std::size_t d_in, std::size_t d_out, std::size_t layer, Rng& rng) {
  auto square = [&](const char* what) {
    return Parameter(fmt::format("evolve{}.{}", layer, what), scaled_uniform(d_in, d_in, rng));
  };
  auto bias = [&](const char* what) {
    return Parameter(fmt::format("evolve{}.{}", layer, what), Matrix(d_in, d_out));
  };
  update_w = square("update_w");
  reset_w = square("reset_w");
  cand_w = square("cand_w");
  update_f = square("update_f");
  reset_f = square("reset_f");
  cand_f = square("cand_f");
  update_b = bias("update_b");
  reset_b = bias("reset_b");
  cand_b = bias("cand_b");
  scores = Parameter(fmt::format("evolve{}.scores", layer), scaled_uniform(d_in, 1, rng));
}

ParameterRefs WeightGru::parameters(bool feature_term) {
  ParameterRefs refs{&update_w, &reset_w, &cand_w, &update_b, &reset_b, &cand_b};
  if (feature_term) {
    refs.insert(refs.end(), {&update_f, &reset_f, &cand_f, &scores});
  }
  return refs;
}

Var gcn_layer(Var features, Var a_hat, Var weights, double slope) {
  if (a_hat.rows() != a_hat.cols() || a_hat.cols() != features.rows() ||
      features.cols() != weights.rows()) {
    throw ShapeError(fmt::format("gcn_layer: shape mismatch A {} F {} W {}",
                                 a_hat.value().shape_string(), features.value().shape_string(),
                                 weights.value().shape_string()));
  }
  return leaky_relu(matmul(a_hat, matmul(features, weights)), slope);
}

Var summarize_features(Var features, std::size_t k, Var scores) {
  const Matrix& f = features.value();
  if (k > f.rows()) {
    throw std::invalid_argument(
        fmt::format("summarize_features: k = {} exceeds {} rows", k, f.rows()));
  }
  if (scores.rows() != f.cols() || scores.cols() != 1) {
    throw ShapeError(fmt::format("summarize_features: scores {} do not match features {}",
                                 scores.value().shape_string(), f.shape_string()));
  }
  Var y = matmul(features, scores);  // n x 1
  const Matrix& yv = y.value();
  std::vector<std::size_t> order(f.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return yv(a, 0) > yv(b, 0); });
  order.resize(k);
  Var picked = select_rows(features, order);
  Var factors = tanh(select_rows(y, std::move(order)));
  return scale_rows(picked, factors);
}

Var evolve_weights(Var w_prev, std::optional<Var> summary, WeightGru& gru) {
  Tape& tape = *w_prev.tape();
  if (summary && !(summary->rows() == w_prev.cols() && summary->cols() == w_prev.rows())) {
    throw ShapeError(fmt::format("evolve_weights: summary {} does not transpose to weights {}",
                                 summary->value().shape_string(), w_prev.value().shape_string()));
  }
  std::optional<Var> summary_t;
  if (summary) summary_t = transpose(*summary);

  auto gate_input = [&](Parameter& on_w, Var w_term, Parameter& on_f, Parameter& bias) {
    Var pre = matmul(tape.parameter(on_w), w_term);
    if (summary_t) pre = pre + matmul(tape.parameter(on_f), *summary_t);
    return pre + tape.parameter(bias);
  };

  Var update = sigmoid(gate_input(gru.update_w, w_prev, gru.update_f, gru.update_b));
  Var reset = sigmoid(gate_input(gru.reset_w, w_prev, gru.reset_f, gru.reset_b));
  Var candidate = tanh(gate_input(gru.cand_w, hadamard(reset, w_prev), gru.cand_f, gru.cand_b));
  return hadamard(one_minus(update), candidate) + hadamard(update, w_prev);
}

SpatialResult spatial_forward(Tape& tape, Var a_hat, GcnStack& stack, std::vector<WeightGru>& grus,
                              const std::vector<Var>& w_prev, const SpatialOptions& options) {
  const std::size_t layers = stack.layers();
  if (options.evolve && (grus.size() != layers || w_prev.size() != layers)) {
    throw ShapeError(fmt::format("spatial_forward: {} layers but {} weight GRUs and {} previous weights",
                                 layers, grus.size(), w_prev.size()));
  }
  SpatialResult result;
  Var h = tape.parameter(stack.features);
  for (std::size_t l = 0; l < layers; ++l) {
    Var w;
    if (options.evolve) {
      std::optional<Var> summary;
      if (options.feature_term) {
        // With fewer nodes than output columns the summary is zero-padded.
        const std::size_t d_out = stack.dims[l + 1];
        const std::size_t k = std::min(d_out, h.rows());
        Var s = summarize_features(h, k, tape.parameter(grus[l].scores));
        summary = k < d_out ? pad_rows(s, d_out) : s;
      }
      w = evolve_weights(w_prev[l], summary, grus[l]);
    } else {
      w = tape.parameter(stack.weights[l]);
    }
    h = gcn_layer(h, a_hat, w, options.slope);
    result.weights.push_back(w);
  }
  result.features = h;
  return result;
}

}  // namespace gtenn
