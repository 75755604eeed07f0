#include <doctest.h>

#include <cmath>

#include "gtenn/grad_check.hpp"
#include "gtenn/graph.hpp"
#include "gtenn/optim.hpp"
#include "gtenn/spatial.hpp"

using namespace gtenn;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

Var weighted_sum(Var x, const Matrix& weights) {
  return sum(hadamard(x, x.tape()->constant(weights)));
}

Matrix ring_adjacency(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  const DynamicNetwork net(n, {EdgeSet(edges, n)});
  return normalize_adjacency(build_adjacency(net, 1));
}

double leaky(double x) { return x > 0.0 ? x : kLeakySlope * x; }

void set_all(WeightGru& gru, double value) {
  for (Parameter* p : gru.parameters(true)) p->value.fill(value);
}

}  // namespace

TEST_CASE("gcn layer on a path graph matches the hand computation") {
  const DynamicNetwork path(3, {EdgeSet({{0, 1}, {1, 2}}, 3)});
  const Matrix a_hat = normalize_adjacency(build_adjacency(path, 1));
  const double c = 1.0 / std::sqrt(6.0);
  Tape tape;
  // F = I, so the output is LeakyReLU(A_hat W) with W = (-2, 1, 0)^T.
  const Var out = gcn_layer(tape.constant(Matrix::identity(3)), tape.constant(a_hat),
                            tape.constant(Matrix{{-2}, {1}, {0}}));
  CHECK(out.value()(0, 0) == doctest::Approx(leaky(-1.0 + c)));
  CHECK(out.value()(1, 0) == doctest::Approx(leaky(-2.0 * c + 1.0 / 3.0)));
  CHECK(out.value()(2, 0) == doctest::Approx(leaky(c)));
  CHECK(out.value()(0, 0) < 0.0);
}

TEST_CASE("gcn layer rejects mismatched shapes") {
  Tape tape;
  const Var a = tape.constant(Matrix::identity(3));
  CHECK_THROWS_AS(gcn_layer(tape.constant(Matrix(2, 2)), a, tape.constant(Matrix(2, 2))), ShapeError);
  CHECK_THROWS_AS(gcn_layer(tape.constant(Matrix(3, 2)), a, tape.constant(Matrix(3, 2))), ShapeError);
}

TEST_CASE("summary keeps the top-k rows scaled by tanh of their score") {
  Tape tape;
  const Matrix f{{1, 0}, {0, 1}, {2, 0}, {0, -1}};
  const Var s = summarize_features(tape.constant(f), 2, tape.constant(Matrix{{1}, {0.5}}));
  // Scores 1, 0.5, 2, -0.5: rows 2 then 0.
  CHECK(s.value()(0, 0) == doctest::Approx(2.0 * std::tanh(2.0)));
  CHECK(s.value()(0, 1) == 0.0);
  CHECK(s.value()(1, 0) == doctest::Approx(std::tanh(1.0)));
  CHECK(s.value()(1, 1) == 0.0);
}

TEST_CASE("summary ties go to the lower row and zero scores give a zero summary") {
  Tape tape;
  const Matrix f{{1, 1}, {2, 2}, {3, 3}};
  const Var s = summarize_features(tape.constant(f), 2, tape.constant(Matrix{{0}, {0}}));
  CHECK(s.value() == Matrix(2, 2));

  const Var tied = summarize_features(tape.constant(Matrix{{1, 0}, {0, 1}, {1, 0}}), 1,
                                      tape.constant(Matrix{{1}, {1}}));
  CHECK(tied.value()(0, 0) == doctest::Approx(std::tanh(1.0)));
}

TEST_CASE("summary validates k and score shape") {
  Tape tape;
  CHECK_THROWS_AS(summarize_features(tape.constant(Matrix(2, 2)), 3, tape.constant(Matrix(2, 1))),
                  std::invalid_argument);
  CHECK_THROWS_AS(summarize_features(tape.constant(Matrix(2, 2)), 1, tape.constant(Matrix(3, 1))),
                  ShapeError);
}

TEST_CASE("a saturated update gate freezes the weights") {
  Rng rng(4);
  WeightGru gru(3, 2, 1, rng);
  set_all(gru, 0.0);
  gru.update_b.value.fill(50.0);
  gru.cand_b.value.fill(0.7);
  const Matrix w = random_matrix(3, 2, rng);
  Tape tape;
  const Var next = evolve_weights(tape.constant(w), tape.constant(random_matrix(2, 3, rng)), gru);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(next.value().values()[i] == doctest::Approx(w.values()[i]).epsilon(1e-12));
}

TEST_CASE("a closed update gate replaces the weights by the candidate") {
  Rng rng(5);
  WeightGru gru(2, 2, 1, rng);
  set_all(gru, 0.0);
  gru.update_b.value.fill(-50.0);
  gru.cand_b.value.fill(0.3);
  Tape tape;
  const Var next = evolve_weights(tape.constant(random_matrix(2, 2, rng)), std::nullopt, gru);
  for (double v : next.value().values()) CHECK(v == doctest::Approx(std::tanh(0.3)));
}

TEST_CASE("weight step with all-zero gate weights halves toward the candidate") {
  // Update gate 0.5, candidate tanh(0) = 0: W_t = 0.5 W_{t-1}.
  Rng rng(6);
  WeightGru gru(3, 2, 1, rng);
  set_all(gru, 0.0);
  const Matrix w = random_matrix(3, 2, rng);
  Tape tape;
  const Var next = evolve_weights(tape.constant(w), tape.constant(random_matrix(2, 3, rng)), gru);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(next.value().values()[i] == doctest::Approx(0.5 * w.values()[i]));
}

TEST_CASE("evolve_weights rejects a summary of the wrong shape") {
  Rng rng(7);
  WeightGru gru(3, 2, 1, rng);
  Tape tape;
  CHECK_THROWS_AS(evolve_weights(tape.constant(Matrix(3, 2)), tape.constant(Matrix(3, 2)), gru), ShapeError);
}

TEST_CASE("weight evolution gradients match finite differences") {
  Rng rng(8);
  WeightGru gru(4, 3, 1, rng);
  for (Parameter* p : gru.parameters(true)) p->value = random_matrix(p->value.rows(), p->value.cols(), rng);
  Parameter w_prev("w_prev", random_matrix(4, 3, rng));
  Parameter features("features", random_matrix(6, 4, rng));
  const Matrix weights = random_matrix(4, 3, rng);

  ParameterRefs params = gru.parameters(true);
  params.push_back(&w_prev);
  params.push_back(&features);
  const auto result = grad_check(
      [&](Tape& tape) {
        const Var summary = summarize_features(tape.parameter(features), 3, tape.parameter(gru.scores));
        return weighted_sum(evolve_weights(tape.parameter(w_prev), summary, gru), weights);
      },
      params);
  CHECK(result.max_relative_error <= 1e-4);
  CHECK(result.entries_checked > 0);
}

TEST_CASE("two evolving layers on a small graph pass a gradient check") {
  Rng rng(9);
  const std::size_t n = 6;
  GcnStack stack(n, {4, 3, 2}, rng);
  std::vector<WeightGru> grus{WeightGru(4, 3, 1, rng), WeightGru(3, 2, 2, rng)};
  for (auto& g : grus) {
    for (Parameter* p : g.parameters(true)) p->value = random_matrix(p->value.rows(), p->value.cols(), rng);
  }
  const Matrix a_hat = ring_adjacency(n);
  const Matrix weights = random_matrix(n, 2, rng);

  ParameterRefs params{&stack.features, &stack.weights[0], &stack.weights[1]};
  for (auto& g : grus) {
    for (Parameter* p : g.parameters(true)) params.push_back(p);
  }
  const auto result = grad_check(
      [&](Tape& tape) {
        const std::vector<Var> w0{tape.parameter(stack.weights[0]), tape.parameter(stack.weights[1])};
        const SpatialResult r = spatial_forward(tape, tape.constant(a_hat), stack, grus, w0, {});
        return weighted_sum(r.features, weights);
      },
      params);
  CHECK(result.max_relative_error <= 1e-4);
}

TEST_CASE("fewer nodes than output columns pads the summary") {
  Rng rng(10);
  GcnStack stack(3, {3, 4}, rng);
  std::vector<WeightGru> grus{WeightGru(3, 4, 1, rng)};
  Tape tape;
  const std::vector<Var> w0{tape.parameter(stack.weights[0])};
  const SpatialResult r = spatial_forward(tape, tape.constant(ring_adjacency(3)), stack, grus, w0, {});
  CHECK(r.features.rows() == 3);
  CHECK(r.features.cols() == 4);
  CHECK(r.features.value().all_finite());
}

TEST_CASE("static mode uses the stack weights unchanged") {
  Rng rng(11);
  GcnStack stack(5, {3, 2}, rng);
  std::vector<WeightGru> grus;
  Tape tape;
  const SpatialResult r =
      spatial_forward(tape, tape.constant(ring_adjacency(5)), stack, grus, {}, {.evolve = false});
  REQUIRE(r.weights.size() == 1);
  CHECK(r.weights[0].value() == stack.weights[0].value);
}

TEST_CASE("evolving mode needs one GRU and previous weight per layer") {
  Rng rng(12);
  GcnStack stack(5, {3, 2, 2}, rng);
  std::vector<WeightGru> grus{WeightGru(3, 2, 1, rng)};
  Tape tape;
  CHECK_THROWS_AS(spatial_forward(tape, tape.constant(ring_adjacency(5)), stack, grus, {}, {}), ShapeError);
}

TEST_CASE("weight GRU parameter set depends on the feature term") {
  Rng rng(13);
  WeightGru gru(3, 2, 1, rng);
  CHECK(gru.parameters(false).size() == 6);
  CHECK(gru.parameters(true).size() == 10);
  CHECK(gru.update_w.value.rows() == 3);
  CHECK(gru.update_w.value.cols() == 3);
  CHECK(gru.update_b.value == Matrix(3, 2));
}
