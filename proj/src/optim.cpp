#include "gtenn/optim.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace gtenn {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd") return OptimizerKind::Sgd;
  throw std::invalid_argument(fmt::format("unknown optimizer '{}' (expected adam or sgd)", name));
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(config_.learning_rate >= 0.0)) {
    throw std::invalid_argument("optimizer: learning rate must be non-negative");
  }
}

void Optimizer::step(const ParameterRefs& params) {
  for (const Parameter* p : params) {
    require_same_shape(p->value, p->grad, "optimizer step");
  }
  ++step_;
  const double lr = config_.learning_rate;

  if (config_.kind == OptimizerKind::Sgd) {
    for (Parameter* p : params) {
      auto v = p->value.values();
      const auto g = p->grad.values();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
    }
    return;
  }

  if (first_moment_.empty()) {
    for (const Parameter* p : params) {
      first_moment_.emplace_back(p->value.rows(), p->value.cols());
      second_moment_.emplace_back(p->value.rows(), p->value.cols());
    }
  } else if (first_moment_.size() != params.size()) {
    throw ShapeError("optimizer: parameter list changed between steps");
  }

  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto v = params[k]->value.values();
    const auto g = params[k]->grad.values();
    auto m = first_moment_[k].values();
    auto s = second_moment_[k].values();
    if (m.size() != v.size()) throw ShapeError("optimizer: parameter shape changed between steps");
    for (std::size_t i = 0; i < v.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      s[i] = b2 * s[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double s_hat = s[i] / c2;
      v[i] -= lr * m_hat / (std::sqrt(s_hat) + config_.epsilon);
    }
  }
}

Matrix scaled_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

}  // namespace gtenn
