#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gtenn/autodiff.hpp"
#include "gtenn/random.hpp"

namespace gtenn {

enum class OptimizerKind { Adam, Sgd };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order optimizer over a fixed parameter list. Moment buffers are
/// shaped like the parameters on first use.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  /// Applies one update using each parameter's accumulated grad.
  void step(const ParameterRefs& params);

  std::uint64_t steps() const { return step_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;
};

/// Uniform in ±sqrt(6 / (fan_in + fan_out)).
Matrix scaled_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng);
inline Matrix scaled_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  return scaled_uniform(rows, cols, rows, cols, rng);
}

}  // namespace gtenn
