#pragma once

#include <functional>

#include "gtenn/autodiff.hpp"

namespace gtenn {

/// Builds a scalar (1x1) loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
  /// Parameter name and flat index of the worst entry.
  std::string worst_parameter;
  std::size_t worst_index = 0;
};

/// Compares tape gradients against central differences for every entry of
/// every parameter. Error per entry is |analytic - numeric| / (|numeric| + eps).
/// Throws NumericError if the loss is non-finite at any evaluated point.
GradCheckResult grad_check(const LossBuilder& loss, const ParameterRefs& params, double eps = 1e-5);

}  // namespace gtenn
