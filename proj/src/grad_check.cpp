#include "gtenn/grad_check.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace gtenn {

namespace {

double evaluate(const LossBuilder& loss) {
  Tape tape;
  const double v = loss(tape).value()(0, 0);
  if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, const ParameterRefs& params, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");

  zero_grads(params);
  {
    Tape tape;
    Var l = loss(tape);
    if (!std::isfinite(l.value()(0, 0))) throw NumericError("grad_check: loss is not finite");
    tape.backward(l);
  }

  GradCheckResult result;
  for (Parameter* p : params) {
    auto values = p->value.values();
    const auto analytic = p->grad.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate(loss);
      values[i] = saved - eps;
      const double down = evaluate(loss);
      values[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(analytic[i] - numeric) / (std::abs(numeric) + eps);
      ++result.entries_checked;
      if (err > result.max_relative_error || result.worst_parameter.empty()) {
        result.max_relative_error = err;
        result.worst_parameter = p->name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace gtenn
