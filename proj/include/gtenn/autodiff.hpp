#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <vector>

#include "gtenn/matrix.hpp"

namespace gtenn {

/// A learnable matrix together with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string name, Matrix init);

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

using ParameterRefs = std::vector<Parameter*>;

void zero_grads(const ParameterRefs& params);

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode gradient record. Nodes are appended in evaluation order and
/// backward() visits them in exactly the reverse order, accumulating into the
/// Parameter::grad of every parameter leaf reached.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Registers a parameter leaf. Repeated calls for the same parameter return
  /// the same node.
  Var parameter(Parameter& p);
  /// Appends a node computed from `inputs`. `back` is dropped when no input
  /// carries a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward back);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  /// Gradient buffer of a node, allocated as zeros on first access.
  Matrix& grad(std::size_t id);

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 loss and propagates to all leaves.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  /// Node ids whose backward rule ran during the last backward(), in order.
  const std::vector<std::size_t>& last_backward_order() const { return visited_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward back;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_ids_;
  std::vector<std::size_t> visited_;
};

Var matmul(Var a, Var b);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var hadamard(Var a, Var b);
/// Adds a 1xC row to every row of an RxC matrix.
Var add_row(Var x, Var row);
Var scale(Var x, double s);
/// Elementwise 1 - x.
Var one_minus(Var x);
Var sigmoid(Var x);
Var tanh(Var x);
/// Subgradient at 0 is `slope`.
Var leaky_relu(Var x, double slope);
Var transpose(Var x);
Var select_rows(Var x, std::vector<std::size_t> rows);
/// Row i of x multiplied by factors(i, 0).
Var scale_rows(Var x, Var factors);
/// Appends zero rows until x has `rows` rows.
Var pad_rows(Var x, std::size_t rows);
/// Sum of all entries as a 1x1 matrix.
Var sum(Var x);

}  // namespace gtenn
