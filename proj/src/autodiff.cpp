#include "gtenn/autodiff.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

namespace gtenn {

Parameter::Parameter(std::string name, Matrix init)
    : name(std::move(name)), value(std::move(init)), grad(value.rows(), value.cols()) {}

void zero_grads(const ParameterRefs& params) {
  for (Parameter* p : params) p->zero_grad();
}

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) return Var(this, it->second);
  nodes_.push_back(Node{p.value, {}, {}, &p, true});
  param_ids_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward back) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape() != this) throw std::logic_error("tape: operand recorded on a different tape");
    needs = needs || nodes_[v.id()].needs_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(back) : Backward{}, nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw std::logic_error("tape: loss recorded on a different tape");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError(fmt::format("backward: loss must be 1x1, got {}", loss.value().shape_string()));
  }
  visited_.clear();
  grad(loss.id())(0, 0) += 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.back) {
      visited_.push_back(i);
      n.back(*this, i);
    } else if (n.param != nullptr) {
      if (n.param->grad.empty()) n.param->zero_grad();
      n.param->grad += n.grad;
    }
  }
}

namespace {

void same_tape(Var a, Var b) {
  if (a.tape() != b.tape() || a.tape() == nullptr) {
    throw std::logic_error("tape: operands belong to different tapes");
  }
}

template <typename F>
Var unary(Var x, Matrix out, F back) {
  return x.tape()->record(std::move(out), {x}, [xi = x.id(), back](Tape& t, std::size_t self) {
    back(t, xi, self);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b);
  Tape& t = *a.tape();
  return t.record(gtenn::matmul(a.value(), b.value()), {a, b},
                  [ai = a.id(), bi = b.id()](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad(self);
                    if (tp.needs_grad(ai)) tp.grad(ai) += matmul_nt(g, tp.value(bi));
                    if (tp.needs_grad(bi)) tp.grad(bi) += matmul_tn(tp.value(ai), g);
                  });
}

Var operator+(Var a, Var b) {
  same_tape(a, b);
  return a.tape()->record(a.value() + b.value(), {a, b},
                          [ai = a.id(), bi = b.id()](Tape& tp, std::size_t self) {
                            const Matrix& g = tp.grad(self);
                            if (tp.needs_grad(ai)) tp.grad(ai) += g;
                            if (tp.needs_grad(bi)) tp.grad(bi) += g;
                          });
}

Var operator-(Var a, Var b) {
  same_tape(a, b);
  return a.tape()->record(a.value() - b.value(), {a, b},
                          [ai = a.id(), bi = b.id()](Tape& tp, std::size_t self) {
                            const Matrix& g = tp.grad(self);
                            if (tp.needs_grad(ai)) tp.grad(ai) += g;
                            if (tp.needs_grad(bi)) tp.grad(bi) -= g;
                          });
}

Var hadamard(Var a, Var b) {
  same_tape(a, b);
  return a.tape()->record(gtenn::hadamard(a.value(), b.value()), {a, b},
                          [ai = a.id(), bi = b.id()](Tape& tp, std::size_t self) {
                            const Matrix& g = tp.grad(self);
                            if (tp.needs_grad(ai)) tp.grad(ai) += gtenn::hadamard(g, tp.value(bi));
                            if (tp.needs_grad(bi)) tp.grad(bi) += gtenn::hadamard(g, tp.value(ai));
                          });
}

Var add_row(Var x, Var row) {
  same_tape(x, row);
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw ShapeError(fmt::format("add_row: shape mismatch {} + {}", x.value().shape_string(),
                                 row.value().shape_string()));
  }
  Matrix out = x.value();
  const auto r = row.value().row(0);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += r[j];
  }
  return x.tape()->record(std::move(out), {x, row},
                          [xi = x.id(), ri = row.id()](Tape& tp, std::size_t self) {
                            const Matrix& g = tp.grad(self);
                            if (tp.needs_grad(xi)) tp.grad(xi) += g;
                            if (tp.needs_grad(ri)) {
                              auto dr = tp.grad(ri).row(0);
                              for (std::size_t i = 0; i < g.rows(); ++i) {
                                auto gr = g.row(i);
                                for (std::size_t j = 0; j < gr.size(); ++j) dr[j] += gr[j];
                              }
                            }
                          });
}

Var scale(Var x, double s) {
  return unary(x, x.value() * s, [s](Tape& tp, std::size_t xi, std::size_t self) {
    tp.grad(xi) += tp.grad(self) * s;
  });
}

Var one_minus(Var x) {
  Matrix out = x.value();
  for (double& v : out.values()) v = 1.0 - v;
  return unary(x, std::move(out), [](Tape& tp, std::size_t xi, std::size_t self) {
    tp.grad(xi) -= tp.grad(self);
  });
}

Var sigmoid(Var x) {
  return unary(x, gtenn::sigmoid(x.value()), [](Tape& tp, std::size_t xi, std::size_t self) {
    const auto y = tp.value(self).values();
    const auto g = tp.grad(self).values();
    auto dx = tp.grad(xi).values();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Var x) {
  return unary(x, gtenn::tanh(x.value()), [](Tape& tp, std::size_t xi, std::size_t self) {
    const auto y = tp.value(self).values();
    const auto g = tp.grad(self).values();
    auto dx = tp.grad(xi).values();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var leaky_relu(Var x, double slope) {
  return unary(x, gtenn::leaky_relu(x.value(), slope),
               [slope](Tape& tp, std::size_t xi, std::size_t self) {
                 const auto in = tp.value(xi).values();
                 const auto g = tp.grad(self).values();
                 auto dx = tp.grad(xi).values();
                 for (std::size_t i = 0; i < dx.size(); ++i) {
                   dx[i] += in[i] > 0.0 ? g[i] : slope * g[i];
                 }
               });
}

Var transpose(Var x) {
  return unary(x, gtenn::transpose(x.value()), [](Tape& tp, std::size_t xi, std::size_t self) {
    tp.grad(xi) += gtenn::transpose(tp.grad(self));
  });
}

Var select_rows(Var x, std::vector<std::size_t> rows) {
  const Matrix& in = x.value();
  Matrix out(rows.size(), in.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= in.rows()) {
      throw ShapeError(fmt::format("select_rows: row {} outside {}", rows[i], in.shape_string()));
    }
    auto src = in.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return unary(x, std::move(out),
               [rows = std::move(rows)](Tape& tp, std::size_t xi, std::size_t self) {
                 const Matrix& g = tp.grad(self);
                 Matrix& dx = tp.grad(xi);
                 for (std::size_t i = 0; i < rows.size(); ++i) {
                   auto src = g.row(i);
                   auto dst = dx.row(rows[i]);
                   for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                 }
               });
}

Var scale_rows(Var x, Var factors) {
  same_tape(x, factors);
  if (factors.cols() != 1 || factors.rows() != x.rows()) {
    throw ShapeError(fmt::format("scale_rows: shape mismatch {} by {}", x.value().shape_string(),
                                 factors.value().shape_string()));
  }
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double f = factors.value()(i, 0);
    for (double& v : out.row(i)) v *= f;
  }
  return x.tape()->record(std::move(out), {x, factors},
                          [xi = x.id(), fi = factors.id()](Tape& tp, std::size_t self) {
                            const Matrix& g = tp.grad(self);
                            const Matrix& xv = tp.value(xi);
                            const Matrix& fv = tp.value(fi);
                            if (tp.needs_grad(xi)) {
                              Matrix& dx = tp.grad(xi);
                              for (std::size_t i = 0; i < g.rows(); ++i) {
                                auto gr = g.row(i);
                                auto dr = dx.row(i);
                                for (std::size_t j = 0; j < gr.size(); ++j) dr[j] += gr[j] * fv(i, 0);
                              }
                            }
                            if (tp.needs_grad(fi)) {
                              Matrix& df = tp.grad(fi);
                              for (std::size_t i = 0; i < g.rows(); ++i) {
                                auto gr = g.row(i);
                                auto xr = xv.row(i);
                                double s = 0.0;
                                for (std::size_t j = 0; j < gr.size(); ++j) s += gr[j] * xr[j];
                                df(i, 0) += s;
                              }
                            }
                          });
}

Var pad_rows(Var x, std::size_t rows) {
  const Matrix& in = x.value();
  if (rows < in.rows()) {
    throw ShapeError(fmt::format("pad_rows: cannot pad {} down to {} rows", in.shape_string(), rows));
  }
  Matrix out(rows, in.cols());
  std::copy(in.values().begin(), in.values().end(), out.values().begin());
  return unary(x, std::move(out), [](Tape& tp, std::size_t xi, std::size_t self) {
    const auto g = tp.grad(self).values();
    auto dx = tp.grad(xi).values();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i];
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return unary(x, Matrix(1, 1, s), [](Tape& tp, std::size_t xi, std::size_t self) {
    const double g = tp.grad(self)(0, 0);
    for (double& v : tp.grad(xi).values()) v += g;
  });
}

}  // namespace gtenn
