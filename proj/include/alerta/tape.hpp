#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "alerta/matrix.hpp"
#include "alerta/param_store.hpp"

namespace alerta {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
  bool valid() const { return id != static_cast<std::size_t>(-1); }
};

/// Reverse-mode recorder. Every operation appends a node holding its value and
/// a closure that pushes the node's adjoint to its operands. Nodes are only
/// appended, so ids form a topological order and the backward sweep is a
/// single reverse pass.
///
/// A tape is single-use: record one forward computation, call backward once.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a ParamStore entry. Repeated calls with the same name
  /// return the same node, so shared weights accumulate one gradient.
  Var param(const ParamStore& store, const std::string& name);

  const Matrix& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var scale(Var a, double s);
  /// 1 - a, elementwise.
  Var one_minus(Var a);
  /// m (R x C) plus bias (R x 1) added to every column. The only place a
  /// vector is repeated across columns; callers opt in explicitly.
  Var add_column(Var m, Var bias);
  Var concat_rows(std::span<const Var> parts);
  /// Sum of all entries, as a 1x1 value.
  Var sum(Var a);
  /// Weighted binary cross-entropy on logits (1 x B), returned as 1x1:
  ///   sum_j w_j * [(1-y_j) z_j + (1 + (pw-1) y_j) softplus(-z_j)]
  /// which equals max(z,0) - z y + ln(1 + e^{-|z|}) when pw = 1.
  Var bce_with_logits(Var logits, std::span<const double> targets,
                      std::span<const double> weights, double pos_weight = 1.0);

  /// Reverse sweep from a 1x1 loss. Zeroes every gradient slot of `store`
  /// and then fills the slots of parameters reached through param().
  void backward(Var loss, ParamStore& store);

  /// Adjoint of a node after backward(); zero matrix if it received none.
  const Matrix& grad(Var v) const;

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void()> backward;
    std::string param_name;
  };

  Var push(Matrix value, std::function<void()> backward = {});
  Matrix& grad_slot(std::size_t id);
  void check(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::map<std::string, std::size_t> param_ids_;
  bool consumed_ = false;
};

/// Numerically stable per-sample BCE on a logit, with optional positive weight.
double bce_with_logits(double logit, double target, double pos_weight = 1.0);

}  // namespace alerta
