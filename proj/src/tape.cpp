#include "alerta/tape.hpp"

#include <cmath>

#include "alerta/errors.hpp"

namespace alerta {

namespace {

void accumulate(Matrix& dst, const Matrix& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

double bce_with_logits(double logit, double target, double pos_weight) {
  return (1.0 - target) * logit + (1.0 + (pos_weight - 1.0) * target) * softplus(-logit);
}

Var Tape::push(Matrix value, std::function<void()> backward) {
  if (consumed_) throw UsageError("tape already used for a backward pass");
  nodes_.push_back(Node{std::move(value), Matrix{}, std::move(backward), {}});
  return Var{nodes_.size() - 1};
}

void Tape::check(Var v, const char* op) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw UsageError(std::string(op) + ": variable does not belong to this tape");
  }
}

Matrix& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

const Matrix& Tape::value(Var v) const {
  check(v, "value");
  return nodes_[v.id].value;
}

const Matrix& Tape::grad(Var v) const {
  check(v, "grad");
  return nodes_[v.id].grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value)); }

Var Tape::param(const ParamStore& store, const std::string& name) {
  if (auto it = param_ids_.find(name); it != param_ids_.end()) return Var{it->second};
  Var v = push(store.value(name));
  nodes_[v.id].param_name = name;
  param_ids_.emplace(name, v.id);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  check(a, "matmul");
  check(b, "matmul");
  Var out = push(alerta::matmul(value(a), value(b)));
  nodes_[out.id].backward = [this, a, b, out] {
    const Matrix& g = nodes_[out.id].grad;
    accumulate(grad_slot(a.id), matmul_nt(g, nodes_[b.id].value));
    accumulate(grad_slot(b.id), matmul_tn(nodes_[a.id].value, g));
  };
  return out;
}

Var Tape::add(Var a, Var b) {
  check(a, "add");
  check(b, "add");
  Var out = push(alerta::add(value(a), value(b)));
  nodes_[out.id].backward = [this, a, b, out] {
    const Matrix& g = nodes_[out.id].grad;
    accumulate(grad_slot(a.id), g);
    accumulate(grad_slot(b.id), g);
  };
  return out;
}

Var Tape::sub(Var a, Var b) {
  check(a, "sub");
  check(b, "sub");
  Var out = push(alerta::sub(value(a), value(b)));
  nodes_[out.id].backward = [this, a, b, out] {
    const Matrix& g = nodes_[out.id].grad;
    accumulate(grad_slot(a.id), g);
    Matrix& gb = grad_slot(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  };
  return out;
}

Var Tape::mul(Var a, Var b) {
  check(a, "mul");
  check(b, "mul");
  Var out = push(hadamard(value(a), value(b)));
  nodes_[out.id].backward = [this, a, b, out] {
    const Matrix& g = nodes_[out.id].grad;
    const Matrix& av = nodes_[a.id].value;
    const Matrix& bv = nodes_[b.id].value;
    Matrix& ga = grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    Matrix& gb = grad_slot(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  };
  return out;
}

Var Tape::sigmoid(Var a) {
  check(a, "sigmoid");
  Var out = push(alerta::sigmoid(value(a)));
  nodes_[out.id].backward = [this, a, out] {
    const Matrix& g = nodes_[out.id].grad;
    const Matrix& s = nodes_[out.id].value;
    Matrix& ga = grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s[i] * (1.0 - s[i]);
  };
  return out;
}

Var Tape::tanh(Var a) {
  check(a, "tanh");
  Var out = push(alerta::tanh(value(a)));
  nodes_[out.id].backward = [this, a, out] {
    const Matrix& g = nodes_[out.id].grad;
    const Matrix& t = nodes_[out.id].value;
    Matrix& ga = grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - t[i] * t[i]);
  };
  return out;
}

Var Tape::scale(Var a, double s) {
  check(a, "scale");
  Var out = push(alerta::scale(value(a), s));
  nodes_[out.id].backward = [this, a, out, s] {
    const Matrix& g = nodes_[out.id].grad;
    Matrix& ga = grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s;
  };
  return out;
}

Var Tape::one_minus(Var a) {
  check(a, "one_minus");
  Matrix v = value(a);
  for (double& x : v.values()) x = 1.0 - x;
  Var out = push(std::move(v));
  nodes_[out.id].backward = [this, a, out] {
    const Matrix& g = nodes_[out.id].grad;
    Matrix& ga = grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
  };
  return out;
}

Var Tape::add_column(Var m, Var bias) {
  check(m, "add_column");
  check(bias, "add_column");
  const Matrix& mv = value(m);
  const Matrix& bv = value(bias);
  if (bv.cols() != 1 || bv.rows() != mv.rows()) {
    throw DimensionError("add_column: shape mismatch " + mv.shape() + " + bias " + bv.shape());
  }
  Matrix v = mv;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) += bv[i];
  Var out = push(std::move(v));
  nodes_[out.id].backward = [this, m, bias, out] {
    const Matrix& g = nodes_[out.id].grad;
    accumulate(grad_slot(m.id), g);
    Matrix& gb = grad_slot(bias.id);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) gb[i] += g(i, j);
  };
  return out;
}

Var Tape::concat_rows(std::span<const Var> parts) {
  std::vector<Matrix> values;
  values.reserve(parts.size());
  for (Var p : parts) {
    check(p, "concat_rows");
    values.push_back(value(p));
  }
  Var out = push(alerta::concat_rows(values));
  std::vector<Var> ids(parts.begin(), parts.end());
  nodes_[out.id].backward = [this, ids, out] {
    const Matrix& g = nodes_[out.id].grad;
    std::size_t offset = 0;
    for (Var p : ids) {
      Matrix& gp = grad_slot(p.id);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offset + i];
      offset += gp.size();
    }
  };
  return out;
}

Var Tape::sum(Var a) {
  check(a, "sum");
  double s = 0.0;
  for (double v : value(a).values()) s += v;
  Var out = push(Matrix(1, 1, s));
  nodes_[out.id].backward = [this, a, out] {
    const double g = nodes_[out.id].grad[0];
    for (double& x : grad_slot(a.id).values()) x += g;
  };
  return out;
}

Var Tape::bce_with_logits(Var logits, std::span<const double> targets,
                          std::span<const double> weights, double pos_weight) {
  check(logits, "bce_with_logits");
  const Matrix& z = value(logits);
  if (z.rows() != 1 || targets.size() != z.cols() || weights.size() != z.cols()) {
    throw DimensionError("bce_with_logits: logits " + z.shape() + " with " +
                         std::to_string(targets.size()) + " targets and " +
                         std::to_string(weights.size()) + " weights");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < z.cols(); ++j) {
    if (weights[j] != 0.0) total += weights[j] * alerta::bce_with_logits(z[j], targets[j], pos_weight);
  }
  std::vector<double> y(targets.begin(), targets.end());
  std::vector<double> w(weights.begin(), weights.end());
  Var out = push(Matrix(1, 1, total));
  nodes_[out.id].backward = [this, logits, out, y = std::move(y), w = std::move(w), pos_weight] {
    const double g = nodes_[out.id].grad[0];
    const Matrix& zv = nodes_[logits.id].value;
    Matrix& gz = grad_slot(logits.id);
    for (std::size_t j = 0; j < zv.cols(); ++j) {
      if (w[j] == 0.0) continue;
      const double d = (1.0 - y[j]) - (1.0 + (pos_weight - 1.0) * y[j]) * alerta::sigmoid(-zv[j]);
      gz[j] += g * w[j] * d;
    }
  };
  return out;
}

void Tape::backward(Var loss, ParamStore& store) {
  if (nodes_.empty()) throw UsageError("backward called before any forward computation");
  if (consumed_) throw UsageError("backward called twice on the same tape");
  check(loss, "backward");
  if (nodes_[loss.id].value.rows() != 1 || nodes_[loss.id].value.cols() != 1) {
    throw UsageError("backward needs a scalar loss, got " + nodes_[loss.id].value.shape());
  }
  consumed_ = true;
  grad_slot(loss.id)[0] = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.backward) continue;
    n.backward();
  }
  store.zero_grads();
  for (Node& n : nodes_) {
    if (n.param_name.empty() || n.grad.empty()) continue;
    store.grad(n.param_name) = n.grad;
  }
}

}  // namespace alerta
