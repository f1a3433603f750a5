#include "alerta/model.hpp"

#include <cmath>

#include "alerta/errors.hpp"
#include "alerta/random.hpp"

namespace alerta {

namespace {

constexpr const char* kGates[] = {"z", "r", "h"};

struct CellVars {
  Var w_z, w_r, w_h, r_z, r_r, r_h, b_z, b_r, b_h;
};

CellVars cell_vars(Tape& tape, const ParamStore& store, const std::string& prefix) {
  auto p = [&](const char* n) { return tape.param(store, prefix + "." + n); };
  return {p("W_z"), p("W_r"), p("W_h"), p("R_z"), p("R_r"), p("R_h"), p("b_z"), p("b_r"), p("b_h")};
}

CellVars cell_constants(Tape& tape, const GruCellParams& c) {
  return {tape.constant(c.W_z), tape.constant(c.W_r), tape.constant(c.W_h),
          tape.constant(c.R_z), tape.constant(c.R_r), tape.constant(c.R_h),
          tape.constant(c.b_z), tape.constant(c.b_r), tape.constant(c.b_h)};
}

Var gate(Tape& tape, Var w, Var r, Var b, Var x, Var h) {
  return tape.add_column(tape.add(tape.matmul(w, x), tape.matmul(r, h)), b);
}

Var gru_cell(Tape& tape, const CellVars& c, Var x, Var h) {
  const Var z = tape.sigmoid(gate(tape, c.w_z, c.r_z, c.b_z, x, h));
  const Var r = tape.sigmoid(gate(tape, c.w_r, c.r_r, c.b_r, x, h));
  const Var candidate = tape.tanh(gate(tape, c.w_h, c.r_h, c.b_h, x, tape.mul(r, h)));
  return tape.add(tape.mul(tape.one_minus(z), h), tape.mul(z, candidate));
}

double harmonic(std::size_t t) {
  double s = 0.0;
  for (double w : tda_weights(t)) s += w;
  return s;
}

Var weighted_history(Tape& tape, std::span<const Var> hidden, bool normalize) {
  const auto w = tda_weights(hidden.size());
  Var acc = tape.scale(hidden[0], w[0]);
  for (std::size_t i = 1; i < hidden.size(); ++i) {
    acc = tape.add(acc, tape.scale(hidden[i], w[i]));
  }
  if (normalize) acc = tape.scale(acc, 1.0 / harmonic(hidden.size()));
  return acc;
}

void check_cell_shapes(const GruCellParams& c, std::size_t D, std::size_t U) {
  auto expect = [](const Matrix& m, std::size_t r, std::size_t cols, const char* name) {
    if (m.rows() != r || m.cols() != cols) {
      throw DimensionError(std::string("gru cell ") + name + " is " + m.shape() + ", expected " +
                           std::to_string(r) + "x" + std::to_string(cols));
    }
  };
  expect(c.W_z, U, D, "W_z");
  expect(c.W_r, U, D, "W_r");
  expect(c.W_h, U, D, "W_h");
  expect(c.R_z, U, U, "R_z");
  expect(c.R_r, U, U, "R_r");
  expect(c.R_h, U, U, "R_h");
  expect(c.b_z, U, 1, "b_z");
  expect(c.b_r, U, 1, "b_r");
  expect(c.b_h, U, 1, "b_h");
}

std::size_t fused_width(const ModelConfig& cfg) {
  return cfg.kind == ModelKind::alerta ? 2 * cfg.hidden : cfg.hidden;
}

}  // namespace

std::string to_string(ModelKind k) { return k == ModelKind::alerta ? "alerta" : "gru"; }

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "alerta") return ModelKind::alerta;
  if (s == "gru") return ModelKind::gru;
  throw ConfigError("unknown model kind '" + s + "' (expected alerta or gru)");
}

GruCellParams GruCellParams::from_store(const ParamStore& store, const std::string& prefix) {
  auto v = [&](const char* n) { return store.value(prefix + "." + n); };
  return {v("W_z"), v("W_r"), v("W_h"), v("R_z"), v("R_r"), v("R_h"), v("b_z"), v("b_r"), v("b_h")};
}

HeadParams HeadParams::from_store(const ParamStore& store) {
  return {store.value("head_m.w"), store.value("head_m.b"), store.value("head_v.w"),
          store.value("head_v.b")};
}

std::vector<std::string> volatility_param_names(const ModelParams&) {
  return {"head_v.b", "head_v.w"};
}

std::vector<std::string> movement_param_names(const ModelParams& params) {
  std::vector<std::string> out;
  for (const auto& name : params.store.names()) {
    if (name.rfind("head_v.", 0) != 0) out.push_back(name);
  }
  return out;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  if (config.input_dim == 0 || config.hidden == 0 || config.window == 0) {
    throw ConfigError("model dimensions must be positive (D=" + std::to_string(config.input_dim) +
                      ", U=" + std::to_string(config.hidden) +
                      ", T=" + std::to_string(config.window) + ")");
  }
  if (!config.feature_names.empty() && config.feature_names.size() != config.input_dim) {
    throw ConfigError("model input_dim " + std::to_string(config.input_dim) + " does not match " +
                      std::to_string(config.feature_names.size()) + " feature names");
  }
  ModelParams params{config, {}};
  Rng rng(seed);
  auto glorot = [&](std::size_t rows, std::size_t cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.uniform(-a, a);
    return m;
  };
  const std::size_t D = config.input_dim, U = config.hidden;
  auto add_cell = [&](const std::string& prefix) {
    for (const char* g : kGates) params.store.add(prefix + ".W_" + g, glorot(U, D));
    for (const char* g : kGates) params.store.add(prefix + ".R_" + g, glorot(U, U));
    for (const char* g : kGates) params.store.add(prefix + ".b_" + g, Matrix(U, 1));
  };
  add_cell("enc");
  if (config.kind == ModelKind::alerta && config.separate_context_cell) add_cell("ctx");
  const std::size_t F = fused_width(config);
  params.store.add("head_m.w", glorot(1, F));
  params.store.add("head_m.b", Matrix(1, 1));
  params.store.add("head_v.w", glorot(1, F + 1));
  params.store.add("head_v.b", Matrix(1, 1));
  return params;
}

void validate_params(const ModelParams& params) {
  const auto& cfg = params.config;
  const auto& store = params.store;
  check_cell_shapes(GruCellParams::from_store(store, "enc"), cfg.input_dim, cfg.hidden);
  const bool ctx = cfg.kind == ModelKind::alerta && cfg.separate_context_cell;
  if (ctx) check_cell_shapes(GruCellParams::from_store(store, "ctx"), cfg.input_dim, cfg.hidden);
  const std::size_t F = fused_width(cfg);
  const HeadParams h = HeadParams::from_store(store);
  auto expect = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
      throw DimensionError(std::string(name) + " is " + m.shape() + ", expected " +
                           std::to_string(r) + "x" + std::to_string(c));
    }
  };
  expect(h.movement_w, 1, F, "head_m.w");
  expect(h.movement_b, 1, 1, "head_m.b");
  expect(h.volatility_w, 1, F + 1, "head_v.w");
  expect(h.volatility_b, 1, 1, "head_v.b");
  const std::size_t expected_count = 4 + 9 * (ctx ? 2 : 1);
  if (store.size() != expected_count) {
    throw DimensionError("parameter store has " + std::to_string(store.size()) +
                         " entries, configuration expects " + std::to_string(expected_count));
  }
}

Matrix gru_step(const Matrix& x, const Matrix& h_prev, const GruCellParams& cell) {
  check_cell_shapes(cell, x.rows(), h_prev.rows());
  if (x.cols() != h_prev.cols()) {
    throw DimensionError("gru_step: input " + x.shape() + " and hidden " + h_prev.shape() +
                         " disagree on batch size");
  }
  Tape tape;
  const CellVars c = cell_constants(tape, cell);
  return tape.value(gru_cell(tape, c, tape.constant(x), tape.constant(h_prev)));
}

std::vector<double> tda_weights(std::size_t t) {
  if (t < 1) throw DomainError("tda_weights: step index must be >= 1");
  std::vector<double> w(t);
  for (std::size_t i = 1; i <= t; ++i) w[i - 1] = 1.0 / static_cast<double>(t - i + 1);
  return w;
}

Matrix tda_context(const Matrix& x_t, std::span<const Matrix> h_all, const GruCellParams& cell,
                   bool normalize) {
  if (h_all.empty()) throw DimensionError("tda_context: no hidden states");
  Tape tape;
  std::vector<Var> hidden;
  for (const auto& h : h_all) {
    if (!h.same_shape(h_all[0])) {
      throw DimensionError("tda_context: hidden states of shapes " + h_all[0].shape() + " and " +
                           h.shape());
    }
    hidden.push_back(tape.constant(h));
  }
  check_cell_shapes(cell, x_t.rows(), h_all[0].rows());
  const CellVars c = cell_constants(tape, cell);
  const Var summed = weighted_history(tape, hidden, normalize);
  return tape.value(gru_cell(tape, c, tape.constant(x_t), summed));
}

BatchGraph forward_graph(Tape& tape, const ModelParams& params, std::span<const Matrix> steps) {
  const ModelConfig& cfg = params.config;
  if (steps.empty()) throw DimensionError("forward: window has no time steps");
  const std::size_t B = steps[0].cols();
  for (const auto& x : steps) {
    if (x.rows() != cfg.input_dim || x.cols() != B) {
      throw DimensionError("forward: step input is " + x.shape() + ", model expects " +
                           std::to_string(cfg.input_dim) + "x" + std::to_string(B));
    }
  }
  const ParamStore& store = params.store;
  const CellVars enc = cell_vars(tape, store, "enc");

  BatchGraph g;
  Var h = tape.constant(Matrix(cfg.hidden, B));
  std::vector<Var> inputs;
  inputs.reserve(steps.size());
  for (const auto& x : steps) {
    inputs.push_back(tape.constant(x));
    h = gru_cell(tape, enc, inputs.back(), h);
    g.hidden.push_back(h);
  }

  Var fused = h;
  if (cfg.kind == ModelKind::alerta) {
    const CellVars ctx = cfg.separate_context_cell ? cell_vars(tape, store, "ctx") : enc;
    const Var summed = weighted_history(tape, g.hidden, cfg.tda_normalize);
    g.context = gru_cell(tape, ctx, inputs.back(), summed);
    const Var parts[] = {h, g.context};
    fused = tape.concat_rows(parts);
  }
  g.movement_logit = tape.add_column(tape.matmul(tape.param(store, "head_m.w"), fused),
                                     tape.param(store, "head_m.b"));
  g.movement_prob = tape.sigmoid(g.movement_logit);
  const Var vol_parts[] = {fused, g.movement_prob};
  const Var vol_in = tape.concat_rows(vol_parts);
  g.volatility_logit = tape.add_column(tape.matmul(tape.param(store, "head_v.w"), vol_in),
                                       tape.param(store, "head_v.b"));
  return g;
}

std::vector<Matrix> batch_steps(std::span<const Matrix* const> windows) {
  if (windows.empty()) return {};
  const std::size_t D = windows[0]->rows(), T = windows[0]->cols(), B = windows.size();
  std::vector<Matrix> steps(T, Matrix(D, B));
  for (std::size_t b = 0; b < B; ++b) {
    const Matrix& w = *windows[b];
    if (w.rows() != D || w.cols() != T) {
      throw DimensionError("batch_steps: window " + w.shape() + " differs from " +
                           windows[0]->shape());
    }
    for (std::size_t j = 0; j < T; ++j)
      for (std::size_t i = 0; i < D; ++i) steps[j](i, b) = w(i, j);
  }
  return steps;
}

ForwardTrace forward(const Matrix& window, const ModelParams& params,
                     std::span<const std::size_t> feature_rows) {
  const Matrix x = feature_rows.empty() ? window : select_rows(window, feature_rows);
  const Matrix* ptr = &x;
  const auto steps = batch_steps(std::span<const Matrix* const>(&ptr, 1));
  Tape tape;
  const BatchGraph g = forward_graph(tape, params, steps);

  ForwardTrace trace;
  const std::size_t U = params.config.hidden;
  trace.hidden = Matrix(U, g.hidden.size());
  for (std::size_t j = 0; j < g.hidden.size(); ++j) {
    const Matrix& h = tape.value(g.hidden[j]);
    for (std::size_t i = 0; i < U; ++i) trace.hidden(i, j) = h[i];
  }
  if (g.context.valid()) trace.context = tape.value(g.context);
  trace.movement_logit = tape.value(g.movement_logit)[0];
  trace.movement_prob = tape.value(g.movement_prob)[0];
  trace.volatility_logit = tape.value(g.volatility_logit)[0];
  trace.volatility_prob = sigmoid(trace.volatility_logit);
  return trace;
}

}  // namespace alerta
