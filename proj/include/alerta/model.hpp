#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alerta/matrix.hpp"
#include "alerta/param_store.hpp"
#include "alerta/tape.hpp"

namespace alerta {

/// alerta: GRU encoder + temporal-distance context + fused heads.
/// gru: the same encoder with heads over the last hidden state only.
enum class ModelKind { alerta, gru };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct ModelConfig {
  std::size_t input_dim = 17;
  std::size_t hidden = 32;
  std::size_t window = 10;
  ModelKind kind = ModelKind::alerta;
  /// Divide the weighted hidden-state sum by the harmonic number H_t.
  bool tda_normalize = false;
  /// Use a second GRU cell ("ctx.*") for the context step instead of the encoder's.
  bool separate_context_cell = false;
  /// Dataset columns consumed, in row order. Empty means "all rows, in order".
  std::vector<std::string> feature_names;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelParams {
  ModelConfig config;
  ParamStore store;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Parameter names of one GRU cell under `prefix` ("enc" or "ctx").
struct GruCellParams {
  Matrix W_z, W_r, W_h;  // U x D
  Matrix R_z, R_r, R_h;  // U x U
  Matrix b_z, b_r, b_h;  // U x 1

  static GruCellParams from_store(const ParamStore& store, const std::string& prefix);
};

/// Movement head: weights 1 x 2U (1 x U for the plain GRU) and bias.
/// Volatility head: weights 1 x (2U+1) (1 x (U+1) for the plain GRU) and bias.
struct HeadParams {
  Matrix movement_w, movement_b;
  Matrix volatility_w, volatility_b;

  static HeadParams from_store(const ParamStore& store);
};

/// Names of the movement-side parameters (encoder, context cell, movement head).
std::vector<std::string> movement_param_names(const ModelParams& params);
/// Names of the volatility head parameters.
std::vector<std::string> volatility_param_names(const ModelParams& params);

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Throws DimensionError unless every parameter matches the configured shape.
void validate_params(const ModelParams& params);

/// z = s(W_z x + R_z h + b_z), r = s(W_r x + R_r h + b_r),
/// h~ = tanh(W_h x + R_h (r . h) + b_h), h' = (1 - z) . h + z . h~.
/// x is D x B, h_prev is U x B.
Matrix gru_step(const Matrix& x, const Matrix& h_prev, const GruCellParams& cell);

/// w_i = 1 / (t - i + 1) for i = 1..t. Throws DomainError if t < 1.
std::vector<double> tda_weights(std::size_t t);

/// gru_step(x_t, sum_i w_i h_i), optionally scaled by 1/H_t before the cell.
Matrix tda_context(const Matrix& x_t, std::span<const Matrix> h_all, const GruCellParams& cell,
                   bool normalize = false);

struct ForwardTrace {
  Matrix hidden;   // U x T, column i is h^{i+1}
  Matrix context;  // U x 1, empty for the plain GRU
  double movement_logit = 0.0;
  double movement_prob = 0.5;
  double volatility_logit = 0.0;
  double volatility_prob = 0.5;
};

/// Single-window forward pass. `window` is D_all x T; `feature_rows` picks the
/// rows the model consumes (all rows when empty). Rows outside the selection
/// are dropped, never zeroed.
ForwardTrace forward(const Matrix& window, const ModelParams& params,
                     std::span<const std::size_t> feature_rows = {});

/// Tape handles for a batched forward pass.
struct BatchGraph {
  std::vector<Var> hidden;  // T entries, each U x B
  Var context;              // U x B (invalid for the plain GRU)
  Var movement_logit;       // 1 x B
  Var movement_prob;        // 1 x B
  Var volatility_logit;     // 1 x B
};

/// Records the forward pass for B windows at once. steps[j] is D x B and holds
/// time step j of every window. Column b of each output depends only on
/// column b of the inputs and is bit-identical to an unbatched pass.
BatchGraph forward_graph(Tape& tape, const ModelParams& params, std::span<const Matrix> steps);

/// Splits windows (each D x T, rows already selected) into per-step batches.
std::vector<Matrix> batch_steps(std::span<const Matrix* const> windows);

}  // namespace alerta
