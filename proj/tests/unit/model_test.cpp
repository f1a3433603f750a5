#include <gtest/gtest.h>

#include <cmath>

#include "alerta/errors.hpp"
#include "alerta/model.hpp"
#include "alerta/random.hpp"
#include "alerta/training.hpp"
#include "gradcheck.hpp"

namespace alerta {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

GruCellParams random_cell(std::size_t D, std::size_t U, Rng& rng) {
  return {random_matrix(U, D, rng), random_matrix(U, D, rng), random_matrix(U, D, rng),
          random_matrix(U, U, rng), random_matrix(U, U, rng), random_matrix(U, U, rng),
          random_matrix(U, 1, rng), random_matrix(U, 1, rng), random_matrix(U, 1, rng)};
}

GruCellParams zero_cell(std::size_t D, std::size_t U) {
  return {Matrix(U, D), Matrix(U, D), Matrix(U, D), Matrix(U, U), Matrix(U, U),
          Matrix(U, U), Matrix(U, 1), Matrix(U, 1), Matrix(U, 1)};
}

// Scalar transcription of the four GRU equations.
std::vector<double> scalar_gru(const std::vector<double>& x, const std::vector<double>& h,
                               const GruCellParams& p) {
  const std::size_t U = h.size(), D = x.size();
  auto logistic = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> z(U), r(U), out(U);
  for (std::size_t i = 0; i < U; ++i) {
    double az = p.b_z[i], ar = p.b_r[i];
    for (std::size_t k = 0; k < D; ++k) {
      az += p.W_z(i, k) * x[k];
      ar += p.W_r(i, k) * x[k];
    }
    for (std::size_t k = 0; k < U; ++k) {
      az += p.R_z(i, k) * h[k];
      ar += p.R_r(i, k) * h[k];
    }
    z[i] = logistic(az);
    r[i] = logistic(ar);
  }
  for (std::size_t i = 0; i < U; ++i) {
    double a = p.b_h[i];
    for (std::size_t k = 0; k < D; ++k) a += p.W_h(i, k) * x[k];
    for (std::size_t k = 0; k < U; ++k) a += p.R_h(i, k) * r[k] * h[k];
    out[i] = (1.0 - z[i]) * h[i] + z[i] * std::tanh(a);
  }
  return out;
}

ModelParams random_model(std::size_t D, std::size_t U, std::size_t T, std::uint64_t seed,
                         ModelKind kind = ModelKind::alerta) {
  ModelConfig cfg;
  cfg.input_dim = D;
  cfg.hidden = U;
  cfg.window = T;
  cfg.kind = kind;
  ModelParams p = init_params(cfg, seed);
  Rng rng(seed + 1000);
  for (const auto& n : p.store.names())
    for (double& v : p.store.value(n).values()) v = rng.uniform(-0.8, 0.8);
  return p;
}

TEST(GruStep, ZeroParamsZeroState) {
  const Matrix h = gru_step(Matrix(3, 1, 1.7), Matrix(2, 1), zero_cell(3, 2));
  EXPECT_EQ(h, Matrix(2, 1));
}

TEST(GruStep, ZeroParamsHalveState) {
  const Matrix v = Matrix::from_rows({{0.8}, {-1.4}});
  const Matrix h = gru_step(Matrix(3, 1, 0.3), v, zero_cell(3, 2));
  EXPECT_EQ(h[0], 0.4);
  EXPECT_EQ(h[1], -0.7);
}

TEST(GruStep, MatchesScalarEquations) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const GruCellParams p = random_cell(3, 2, rng);
    const std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
    const std::vector<double> h = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Matrix got = gru_step(Matrix::column(x), Matrix::column(h), p);
    const auto want = scalar_gru(x, h, p);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(got[i], want[i], 1e-14);
  }
}

TEST(GruStep, ShapeMismatch) {
  Rng rng(1);
  EXPECT_THROW(gru_step(Matrix(4, 1), Matrix(2, 1), random_cell(3, 2, rng)), DimensionError);
  EXPECT_THROW(gru_step(Matrix(3, 2), Matrix(2, 1), random_cell(3, 2, rng)), DimensionError);
}

TEST(TdaWeights, SmallCases) {
  EXPECT_EQ(tda_weights(1), std::vector<double>{1.0});
  const auto w = tda_weights(3);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0], 1.0 / 3.0);
  EXPECT_EQ(w[1], 0.5);
  EXPECT_EQ(w[2], 1.0);
  EXPECT_THROW(tda_weights(0), DomainError);
}

TEST(TdaWeights, SumIsHarmonicAndStrictlyIncreasing) {
  for (std::size_t t = 1; t <= 300; ++t) {
    const auto w = tda_weights(t);
    double harmonic = 0.0;
    for (std::size_t k = t; k >= 1; --k) harmonic += 1.0 / static_cast<double>(k);
    double sum = 0.0;
    for (double v : w) sum += v;
    EXPECT_NEAR(sum, harmonic, 1e-12);
    EXPECT_EQ(w.back(), 1.0);
    for (std::size_t i = 1; i < t; ++i) EXPECT_LT(w[i - 1], w[i]);
  }
}

TEST(TdaContext, SingleStateIsPlainStep) {
  Rng rng(5);
  const GruCellParams p = random_cell(3, 2, rng);
  const Matrix x = random_matrix(3, 1, rng), h1 = random_matrix(2, 1, rng);
  const Matrix hs[] = {h1};
  EXPECT_EQ(tda_context(x, hs, p), gru_step(x, h1, p));
}

TEST(TdaContext, ZeroHistoryIsStepFromZero) {
  Rng rng(6);
  const GruCellParams p = random_cell(3, 2, rng);
  const Matrix x = random_matrix(3, 1, rng);
  const std::vector<Matrix> hs(5, Matrix(2, 1));
  EXPECT_EQ(tda_context(x, hs, p), gru_step(x, Matrix(2, 1), p));
}

TEST(TdaContext, MatchesWeightedSumThenCell) {
  for (bool normalize : {false, true}) {
    Rng rng(9);
    const GruCellParams p = random_cell(2, 3, rng);
    const Matrix x = random_matrix(2, 1, rng);
    std::vector<Matrix> hs;
    for (int i = 0; i < 4; ++i) hs.push_back(random_matrix(3, 1, rng));
    std::vector<double> s(3, 0.0);
    double harmonic = 0.0;
    for (std::size_t i = 1; i <= 4; ++i) {
      const double w = 1.0 / static_cast<double>(4 - i + 1);
      harmonic += w;
      for (std::size_t u = 0; u < 3; ++u) s[u] += w * hs[i - 1][u];
    }
    if (normalize)
      for (double& v : s) v /= harmonic;
    const auto want = scalar_gru({x[0], x[1]}, s, p);
    const Matrix got = tda_context(x, hs, p, normalize);
    for (std::size_t u = 0; u < 3; ++u) EXPECT_NEAR(got[u], want[u], 1e-14);
  }
}

TEST(Forward, ZeroParamsGiveHalfProbabilities) {
  ModelConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden = 3;
  cfg.window = 5;
  ModelParams p = init_params(cfg, 1);
  for (const auto& n : p.store.names()) p.store.value(n).fill(0.0);
  Rng rng(2);
  const ForwardTrace t = forward(random_matrix(4, 5, rng), p);
  EXPECT_EQ(t.movement_prob, 0.5);
  EXPECT_EQ(t.volatility_prob, 0.5);
  EXPECT_EQ(t.hidden.cols(), 5u);
}

TEST(Forward, SingleStepWindow) {
  const ModelParams p = random_model(3, 2, 1, 4);
  Rng rng(3);
  const Matrix x = random_matrix(3, 1, rng);
  const ForwardTrace t = forward(x, p);
  ASSERT_EQ(t.hidden.cols(), 1u);
  const GruCellParams cell = GruCellParams::from_store(p.store, "enc");
  const Matrix h1 = gru_step(x, Matrix(2, 1), cell);
  EXPECT_EQ(column_of(t.hidden, 0), h1);
  EXPECT_EQ(t.context, gru_step(x, h1, cell));
}

TEST(Forward, ReproducibleAcrossRuns) {
  const ModelParams a = random_model(4, 3, 6, 11);
  const ModelParams b = random_model(4, 3, 6, 11);
  ASSERT_EQ(a, b);
  Rng rng(12);
  const Matrix x = random_matrix(4, 6, rng);
  const ForwardTrace ta = forward(x, a), tb = forward(x, b);
  EXPECT_EQ(ta.movement_prob, tb.movement_prob);
  EXPECT_EQ(ta.volatility_prob, tb.volatility_prob);
  EXPECT_EQ(ta.hidden, tb.hidden);
}

TEST(Forward, ProbabilitiesStayInOpenInterval) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const ModelParams p = random_model(3, 4, 4, seed);
    Rng rng(seed);
    const ForwardTrace t = forward(random_matrix(3, 4, rng, 50.0), p);
    EXPECT_GT(t.movement_prob, 0.0);
    EXPECT_LT(t.movement_prob, 1.0);
    EXPECT_GT(t.volatility_prob, 0.0);
    EXPECT_LT(t.volatility_prob, 1.0);
  }
}

TEST(Forward, BatchedColumnsMatchSingleWindows) {
  const ModelParams p = random_model(3, 4, 5, 21);
  Rng rng(22);
  std::vector<Matrix> windows;
  for (int i = 0; i < 6; ++i) windows.push_back(random_matrix(3, 5, rng));
  std::vector<const Matrix*> ptrs;
  for (const auto& w : windows) ptrs.push_back(&w);
  Tape tape;
  const BatchGraph g = forward_graph(tape, p, batch_steps(ptrs));
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const ForwardTrace t = forward(windows[b], p);
    EXPECT_EQ(tape.value(g.movement_logit)[b], t.movement_logit);
    EXPECT_EQ(tape.value(g.volatility_logit)[b], t.volatility_logit);
  }
}

TEST(Forward, MaskedRowsAreRemovedNotZeroed) {
  // Model on D=2 reading rows {1, 3} of a 4-row window.
  const ModelParams small = random_model(2, 3, 4, 31);
  Rng rng(32);
  Matrix full = random_matrix(4, 4, rng);
  const std::size_t rows[] = {1, 3};
  const ForwardTrace masked = forward(full, small, rows);
  const ForwardTrace direct = forward(select_rows(full, rows), small);
  EXPECT_EQ(masked.movement_prob, direct.movement_prob);
  EXPECT_EQ(masked.volatility_prob, direct.volatility_prob);
  for (std::size_t j = 0; j < 4; ++j) {
    full(0, j) = 0.0;
    full(2, j) = 1e6;
  }
  const ForwardTrace changed = forward(full, small, rows);
  EXPECT_EQ(changed.movement_prob, masked.movement_prob);
  EXPECT_EQ(changed.volatility_prob, masked.volatility_prob);
}

TEST(Forward, ShapeMismatch) {
  const ModelParams p = random_model(3, 2, 4, 1);
  EXPECT_THROW(forward(Matrix(4, 4), p), DimensionError);
}

TEST(Forward, PlainGruHasNoContext) {
  const ModelParams p = random_model(3, 2, 4, 1, ModelKind::gru);
  EXPECT_EQ(p.store.value("head_m.w").cols(), 2u);
  EXPECT_EQ(p.store.value("head_v.w").cols(), 3u);
  Rng rng(1);
  EXPECT_TRUE(forward(random_matrix(3, 4, rng), p).context.empty());
}

TEST(Init, GlorotBoundsAndZeroBiases) {
  ModelConfig cfg;
  cfg.input_dim = 5;
  cfg.hidden = 7;
  const ModelParams p = init_params(cfg, 3);
  const double a = std::sqrt(6.0 / 12.0);
  for (double v : p.store.value("enc.W_z").values()) EXPECT_LE(std::abs(v), a);
  for (double v : p.store.value("enc.b_h").values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(p.store.value("head_m.w").cols(), 14u);
  EXPECT_EQ(p.store.value("head_v.w").cols(), 15u);
  EXPECT_FALSE(p.store.contains("ctx.W_z"));
  cfg.separate_context_cell = true;
  EXPECT_TRUE(init_params(cfg, 3).store.contains("ctx.W_z"));
}

TEST(Gradients, VolatilityLossReachesMovementHead) {
  const ModelParams p = random_model(3, 3, 4, 41);
  ModelParams work = p;
  Rng rng(42);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix* ptr = &x;
  Tape tape;
  const BatchGraph g = forward_graph(tape, work, batch_steps(std::span<const Matrix* const>(&ptr, 1)));
  const double y[] = {1.0}, w[] = {1.0};
  const Var loss = tape.bce_with_logits(g.volatility_logit, y, w);
  tape.backward(loss, work.store);
  double norm = 0.0;
  for (double v : work.store.grad("head_m.w").values()) norm += std::abs(v);
  EXPECT_GT(norm, 0.0);
}

TEST(Gradients, FullModelMatchesFiniteDifferences) {
  for (bool normalize : {false, true}) {
    for (ModelKind kind : {ModelKind::alerta, ModelKind::gru}) {
      ModelParams p = random_model(4, 3, 5, 51, kind);
      p.config.tda_normalize = normalize;
      Rng rng(52);
      std::vector<WindowedSample> batch(3);
      for (auto& s : batch) s.x = random_matrix(4, 5, rng);
      batch[0].y_m = Movement::up;
      batch[1].y_m = Movement::abstain;
      batch[2].y_m = Movement::down;
      batch[0].y_v = 1;
      std::vector<const WindowedSample*> ptrs;
      std::vector<const Matrix*> xs;
      for (const auto& s : batch) {
        ptrs.push_back(&s);
        xs.push_back(&s.x);
      }
      const auto steps = batch_steps(xs);
      auto build = [&](Tape& tape) {
        const BatchGraph g = forward_graph(tape, p, steps);
        return batch_joint_loss(tape, g, ptrs, 1.0, 0.7, 2.5);
      };
      ParamStore analytic = p.store;
      {
        Tape tape;
        const Var loss = build(tape);
        tape.backward(loss, analytic);
      }
      auto loss = [&] {
        Tape tape;
        return tape.value(build(tape))[0];
      };
      const auto r = testing::check_gradients(p.store, analytic, loss);
      EXPECT_EQ(r.failures, 0u) << r.worst_entry;
    }
  }
}

TEST(Gradients, SeparateContextCellMatchesFiniteDifferences) {
  ModelConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden = 2;
  cfg.window = 3;
  cfg.separate_context_cell = true;
  ModelParams p = init_params(cfg, 61);
  Rng rng(62);
  WindowedSample s;
  s.x = random_matrix(3, 3, rng);
  s.y_m = Movement::up;
  const WindowedSample* ptr = &s;
  const Matrix* xptr = &s.x;
  const auto steps = batch_steps(std::span<const Matrix* const>(&xptr, 1));
  auto build = [&](Tape& tape) {
    const BatchGraph g = forward_graph(tape, p, steps);
    return batch_joint_loss(tape, g, std::span<const WindowedSample* const>(&ptr, 1), 1.0, 1.0, 1.0);
  };
  ParamStore analytic = p.store;
  {
    Tape tape;
    const Var loss = build(tape);
    tape.backward(loss, analytic);
  }
  auto loss = [&] {
    Tape tape;
    return tape.value(build(tape))[0];
  };
  const auto r = testing::check_gradients(p.store, analytic, loss);
  EXPECT_EQ(r.failures, 0u) << r.worst_entry;
}

}  // namespace
}  // namespace alerta
