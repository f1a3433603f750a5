#include <gtest/gtest.h>

#include <cmath>

#include "alerta/errors.hpp"
#include "alerta/random.hpp"
#include "alerta/tape.hpp"
#include "gradcheck.hpp"

namespace alerta {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

TEST(Tape, LinearMapGradientIsOnesOuterInput) {
  ParamStore store;
  store.add("W", Matrix::from_rows({{0.5, -1.0, 2.0}, {1.5, 0.25, -0.75}}));
  const Matrix x = Matrix::from_rows({{3.0}, {-2.0}, {0.5}});
  Tape tape;
  const Var loss = tape.sum(tape.matmul(tape.param(store, "W"), tape.constant(x)));
  tape.backward(loss, store);
  const Matrix& g = store.grad("W");
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(g(i, k), x[k]);
}

TEST(Tape, UnusedParameterGetsExactZero) {
  ParamStore store;
  store.add("W", Matrix(2, 2, 3.0));
  store.add("v", Matrix(2, 1, 1.0));
  store.grad("W").fill(42.0);  // stale value from an earlier step
  Tape tape;
  const Var loss = tape.sum(tape.tanh(tape.param(store, "v")));
  tape.backward(loss, store);
  for (double g : store.grad("W").values()) EXPECT_EQ(g, 0.0);
  EXPECT_NE(store.grad("v")[0], 0.0);
}

TEST(Tape, BackwardBeforeForwardIsUsageError) {
  ParamStore store;
  Tape tape;
  EXPECT_THROW(tape.backward(Var{0}, store), UsageError);
}

TEST(Tape, BackwardTwiceIsUsageError) {
  ParamStore store;
  store.add("a", Matrix(1, 1, 2.0));
  Tape tape;
  const Var loss = tape.sum(tape.param(store, "a"));
  tape.backward(loss, store);
  EXPECT_THROW(tape.backward(loss, store), UsageError);
}

TEST(Tape, NonScalarLossIsRejected) {
  ParamStore store;
  store.add("a", Matrix(2, 1, 2.0));
  Tape tape;
  const Var v = tape.param(store, "a");
  EXPECT_THROW(tape.backward(v, store), UsageError);
}

TEST(Tape, AddColumnChecksBiasShape) {
  Tape tape;
  const Var m = tape.constant(Matrix(3, 4));
  EXPECT_THROW(tape.add_column(m, tape.constant(Matrix(2, 1))), DimensionError);
  EXPECT_THROW(tape.add_column(m, tape.constant(Matrix(3, 2))), DimensionError);
}

TEST(Tape, BceMatchesClosedForms) {
  EXPECT_NEAR(bce_with_logits(0.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_with_logits(0.0, 0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_with_logits(0.0, 1.0, 3.0), 3.0 * std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isfinite(bce_with_logits(500.0, 0.0)));
  EXPECT_TRUE(std::isfinite(bce_with_logits(-500.0, 1.0)));
  EXPECT_NEAR(bce_with_logits(-500.0, 1.0), 500.0, 1e-9);
}

// Every tape op in one scalar composition, checked against finite differences.
TEST(Tape, RandomCompositionsMatchFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    ParamStore store;
    store.add("A", random_matrix(3, 4, rng));
    store.add("B", random_matrix(4, 2, rng));
    store.add("bias", random_matrix(3, 1, rng));
    store.add("C", random_matrix(3, 2, rng));
    store.add("head", random_matrix(1, 6, rng));
    const std::vector<double> targets = {1.0, 0.0};
    const std::vector<double> weights = {0.7, 1.3};
    const double pw = 1.0 + rng.uniform();

    auto build = [&](Tape& tape) {
      const Var a = tape.param(store, "A");
      const Var b = tape.param(store, "B");
      const Var ab = tape.add_column(tape.matmul(a, b), tape.param(store, "bias"));
      const Var s = tape.sigmoid(ab);
      const Var t = tape.tanh(tape.sub(ab, tape.param(store, "C")));
      const Var mix = tape.add(tape.mul(tape.one_minus(s), t), tape.scale(tape.mul(s, s), 0.3));
      const Var parts[] = {mix, tape.param(store, "C")};
      const Var stacked = tape.concat_rows(parts);
      const Var logits = tape.matmul(tape.param(store, "head"), stacked);
      const Var bce = tape.bce_with_logits(logits, targets, weights, pw);
      return tape.add(bce, tape.scale(tape.sum(mix), 0.1));
    };

    ParamStore analytic = store;
    {
      Tape tape;
      const Var loss = build(tape);
      tape.backward(loss, analytic);
    }
    auto loss = [&] {
      Tape tape;
      return tape.value(build(tape))[0];
    };
    const auto r = testing::check_gradients(store, analytic, loss);
    EXPECT_EQ(r.failures, 0u) << "seed " << seed << ": " << r.worst_entry;
    EXPECT_GT(r.checked, 0u);
  }
}

TEST(ParamStore, DuplicateNamesRejected) {
  ParamStore store;
  store.add("w", Matrix(1, 1));
  EXPECT_THROW(store.add("w", Matrix(2, 2)), UsageError);
  EXPECT_THROW(store.value("missing"), UsageError);
  EXPECT_EQ(store.grad("w").rows(), 1u);
}

}  // namespace
}  // namespace alerta
