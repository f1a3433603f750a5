#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "alerta/errors.hpp"
#include "alerta/random.hpp"
#include "alerta/synth.hpp"
#include "alerta/training.hpp"

namespace alerta {
namespace {

DatasetSplit small_split(double flip, std::size_t days = 400, std::uint64_t seed = 5) {
  SynthSpec spec = make_synth_spec(4, seed);
  spec.n_days = days;
  spec.window = 5;
  spec.vol_lag = 3;
  spec.noise_flip = flip;
  DatasetSplit split = chrono_split(window(generate(spec), spec.window).samples, 0.6, 0.2);
  split.columns = columns_from_names(spec.columns);
  return split;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.window = 5;
  cfg.hidden = 4;
  cfg.epochs = 10;
  cfg.batch_size = 16;
  cfg.learning_rate = 5e-3;
  cfg.seed = 7;
  return cfg;
}

ForwardTrace trace_with(double lm, double lv) {
  ForwardTrace t;
  t.movement_logit = lm;
  t.volatility_logit = lv;
  return t;
}

double naive_bce(double z, double y, double pw) {
  const double p = 1.0 / (1.0 + std::exp(-z));
  return -(pw * y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

TEST(JointLoss, Examples) {
  const double ln2 = std::log(2.0);
  EXPECT_NEAR(joint_loss(trace_with(0, 0), Movement::up, 0, 1.0), 2 * ln2, 1e-15);
  EXPECT_NEAR(joint_loss(trace_with(0, 0), Movement::abstain, 1, 1.0), ln2, 1e-15);
  EXPECT_NEAR(joint_loss(trace_with(0, 0), Movement::down, 1, 0.0), ln2, 1e-15);
  EXPECT_NEAR(joint_loss(trace_with(0, 0), Movement::up, 1, 0.5, 3.0), ln2 + 1.5 * ln2, 1e-15);
}

TEST(JointLoss, MatchesNaiveFormula) {
  for (double lm : {-4.0, -0.3, 0.0, 1.2, 6.0}) {
    for (double lv : {-5.0, -1.0, 0.5, 3.0}) {
      for (Movement m : {Movement::down, Movement::up, Movement::abstain}) {
        for (int yv : {0, 1}) {
          const double lambda = 0.7, pw = 2.5;
          double want = lambda * naive_bce(lv, yv, pw);
          if (m != Movement::abstain) want += naive_bce(lm, m == Movement::up ? 1.0 : 0.0, 1.0);
          EXPECT_NEAR(joint_loss(trace_with(lm, lv), m, yv, lambda, pw), want, 1e-12);
        }
      }
    }
  }
}

TEST(JointLoss, FiniteForExtremeLogits) {
  for (double z : {-500.0, -40.0, 40.0, 500.0}) {
    const double l = joint_loss(trace_with(z, -z), Movement::up, 1, 1.0, 4.0);
    EXPECT_TRUE(std::isfinite(l));
    // softplus(-z) + 4 softplus(z) tends to max(-z, 0) + 4 max(z, 0).
    EXPECT_NEAR(l, std::max(-z, 0.0) + 4.0 * std::max(z, 0.0), 1e-6);
  }
}

TEST(Train, LossDecreasesOnSeparableData) {
  TrainConfig cfg = small_config();
  cfg.lambda = 0.0;
  cfg.patience = 100;
  const TrainResult r = train(small_split(0.0), cfg);
  ASSERT_EQ(r.report.epochs.size(), 10u);
  for (std::size_t e = 1; e < r.report.epochs.size(); ++e) {
    EXPECT_LT(r.report.epochs[e].train.movement, r.report.epochs[e - 1].train.movement)
        << "epoch " << e + 1;
  }
}

TEST(Train, SameSeedIsBitIdentical) {
  const DatasetSplit split = small_split(0.1);
  const TrainResult a = train(split, small_config());
  const TrainResult b = train(split, small_config());
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(train_report_to_json(a.report, small_config()),
            train_report_to_json(b.report, small_config()));
  TrainConfig other = small_config();
  other.seed = 8;
  EXPECT_NE(train(split, other).params, a.params);
}

TEST(Train, ZeroLearningRateKeepsInitialParameters) {
  TrainConfig cfg = small_config();
  cfg.learning_rate = 0.0;
  cfg.epochs = 2;
  const DatasetSplit split = small_split(0.1);
  const TrainResult r = train(split, cfg);
  ModelConfig mcfg = r.params.config;
  EXPECT_EQ(r.params.store, init_params(mcfg, derive_seed(cfg.seed, 0)).store);
}

TEST(Train, AblationRestrictsInputs) {
  TrainConfig cfg = small_config();
  cfg.epochs = 1;
  cfg.ablation = Ablation::p;
  const TrainResult r = train(small_split(0.1), cfg);
  EXPECT_EQ(r.params.config.feature_names, std::vector<std::string>{"px_0"});
  EXPECT_EQ(r.params.config.input_dim, 1u);
}

TEST(Train, TwoStageFreezesMovementSide) {
  TrainConfig cfg = small_config();
  cfg.epochs = 3;
  cfg.two_stage = true;
  const TrainResult r = train(small_split(0.1), cfg);
  ASSERT_EQ(r.report.epochs.size(), 6u);
  EXPECT_EQ(r.report.epochs.front().stage, 1);
  EXPECT_EQ(r.report.epochs.back().stage, 2);

  // Stage two alone must reproduce the movement side of stage one.
  TrainConfig only_movement = cfg;
  only_movement.two_stage = false;
  only_movement.lambda = 0.0;
  const TrainResult m = train(small_split(0.1), only_movement);
  for (const auto& n : movement_param_names(r.params))
    EXPECT_EQ(r.params.store.value(n), m.params.store.value(n)) << n;
}

TEST(Train, RejectsMismatchedWindow) {
  TrainConfig cfg = small_config();
  cfg.window = 6;
  EXPECT_THROW(train(small_split(0.1), cfg), ConfigError);
}

TEST(Train, NonFiniteInputIsReported) {
  DatasetSplit split = small_split(0.1);
  split.train[3].x(0, 0) = std::nan("");
  try {
    train(split, small_config());
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

Prediction pred(Movement m, int v, double pm, double pv) { return {m, v, pm, pv}; }

TEST(Score, PerfectPredictions) {
  const std::vector<Prediction> p = {pred(Movement::up, 1, 0.9, 0.8), pred(Movement::down, 0, 0.1, 0.3),
                                     pred(Movement::up, 0, 0.7, 0.2), pred(Movement::down, 1, 0.4, 0.6)};
  const EvalReport r = score_predictions(p);
  EXPECT_EQ(*r.movement.accuracy, 1.0);
  EXPECT_EQ(*r.movement.mcc, 1.0);
  EXPECT_EQ(*r.movement.auc, 1.0);
  EXPECT_EQ(*r.volatility.accuracy, 1.0);
  EXPECT_EQ(*r.volatility.auc, 1.0);
}

TEST(Score, ConstantHalfProbability) {
  const std::vector<Prediction> p = {pred(Movement::up, 1, 0.5, 0.5), pred(Movement::down, 0, 0.5, 0.5),
                                     pred(Movement::up, 0, 0.5, 0.5)};
  const EvalReport r = score_predictions(p);
  EXPECT_EQ(*r.movement.mcc, 0.0);
  EXPECT_EQ(*r.movement.auc, 0.5);
  // 0.5 >= threshold predicts class 1 everywhere.
  EXPECT_NEAR(*r.movement.accuracy, 2.0 / 3.0, 1e-15);
}

TEST(Score, AllAbstainLeavesMovementUndefined) {
  const std::vector<Prediction> p = {pred(Movement::abstain, 1, 0.9, 0.8),
                                     pred(Movement::abstain, 0, 0.1, 0.3)};
  const EvalReport r = score_predictions(p);
  EXPECT_EQ(r.abstained, 2u);
  EXPECT_EQ(r.movement.scored, 0u);
  EXPECT_FALSE(r.movement.accuracy.has_value());
  EXPECT_FALSE(r.movement.auc.has_value());
  EXPECT_EQ(r.volatility.scored, 2u);
  const std::string json = eval_report_to_json(r);
  EXPECT_NE(json.find("null"), std::string::npos);
}

TEST(Evaluate, RejectsDatasetWithoutModelColumns) {
  const DatasetSplit split = small_split(0.1);
  TrainConfig cfg = small_config();
  cfg.epochs = 1;
  const TrainResult r = train(split, cfg);
  std::vector<FeatureColumn> other = split.columns;
  other[1].name = "renamed";
  try {
    evaluate(r.params, split.test, other);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("D=4"), std::string::npos) << e.what();
  }
}

TEST(Config, JsonRoundTrip) {
  TrainConfig cfg = small_config();
  cfg.ablation = Ablation::wo_m;
  cfg.model = ModelKind::gru;
  cfg.two_stage = true;
  cfg.lambda = 0.25;
  EXPECT_EQ(train_config_from_json(train_config_to_json(cfg)), cfg);
  const TrainConfig partial = train_config_from_json(R"({"hidden": 9, "ablation": "s"})", cfg);
  EXPECT_EQ(partial.hidden, 9u);
  EXPECT_EQ(partial.ablation, Ablation::s);
  EXPECT_EQ(partial.lambda, 0.25);
}

TEST(Config, InvalidValuesRejected) {
  EXPECT_THROW(train_config_from_json(R"({"hiden": 9})"), ConfigError);
  EXPECT_THROW(train_config_from_json(R"({"hidden": "x"})"), ConfigError);
  EXPECT_THROW(train_config_from_json("[1"), ConfigError);
  EXPECT_THROW(ablation_from_string("q"), ConfigError);
  TrainConfig cfg;
  cfg.lambda = -1.0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.two_stage = true;
  cfg.lambda = 0.0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Ablation, ColumnSelection) {
  const auto cols = columns_from_names(default_schema());
  EXPECT_EQ(ablation_columns(cols, Ablation::full).size(), cols.size());
  for (const auto& n : ablation_columns(cols, Ablation::s))
    EXPECT_EQ(infer_group(n), FeatureGroup::sentiment) << n;
  for (const auto& n : ablation_columns(cols, Ablation::wo_m))
    EXPECT_NE(infer_group(n), FeatureGroup::macro) << n;
  EXPECT_EQ(ablation_from_string("wo-m"), Ablation::wo_m);
  EXPECT_EQ(to_string(Ablation::wo_m), "wo-m");
  const auto only_macro = columns_from_names(std::vector<std::string>{"macro_cpi"});
  EXPECT_THROW(ablation_columns(only_macro, Ablation::p), ConfigError);
}

}  // namespace
}  // namespace alerta
