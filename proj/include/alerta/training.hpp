#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alerta/data_pipeline.hpp"
#include "alerta/metrics.hpp"
#include "alerta/model.hpp"

namespace alerta {

/// Feature subsets compared in the ablation study.
///   full: every column; p: price columns; s: sentiment columns;
///   wo_m: every column except macro.
enum class Ablation { full, p, s, wo_m };

std::string to_string(Ablation a);
/// Accepts full, p, s, wo-m (and wo_m).
Ablation ablation_from_string(const std::string& s);

/// Column names kept by an ablation mode, in dataset order. Throws ConfigError
/// if the mode selects nothing.
std::vector<std::string> ablation_columns(const std::vector<FeatureColumn>& columns, Ablation mode);

struct TrainConfig {
  std::size_t window = 10;
  std::size_t hidden = 32;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 42;
  /// Weight of the volatility loss.
  double lambda = 1.0;
  Ablation ablation = Ablation::full;
  ModelKind model = ModelKind::alerta;
  bool tda_normalize = false;
  bool separate_context_cell = false;
  bool two_stage = false;
  std::size_t patience = 20;
  double clip_norm = 5.0;
  /// Positive-class weight N_neg / N_pos in the volatility loss.
  bool balance_volatility = true;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws ConfigError on any invariant violation.
void validate(const TrainConfig& cfg);

std::string train_config_to_json(const TrainConfig& cfg);
/// Overlays keys present in `json_text` onto `base`; unknown keys are errors.
TrainConfig train_config_from_json(const std::string& json_text, TrainConfig base = {});

/// BCE(logit_m, y_m) [y_m != abstain] + lambda * BCE_pw(logit_v, y_v).
double joint_loss(const ForwardTrace& trace, Movement y_m, int y_v, double lambda,
                  double pos_weight = 1.0);

/// Mean joint loss over a batch, recorded on `tape`. Returns the 1x1 loss.
Var batch_joint_loss(Tape& tape, const BatchGraph& graph, std::span<const WindowedSample* const> batch,
                     double movement_weight, double lambda, double pos_weight);

/// Scales every listed gradient by min(1, max_norm / ||g||_2). Returns the
/// norm before clipping.
double clip_global_norm(ParamStore& store, std::span<const std::string> names, double max_norm);

class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double beta1, double beta2, double epsilon)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  /// One bias-corrected Adam update of the listed parameters.
  void step(ParamStore& store, std::span<const std::string> names);
  std::uint64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::map<std::string, Matrix> m_, v_;
};

struct LossParts {
  double movement = 0.0;    // mean over non-abstain samples
  double volatility = 0.0;  // mean over all samples (with positive weight)
  double total = 0.0;       // mean joint loss
};

struct EpochRecord {
  std::size_t epoch = 0;
  int stage = 1;
  LossParts train;
  LossParts validation;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0.0;
  double pos_weight = 1.0;
  std::string checkpoint_path;
  /// Not serialized with the report, so reports stay byte-reproducible.
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

/// Seeded mini-batch Adam on the joint objective, keeping the parameters with
/// the lowest validation loss. Throws TrainingError on a non-finite loss.
TrainResult train(const DatasetSplit& split, const TrainConfig& cfg);

/// Loss components of `params` over a sample set.
LossParts evaluate_loss(const ModelParams& params, std::span<const WindowedSample> samples,
                        std::span<const std::size_t> rows, double lambda, double pos_weight);

struct Prediction {
  Movement y_m = Movement::abstain;
  int y_v = 0;
  double movement_prob = 0.5;
  double volatility_prob = 0.5;
};

/// Batched inference. `rows` selects dataset rows (all when empty).
std::vector<Prediction> predict(const ModelParams& params, std::span<const WindowedSample> samples,
                                std::span<const std::size_t> rows);

struct TaskMetrics {
  std::size_t scored = 0;
  ConfusionCounts counts;
  std::optional<double> accuracy;
  std::optional<double> mcc;
  std::optional<double> auc;
};

struct EvalReport {
  std::size_t samples = 0;
  std::size_t abstained = 0;
  double threshold = 0.5;
  TaskMetrics movement;
  TaskMetrics volatility;
};

/// Metrics from scored predictions. Movement ignores abstain samples; a
/// probability >= threshold predicts class 1.
EvalReport score_predictions(std::span<const Prediction> predictions, double threshold = 0.5);

/// Predict + score. Feature rows come from params.config.feature_names
/// resolved against `columns`.
EvalReport evaluate(const ModelParams& params, std::span<const WindowedSample> samples,
                    const std::vector<FeatureColumn>& columns, double threshold = 0.5);

std::string eval_report_to_json(const EvalReport& report);
std::string train_report_to_json(const TrainReport& report, const TrainConfig& cfg);

}  // namespace alerta
