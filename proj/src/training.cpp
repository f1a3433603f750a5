#include "alerta/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>

#include "alerta/dataset_io.hpp"
#include "alerta/errors.hpp"
#include "alerta/random.hpp"

namespace alerta {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kInferenceChunk = 512;

double target_of(Movement m) { return m == Movement::up ? 1.0 : 0.0; }

std::string config_brief(const ModelConfig& cfg) {
  return "{D=" + std::to_string(cfg.input_dim) + ", U=" + std::to_string(cfg.hidden) +
         ", T=" + std::to_string(cfg.window) + ", model=" + to_string(cfg.kind) + "}";
}

std::vector<std::size_t> model_rows(const ModelParams& params,
                                    const std::vector<FeatureColumn>& columns) {
  const auto& cfg = params.config;
  if (cfg.feature_names.empty()) {
    if (cfg.input_dim != columns.size()) {
      throw DimensionError("model expects " + std::to_string(cfg.input_dim) +
                           " features, data has " + std::to_string(columns.size()));
    }
    return {};
  }
  try {
    return rows_for_names(columns, cfg.feature_names);
  } catch (const DimensionError& e) {
    throw DimensionError(std::string(e.what()) + "; model config " + config_brief(cfg));
  }
}

std::vector<Matrix> steps_for(std::span<const WindowedSample* const> batch,
                              std::span<const std::size_t> rows) {
  std::vector<Matrix> selected;
  std::vector<const Matrix*> ptrs;
  selected.reserve(batch.size());
  ptrs.reserve(batch.size());
  for (const auto* s : batch) {
    if (rows.empty()) {
      ptrs.push_back(&s->x);
    } else {
      selected.push_back(select_rows(s->x, rows));
      ptrs.push_back(&selected.back());
    }
  }
  return batch_steps(ptrs);
}

double volatility_pos_weight(const std::vector<WindowedSample>& train, bool balance) {
  if (!balance) return 1.0;
  std::size_t pos = 0;
  for (const auto& s : train) pos += s.y_v != 0;
  const std::size_t neg = train.size() - pos;
  if (pos == 0 || neg == 0) return 1.0;
  return static_cast<double>(neg) / static_cast<double>(pos);
}

std::string first_non_finite(const ParamStore& store) {
  for (const auto& name : store.names()) {
    if (!store.value(name).all_finite()) return name + " (value)";
    if (!store.grad(name).all_finite()) return name + " (gradient)";
  }
  return "none (non-finite loss with finite parameters)";
}

}  // namespace

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::p: return "p";
    case Ablation::s: return "s";
    case Ablation::wo_m: return "wo-m";
  }
  return "full";
}

Ablation ablation_from_string(const std::string& s) {
  if (s == "full") return Ablation::full;
  if (s == "p") return Ablation::p;
  if (s == "s") return Ablation::s;
  if (s == "wo-m" || s == "wo_m") return Ablation::wo_m;
  throw ConfigError("unknown ablation mode '" + s + "' (expected full, p, s or wo-m)");
}

std::vector<std::string> ablation_columns(const std::vector<FeatureColumn>& columns,
                                          Ablation mode) {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    bool keep = false;
    switch (mode) {
      case Ablation::full: keep = true; break;
      case Ablation::p: keep = c.group == FeatureGroup::price; break;
      case Ablation::s: keep = c.group == FeatureGroup::sentiment; break;
      case Ablation::wo_m: keep = c.group != FeatureGroup::macro; break;
    }
    if (keep) out.push_back(c.name);
  }
  if (out.empty()) {
    throw ConfigError("ablation mode '" + to_string(mode) + "' selects no feature columns");
  }
  return out;
}

void validate(const TrainConfig& cfg) {
  auto fail = [](const std::string& m) { throw ConfigError("train config: " + m); };
  if (cfg.window < 1) fail("window must be >= 1");
  if (cfg.hidden < 1) fail("hidden must be >= 1");
  if (cfg.epochs < 1) fail("epochs must be >= 1");
  if (cfg.batch_size < 1) fail("batch_size must be >= 1");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    fail("learning_rate must be finite and nonnegative");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    fail("adam betas must lie in [0, 1)");
  if (!(cfg.adam_epsilon > 0.0)) fail("adam_epsilon must be positive");
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) fail("lambda must be >= 0");
  if (!(cfg.clip_norm > 0.0)) fail("clip_norm must be positive");
  if (cfg.patience < 1) fail("patience must be >= 1");
  if (cfg.two_stage && cfg.lambda == 0.0) fail("two_stage training needs lambda > 0");
}

std::string train_config_to_json(const TrainConfig& c) {
  Json j;
  j["window"] = c.window;
  j["hidden"] = c.hidden;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  j["seed"] = c.seed;
  j["lambda"] = c.lambda;
  j["ablation"] = to_string(c.ablation);
  j["model"] = to_string(c.model);
  j["tda_normalize"] = c.tda_normalize;
  j["separate_context_cell"] = c.separate_context_cell;
  j["two_stage"] = c.two_stage;
  j["patience"] = c.patience;
  j["clip_norm"] = c.clip_norm;
  j["balance_volatility"] = c.balance_volatility;
  return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& json_text, TrainConfig c) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "window") c.window = v.get<std::size_t>();
      else if (key == "hidden") c.hidden = v.get<std::size_t>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "beta1") c.beta1 = v.get<double>();
      else if (key == "beta2") c.beta2 = v.get<double>();
      else if (key == "adam_epsilon") c.adam_epsilon = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "ablation") c.ablation = ablation_from_string(v.get<std::string>());
      else if (key == "model") c.model = model_kind_from_string(v.get<std::string>());
      else if (key == "tda_normalize") c.tda_normalize = v.get<bool>();
      else if (key == "separate_context_cell") c.separate_context_cell = v.get<bool>();
      else if (key == "two_stage") c.two_stage = v.get<bool>();
      else if (key == "patience") c.patience = v.get<std::size_t>();
      else if (key == "clip_norm") c.clip_norm = v.get<double>();
      else if (key == "balance_volatility") c.balance_volatility = v.get<bool>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file has a value of the wrong type: ") + e.what());
  }
  return c;
}

double joint_loss(const ForwardTrace& trace, Movement y_m, int y_v, double lambda,
                  double pos_weight) {
  double loss = 0.0;
  if (y_m != Movement::abstain) loss += bce_with_logits(trace.movement_logit, target_of(y_m));
  return loss + lambda * bce_with_logits(trace.volatility_logit, y_v, pos_weight);
}

Var batch_joint_loss(Tape& tape, const BatchGraph& graph,
                     std::span<const WindowedSample* const> batch, double movement_weight,
                     double lambda, double pos_weight) {
  const std::size_t B = batch.size();
  const double inv = 1.0 / static_cast<double>(B);
  std::vector<double> ym(B), wm(B), yv(B), wv(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto* s = batch[b];
    ym[b] = target_of(s->y_m);
    wm[b] = s->y_m == Movement::abstain ? 0.0 : movement_weight * inv;
    yv[b] = s->y_v;
    wv[b] = lambda * inv;
  }
  const Var lm = tape.bce_with_logits(graph.movement_logit, ym, wm);
  if (lambda == 0.0) return lm;
  const Var lv = tape.bce_with_logits(graph.volatility_logit, yv, wv, pos_weight);
  if (movement_weight == 0.0) return lv;
  return tape.add(lm, lv);
}

double clip_global_norm(ParamStore& store, std::span<const std::string> names, double max_norm) {
  double sq = 0.0;
  for (const auto& n : names)
    for (double g : store.grad(n).values()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto& n : names)
      for (double& g : store.grad(n).values()) g *= s;
  }
  return norm;
}

void AdamOptimizer::step(ParamStore& store, std::span<const std::string> names) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& name : names) {
    Matrix& p = store.value(name);
    const Matrix& g = store.grad(name);
    auto [mit, m_new] = m_.try_emplace(name, p.rows(), p.cols());
    auto [vit, v_new] = v_.try_emplace(name, p.rows(), p.cols());
    Matrix& m = mit->second;
    Matrix& v = vit->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

std::vector<Prediction> predict(const ModelParams& params, std::span<const WindowedSample> samples,
                                std::span<const std::size_t> rows) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += kInferenceChunk) {
    const std::size_t end = std::min(samples.size(), start + kInferenceChunk);
    std::vector<const WindowedSample*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&samples[i]);
    const auto steps = steps_for(batch, rows);
    Tape tape;
    const BatchGraph g = forward_graph(tape, params, steps);
    const Matrix& pm = tape.value(g.movement_prob);
    const Matrix& lv = tape.value(g.volatility_logit);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      out.push_back({batch[b]->y_m, batch[b]->y_v, pm[b], sigmoid(lv[b])});
    }
  }
  return out;
}

LossParts evaluate_loss(const ModelParams& params, std::span<const WindowedSample> samples,
                        std::span<const std::size_t> rows, double lambda, double pos_weight) {
  LossParts parts;
  if (samples.empty()) return parts;
  std::size_t scored_m = 0;
  double sum_m = 0.0, sum_v = 0.0;
  for (std::size_t start = 0; start < samples.size(); start += kInferenceChunk) {
    const std::size_t end = std::min(samples.size(), start + kInferenceChunk);
    std::vector<const WindowedSample*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&samples[i]);
    Tape tape;
    const BatchGraph g = forward_graph(tape, params, steps_for(batch, rows));
    const Matrix& lm = tape.value(g.movement_logit);
    const Matrix& lv = tape.value(g.volatility_logit);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (batch[b]->y_m != Movement::abstain) {
        sum_m += bce_with_logits(lm[b], target_of(batch[b]->y_m));
        ++scored_m;
      }
      sum_v += bce_with_logits(lv[b], batch[b]->y_v, pos_weight);
    }
  }
  const double n = static_cast<double>(samples.size());
  parts.movement = scored_m ? sum_m / static_cast<double>(scored_m) : 0.0;
  parts.volatility = sum_v / n;
  parts.total = (sum_m + lambda * sum_v) / n;
  return parts;
}

TrainResult train(const DatasetSplit& split, const TrainConfig& cfg) {
  validate(cfg);
  if (split.train.empty()) throw ConfigError("training split is empty");
  const auto t0 = std::chrono::steady_clock::now();

  if (split.train.front().x.cols() != cfg.window) {
    throw ConfigError("train config window " + std::to_string(cfg.window) +
                      " does not match dataset window " +
                      std::to_string(split.train.front().x.cols()));
  }

  ModelConfig mcfg;
  mcfg.feature_names = ablation_columns(split.columns, cfg.ablation);
  mcfg.input_dim = mcfg.feature_names.size();
  mcfg.hidden = cfg.hidden;
  mcfg.window = cfg.window;
  mcfg.kind = cfg.model;
  mcfg.tda_normalize = cfg.tda_normalize;
  mcfg.separate_context_cell = cfg.separate_context_cell;

  TrainResult result{init_params(mcfg, derive_seed(cfg.seed, 0)), {}};
  ModelParams& params = result.params;
  TrainReport& report = result.report;
  const auto rows = rows_for_names(split.columns, mcfg.feature_names);
  const bool all_rows = rows.size() == split.columns.size() &&
                        std::is_sorted(rows.begin(), rows.end());
  const std::vector<std::size_t> row_sel = all_rows ? std::vector<std::size_t>{} : rows;

  report.pos_weight = volatility_pos_weight(split.train, cfg.balance_volatility);
  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(split.train.size());

  struct Stage {
    int id;
    std::vector<std::string> trainable;
    double movement_weight;
    double lambda;
  };
  std::vector<Stage> stages;
  if (cfg.two_stage) {
    stages.push_back({1, movement_param_names(params), 1.0, 0.0});
    stages.push_back({2, volatility_param_names(params), 0.0, cfg.lambda});
  } else {
    stages.push_back({1, params.store.names(), 1.0, cfg.lambda});
  }

  std::size_t global_epoch = 0;
  for (const Stage& stage : stages) {
    AdamOptimizer adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon);
    ModelParams best = params;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    auto monitored = [&](const LossParts& l) {
      return stage.movement_weight == 0.0 ? cfg.lambda * l.volatility
                                          : (stage.lambda == 0.0 ? l.movement : l.total);
    };

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      ++global_epoch;
      std::iota(order.begin(), order.end(), 0);
      shuffle_rng.shuffle(order);

      double sum_m = 0.0, sum_v = 0.0;
      std::size_t scored_m = 0;
      for (std::size_t start = 0, batch_no = 0; start < order.size();
           start += cfg.batch_size, ++batch_no) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        std::vector<const WindowedSample*> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(&split.train[order[i]]);

        Tape tape;
        const BatchGraph g = forward_graph(tape, params, steps_for(batch, row_sel));
        const Var loss = batch_joint_loss(tape, g, batch, stage.movement_weight, stage.lambda,
                                          report.pos_weight);
        const double value = tape.value(loss)[0];
        const Matrix& lm = tape.value(g.movement_logit);
        const Matrix& lv = tape.value(g.volatility_logit);
        for (std::size_t b = 0; b < batch.size(); ++b) {
          if (batch[b]->y_m != Movement::abstain) {
            sum_m += bce_with_logits(lm[b], target_of(batch[b]->y_m));
            ++scored_m;
          }
          sum_v += bce_with_logits(lv[b], batch[b]->y_v, report.pos_weight);
        }
        tape.backward(loss, params.store);
        if (!std::isfinite(value)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(global_epoch) +
                              ", batch " + std::to_string(batch_no) +
                              "; first offending parameter: " + first_non_finite(params.store));
        }
        clip_global_norm(params.store, stage.trainable, cfg.clip_norm);
        adam.step(params.store, stage.trainable);
        for (const auto& n : stage.trainable) {
          if (!params.store.value(n).all_finite()) {
            throw TrainingError("non-finite parameter after update at epoch " +
                                std::to_string(global_epoch) + ", batch " +
                                std::to_string(batch_no) + "; first offending parameter: " + n);
          }
        }
      }

      EpochRecord rec;
      rec.epoch = global_epoch;
      rec.stage = stage.id;
      // Running means over the epoch, taken before each batch's update.
      const double n = static_cast<double>(split.train.size());
      rec.train.movement = scored_m ? sum_m / static_cast<double>(scored_m) : 0.0;
      rec.train.volatility = sum_v / n;
      rec.train.total = (sum_m + cfg.lambda * sum_v) / n;
      rec.validation = split.validation.empty()
                           ? rec.train
                           : evaluate_loss(params, split.validation, row_sel, cfg.lambda,
                                           report.pos_weight);
      report.epochs.push_back(rec);

      const double current = monitored(rec.validation);
      if (current < best_loss) {
        best_loss = current;
        best = params;
        report.best_epoch = global_epoch;
        report.best_validation_loss = rec.validation.total;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
    params = best;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

EvalReport score_predictions(std::span<const Prediction> predictions, double threshold) {
  EvalReport r;
  r.samples = predictions.size();
  r.threshold = threshold;
  std::vector<int> pm, am, pv, av;
  std::vector<double> sm, sv;
  for (const auto& p : predictions) {
    if (p.y_m == Movement::abstain) {
      ++r.abstained;
    } else {
      pm.push_back(p.movement_prob >= threshold ? 1 : 0);
      am.push_back(p.y_m == Movement::up ? 1 : 0);
      sm.push_back(p.movement_prob);
    }
    pv.push_back(p.volatility_prob >= threshold ? 1 : 0);
    av.push_back(p.y_v != 0 ? 1 : 0);
    sv.push_back(p.volatility_prob);
  }
  auto fill = [](TaskMetrics& t, const std::vector<int>& pred, const std::vector<int>& act,
                 const std::vector<double>& scores) {
    t.scored = act.size();
    t.counts = confusion(pred, act);
    t.accuracy = accuracy(t.counts);
    if (t.scored > 0) t.mcc = mcc(t.counts);
    t.auc = auc(scores, act);
  };
  fill(r.movement, pm, am, sm);
  fill(r.volatility, pv, av, sv);
  return r;
}

EvalReport evaluate(const ModelParams& params, std::span<const WindowedSample> samples,
                    const std::vector<FeatureColumn>& columns, double threshold) {
  if (samples.empty()) throw ConfigError("evaluate: no samples");
  validate_params(params);
  const auto rows = model_rows(params, columns);
  const auto preds = predict(params, samples, rows);
  return score_predictions(preds, threshold);
}

namespace {

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json task_json(const TaskMetrics& t) {
  Json j;
  j["scored"] = t.scored;
  j["tp"] = t.counts.tp;
  j["tn"] = t.counts.tn;
  j["fp"] = t.counts.fp;
  j["fn"] = t.counts.fn;
  j["accuracy"] = optional_json(t.accuracy);
  j["mcc"] = optional_json(t.mcc);
  j["auc"] = optional_json(t.auc);
  return j;
}

Json loss_json(const LossParts& l) {
  return {{"movement", l.movement}, {"volatility", l.volatility}, {"total", l.total}};
}

}  // namespace

std::string eval_report_to_json(const EvalReport& r) {
  Json j;
  j["samples"] = r.samples;
  j["abstained"] = r.abstained;
  j["threshold"] = r.threshold;
  j["movement"] = task_json(r.movement);
  j["volatility"] = task_json(r.volatility);
  j["conventions"] = {{"mcc_zero_denominator", 0.0},
                      {"undefined_metric", nullptr},
                      {"auc", "exact rank-sum, ties count one half"},
                      {"movement_scope", "non-abstain samples only"}};
  return j.dump(2);
}

std::string train_report_to_json(const TrainReport& r, const TrainConfig& cfg) {
  Json j;
  j["config"] = Json::parse(train_config_to_json(cfg));
  j["pos_weight"] = r.pos_weight;
  j["best_epoch"] = r.best_epoch;
  j["best_validation_loss"] = r.best_validation_loss;
  j["epochs_run"] = r.epochs.size();
  j["checkpoint"] = r.checkpoint_path;
  auto& epochs = j["epochs"] = Json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"stage", e.stage},
                      {"train", loss_json(e.train)},
                      {"validation", loss_json(e.validation)}});
  }
  return j.dump(2);
}

}  // namespace alerta
