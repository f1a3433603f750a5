#include "alerta/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "alerta/checkpoint.hpp"
#include "alerta/dataset_io.hpp"
#include "alerta/errors.hpp"
#include "alerta/random.hpp"
#include "alerta/synth.hpp"
#include "alerta/training.hpp"

namespace alerta {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw ParseError("cannot write '" + p.string() + "'");
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Provenance record for one command. The run id depends only on the command,
// the resolved config and the input contents, so artifacts that embed it stay
// reproducible; timestamps and paths live only in the manifest file.
class RunManifest {
 public:
  RunManifest(std::string command, const fs::path& out_dir)
      : command_(std::move(command)), out_dir_(out_dir), started_(utc_now()) {}

  void set_config(Json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  void add_input(const fs::path& p) {
    inputs_.push_back({p.string(), hex64(fnv1a64(read_file(p)))});
  }
  void add_output(const fs::path& p) { outputs_.push_back(p.filename().string()); }

  std::string file_name() const { return "manifest_" + command_ + ".json"; }

  std::string run_id() const {
    std::string key = command_ + "\n" + config_.dump() + "\n";
    for (const auto& in : inputs_) key += in.second + "\n";
    return hex64(fnv1a64(key));
  }

  Json reference() const { return {{"file", file_name()}, {"run_id", run_id()}}; }

  void write(double wall_seconds) const {
    Json j;
    j["command"] = command_;
    j["run_id"] = run_id();
    j["tool_version"] = kToolVersion;
    j["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
    j["config"] = config_;
    auto& inputs = j["inputs"] = Json::array();
    for (const auto& in : inputs_) inputs.push_back({{"path", in.first}, {"fnv1a64", in.second}});
    auto& outputs = j["outputs"] = Json::array();
    for (const auto& name : outputs_) {
      outputs.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(read_file(out_dir_ / name)))}});
    }
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    j["wall_seconds"] = wall_seconds;
    write_file(out_dir_ / file_name(), j.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_dir_;
  std::string started_;
  Json config_ = Json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
};

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return kDefaultOutputDir;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_metric(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

Json metric_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// Options shared by every command.
struct CommonOptions {
  std::string out_dir;
};

// Training flags layered over an optional JSON config file.
struct TrainFlags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window, hidden, epochs, batch_size, patience;
  std::optional<double> lambda, lr;
  std::optional<std::string> ablation, model;
  bool tda_normalize = false;
  bool two_stage = false;
  bool separate_context_cell = false;
  std::string dataset;

  void attach(CLI::App* app, bool with_ablation, bool with_model) {
    app->add_option("--config", config_file, "JSON training config");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--window", window, "Window length T (defaults to the dataset's)");
    app->add_option("--hidden", hidden, "Hidden size U");
    app->add_option("--lambda", lambda, "Volatility loss weight");
    app->add_option("--epochs", epochs, "Maximum epochs");
    app->add_option("--batch-size", batch_size, "Mini-batch size");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--patience", patience, "Early-stopping patience in epochs");
    app->add_flag("--tda-normalize", tda_normalize, "Divide the weighted history by H_t");
    app->add_flag("--two-stage", two_stage, "Train movement first, then the volatility head");
    app->add_flag("--separate-context-cell", separate_context_cell,
                  "Use a separate GRU cell for the context step");
    if (with_ablation) {
      app->add_option("--ablation", ablation, "Feature subset")
          ->check(CLI::IsMember({"full", "p", "s", "wo-m", "wo_m"}));
    }
    if (with_model) {
      app->add_option("--model", model, "Model variant")->check(CLI::IsMember({"alerta", "gru"}));
    }
    app->add_option("--dataset", dataset, "Prepared dataset (default <out>/dataset.bin)");
  }

  TrainConfig resolve(std::size_t dataset_window) const {
    TrainConfig cfg;
    bool window_set = false;
    if (!config_file.empty()) {
      const std::string text = read_file(config_file);
      cfg = train_config_from_json(text);
      try {
        window_set = nlohmann::json::parse(text).contains("window");
      } catch (const nlohmann::json::exception&) {
      }
    }
    if (seed) cfg.seed = *seed;
    if (window) {
      cfg.window = *window;
      window_set = true;
    }
    if (!window_set) cfg.window = dataset_window;
    if (hidden) cfg.hidden = *hidden;
    if (lambda) cfg.lambda = *lambda;
    if (epochs) cfg.epochs = *epochs;
    if (batch_size) cfg.batch_size = *batch_size;
    if (lr) cfg.learning_rate = *lr;
    if (patience) cfg.patience = *patience;
    if (tda_normalize) cfg.tda_normalize = true;
    if (two_stage) cfg.two_stage = true;
    if (separate_context_cell) cfg.separate_context_cell = true;
    if (ablation) cfg.ablation = ablation_from_string(*ablation);
    if (model) cfg.model = model_kind_from_string(*model);
    validate(cfg);
    return cfg;
  }
};

fs::path dataset_path(const std::string& flag, const fs::path& out_dir) {
  return flag.empty() ? out_dir / "dataset.bin" : fs::path(flag);
}

// ---- synth ----

struct SynthOptions {
  std::size_t days = 5000;
  std::size_t features = 8;
  std::size_t stocks = 1;
  std::size_t window = 10;
  std::size_t vol_lag = 7;
  double noise = 0.1;
  std::uint64_t seed = 1;
  std::string signal_groups;
  std::string start_date = "2000-01-03";
};

int cmd_synth(const SynthOptions& o, const fs::path& out_dir, std::ostream& out) {
  std::vector<FeatureGroup> groups;
  for (const auto& g : split_list(o.signal_groups)) groups.push_back(feature_group_from_string(g));
  if (o.stocks < 1) throw ConfigError("synth: --stocks must be at least 1");

  RunManifest manifest("synth", out_dir);
  Json config = {{"days", o.days},       {"features", o.features}, {"stocks", o.stocks},
                 {"window", o.window},   {"vol_lag", o.vol_lag},   {"noise", o.noise},
                 {"seed", o.seed},       {"signal_groups", split_list(o.signal_groups)},
                 {"start_date", o.start_date}};
  manifest.set_config(config);
  manifest.set_seed(o.seed);
  const auto t0 = std::chrono::steady_clock::now();

  const fs::path data_dir = out_dir / "synth";
  fs::create_directories(data_dir);
  const SynthSpec base = make_synth_spec(o.features, o.seed, groups);

  Json truth_json;
  truth_json["manifest"] = manifest.reference();
  truth_json["config"] = config;
  truth_json["columns"] = base.columns;
  truth_json["signal_weights"] = base.signal_weights;
  truth_json["bayes_rate"] = 1.0 - o.noise;
  std::size_t up = 0, down = 0, vol = 0, flips = 0, targets = 0;
  auto& stocks = truth_json["stocks"] = Json::array();
  for (std::size_t i = 0; i < o.stocks; ++i) {
    SynthSpec spec = base;
    spec.n_days = o.days;
    spec.window = o.window;
    spec.vol_lag = o.vol_lag;
    spec.noise_flip = o.noise;
    spec.start_date = o.start_date;
    spec.seed = i == 0 ? o.seed : derive_seed(o.seed, 200 + i);
    spec.stock_id = "SYN" + std::to_string(i);
    const SynthTruth truth = generate_with_truth(spec);
    const fs::path file = data_dir / (spec.stock_id + ".csv");
    write_frame(truth.frame, file);

    // Label bookkeeping over the days that become window targets.
    std::size_t s_up = 0, s_vol = 0, s_flip = 0;
    for (std::size_t d = spec.window; d < spec.n_days; ++d) {
      s_up += truth.clean_up[d] != truth.flipped[d];
      s_vol += truth.volatility_event[d];
      s_flip += truth.flipped[d];
    }
    const std::size_t n = spec.n_days - spec.window;
    stocks.push_back({{"stock_id", spec.stock_id},
                      {"file", "synth/" + file.filename().string()},
                      {"seed", spec.seed},
                      {"days", spec.n_days},
                      {"targets", n},
                      {"up", s_up},
                      {"down", n - s_up},
                      {"abstain", 0},
                      {"volatile", s_vol},
                      {"flipped", s_flip},
                      {"feature0_q90", truth.feature0_q90}});
    up += s_up;
    down += n - s_up;
    vol += s_vol;
    flips += s_flip;
    targets += n;
  }
  truth_json["totals"] = {{"targets", targets}, {"up", up},       {"down", down},
                          {"abstain", 0},       {"volatile", vol}, {"flipped", flips}};
  const fs::path truth_file = out_dir / "synth_truth.json";
  write_file(truth_file, truth_json.dump(2) + "\n");
  manifest.add_output(truth_file);
  manifest.write(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  out << "synth: wrote " << o.stocks << " frame(s) of " << o.days << " days to "
      << data_dir.string() << " (bayes rate " << fmt_metric(1.0 - o.noise) << ")\n";
  return 0;
}

// ---- prepare ----

struct PrepareOptions {
  std::string data_dir;
  std::string schema = "infer";
  std::size_t window = 10;
  double dead_low = -0.005;
  double dead_high = 0.005;
  double outlier = kVolatilityThreshold;
  double train_frac = 0.7;
  double valid_frac = 0.15;
};

Json split_stats(const std::vector<WindowedSample>& samples, const SplitBoundary& range) {
  std::size_t up = 0, down = 0, abstain = 0, vol = 0;
  for (const auto& s : samples) {
    if (s.y_m == Movement::up) ++up;
    else if (s.y_m == Movement::down) ++down;
    else ++abstain;
    vol += s.y_v != 0;
  }
  const double n = static_cast<double>(samples.size());
  return {{"samples", samples.size()},
          {"up", up},
          {"down", down},
          {"abstain", abstain},
          {"abstain_rate", samples.empty() ? 0.0 : static_cast<double>(abstain) / n},
          {"volatile", vol},
          {"calm", samples.size() - vol},
          {"first_date", range.first_date},
          {"last_date", range.last_date}};
}

int cmd_prepare(const PrepareOptions& o, const fs::path& out_dir, std::ostream& out,
                std::ostream& err) {
  const fs::path dir = o.data_dir;
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no input frames: '" + dir.string() + "' has no .csv files");

  RunManifest manifest("prepare", out_dir);
  Json config = {{"schema", o.schema},         {"window", o.window},
                 {"dead_zone", {o.dead_low, o.dead_high}},
                 {"outlier_threshold", o.outlier}, {"epsilon", kLogEpsilon},
                 {"train_frac", o.train_frac}, {"valid_frac", o.valid_frac}};
  manifest.set_config(config);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::string> schema;
  if (o.schema == "default") schema = default_schema();
  else if (o.schema != "infer") schema = split_list(o.schema);

  const DeadZone zone{o.dead_low, o.dead_high};
  std::vector<WindowedSample> samples;
  std::vector<std::string> warnings;
  std::vector<std::string> columns;
  Json frames = Json::array();
  for (const auto& file : files) {
    manifest.add_input(file);
    FeatureFrame frame = load_frame(file, schema);
    if (columns.empty()) {
      columns = frame.columns;
      // Later files must provide the same columns as the first.
      if (schema.empty()) schema = columns;
    }
    WindowResult w = window(frame, o.window, zone, o.outlier);
    for (auto& msg : w.warnings) warnings.push_back(file.filename().string() + ": " + msg);
    frames.push_back({{"file", file.filename().string()},
                      {"stock_id", frame.stock_id},
                      {"days", frame.size()},
                      {"samples", w.samples.size()}});
    for (auto& s : w.samples) samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ConfigError("no samples: every frame is shorter than the window");

  PreparedDataset data;
  data.window = o.window;
  data.dead_zone = zone;
  data.outlier_threshold = o.outlier;
  data.split = chrono_split(std::move(samples), o.train_frac, o.valid_frac);
  data.split.columns = columns_from_names(columns);

  const fs::path dataset_file = out_dir / "dataset.bin";
  save_dataset(data, dataset_file);
  manifest.add_output(dataset_file);

  Json m;
  m["manifest"] = manifest.reference();
  m["dataset"] = dataset_file.filename().string();
  m["config"] = config;
  auto& cols = m["columns"] = Json::array();
  for (const auto& c : data.split.columns) cols.push_back({{"name", c.name}, {"group", to_string(c.group)}});
  m["frames"] = frames;
  m["warnings"] = warnings;
  std::vector<WindowedSample> all;
  m["splits"] = {{"train", split_stats(data.split.train, data.split.train_range)},
                 {"validation", split_stats(data.split.validation, data.split.validation_range)},
                 {"test", split_stats(data.split.test, data.split.test_range)}};
  for (const auto* part : {&data.split.train, &data.split.validation, &data.split.test})
    all.insert(all.end(), part->begin(), part->end());
  m["totals"] = split_stats(all, {data.split.train_range.first_date, data.split.test_range.last_date});
  const fs::path manifest_file = out_dir / "split_manifest.json";
  write_file(manifest_file, m.dump(2) + "\n");
  manifest.add_output(manifest_file);
  manifest.write(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  for (const auto& w : warnings) err << "warning: " << w << "\n";
  out << "prepare: " << files.size() << " frame(s), " << all.size() << " samples (train "
      << data.split.train.size() << ", validation " << data.split.validation.size() << ", test "
      << data.split.test.size() << ") -> " << dataset_file.string() << "\n";
  return 0;
}

// ---- train / eval / ablate / baseline ----

PreparedDataset load_prepared(const fs::path& path, RunManifest& manifest) {
  PreparedDataset data = load_dataset(path);
  manifest.add_input(path);
  return data;
}

Json with_manifest(const std::string& report_json, const RunManifest& manifest) {
  Json j = Json::parse(report_json);
  Json out;
  out["manifest"] = manifest.reference();
  for (auto& [k, v] : j.items()) out[k] = v;
  return out;
}

const std::vector<WindowedSample>& pick_split(const DatasetSplit& split, const std::string& name) {
  if (name == "train") return split.train;
  if (name == "validation") return split.validation;
  if (name == "test") return split.test;
  throw ConfigError("unknown split '" + name + "' (expected train, validation or test)");
}

int cmd_train(const TrainFlags& f, const fs::path& out_dir, const std::string& checkpoint_name,
              std::ostream& out) {
  RunManifest manifest("train", out_dir);
  const PreparedDataset data = load_prepared(dataset_path(f.dataset, out_dir), manifest);
  const TrainConfig cfg = f.resolve(data.window);
  manifest.set_config(Json::parse(train_config_to_json(cfg)));
  manifest.set_seed(cfg.seed);

  TrainResult r = train(data.split, cfg);
  const fs::path ckpt = out_dir / checkpoint_name;
  save_checkpoint(r.params, ckpt);
  r.report.checkpoint_path = ckpt.filename().string();
  const fs::path report_file = out_dir / "train_report.json";
  write_file(report_file, with_manifest(train_report_to_json(r.report, cfg), manifest).dump(2) + "\n");
  manifest.add_output(ckpt);
  manifest.add_output(report_file);
  manifest.write(r.report.wall_seconds);

  out << "train: " << r.report.epochs.size() << " epoch(s), best epoch " << r.report.best_epoch
      << ", best validation loss " << fmt_metric(r.report.best_validation_loss) << " -> "
      << ckpt.string() << "\n";
  return 0;
}

std::string table_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-20s | %8s %8s | %8s %8s %8s\n", "Model", "Mov.Acc", "Mov.MCC",
                "Vol.Acc", "Vol.MCC", "Vol.AUC");
  return buf + std::string(69, '-') + "\n";
}

std::string table_row(const std::string& label, const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-20s | %8s %8s | %8s %8s %8s\n", label.c_str(),
                fmt_metric(r.movement.accuracy).c_str(), fmt_metric(r.movement.mcc).c_str(),
                fmt_metric(r.volatility.accuracy).c_str(), fmt_metric(r.volatility.mcc).c_str(),
                fmt_metric(r.volatility.auc).c_str());
  return buf;
}

Json row_json(const std::string& label, const EvalReport& r) {
  return {{"model", label},
          {"movement", {{"accuracy", metric_json(r.movement.accuracy)}, {"mcc", metric_json(r.movement.mcc)}}},
          {"volatility",
           {{"accuracy", metric_json(r.volatility.accuracy)},
            {"mcc", metric_json(r.volatility.mcc)},
            {"auc", metric_json(r.volatility.auc)}}}};
}

int cmd_eval(const std::string& dataset_flag, const std::string& checkpoint_flag,
             const std::string& split_name, double threshold, const fs::path& out_dir,
             std::ostream& out) {
  RunManifest manifest("eval", out_dir);
  const fs::path ckpt = checkpoint_flag.empty() ? out_dir / "model.ckpt" : fs::path(checkpoint_flag);
  if (!fs::exists(ckpt)) {
    throw ConfigError("checkpoint '" + ckpt.string() + "' not found; run the train command first");
  }
  const PreparedDataset data = load_prepared(dataset_path(dataset_flag, out_dir), manifest);
  const ModelParams params = load_checkpoint(ckpt);
  manifest.add_input(ckpt);
  if (params.config.window != data.window) {
    throw DimensionError("checkpoint window T=" + std::to_string(params.config.window) +
                         " does not match dataset window T=" + std::to_string(data.window) +
                         "; checkpoint config " + config_to_json(params.config));
  }
  manifest.set_config({{"split", split_name}, {"threshold", threshold}});
  const auto t0 = std::chrono::steady_clock::now();

  const EvalReport report = evaluate(params, pick_split(data.split, split_name), data.split.columns,
                                     threshold);
  Json j = with_manifest(eval_report_to_json(report), manifest);
  j["split"] = split_name;
  j["model"] = Json::parse(config_to_json(params.config));
  const fs::path report_file = out_dir / "eval_report.json";
  write_file(report_file, j.dump(2) + "\n");
  manifest.add_output(report_file);
  manifest.write(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  out << table_header() << table_row(params.config.kind == ModelKind::gru ? "GRU" : "ALERTA-Net", report);
  return 0;
}

// Trains and tests each configuration in turn and writes a comparison table.
int cmd_compare(const std::string& command, const TrainFlags& f,
                const std::vector<std::pair<std::string, TrainConfig>>& runs_template,
                const fs::path& out_dir, std::ostream& out) {
  RunManifest manifest(command, out_dir);
  const PreparedDataset data = load_prepared(dataset_path(f.dataset, out_dir), manifest);
  const TrainConfig base = f.resolve(data.window);
  manifest.set_config(Json::parse(train_config_to_json(base)));
  manifest.set_seed(base.seed);
  const auto t0 = std::chrono::steady_clock::now();

  std::string text = table_header();
  Json rows = Json::array();
  for (const auto& [label, overlay] : runs_template) {
    TrainConfig cfg = base;
    cfg.ablation = overlay.ablation;
    cfg.model = overlay.model;
    const TrainResult r = train(data.split, cfg);
    const EvalReport report = evaluate(r.params, data.split.test, data.split.columns);
    text += table_row(label, report);
    Json row = row_json(label, report);
    row["ablation"] = to_string(cfg.ablation);
    row["variant"] = to_string(cfg.model);
    row["best_epoch"] = r.report.best_epoch;
    row["test_samples"] = report.samples;
    rows.push_back(row);
  }
  Json j;
  j["manifest"] = manifest.reference();
  j["split"] = "test";
  j["config"] = Json::parse(train_config_to_json(base));
  j["rows"] = rows;
  const fs::path json_file = out_dir / (command + "_table.json");
  const fs::path text_file = out_dir / (command + "_table.txt");
  write_file(json_file, j.dump(2) + "\n");
  write_file(text_file, text);
  manifest.add_output(json_file);
  manifest.add_output(text_file);
  manifest.write(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  out << text;
  return 0;
}

TrainConfig overlay(Ablation a, ModelKind k) {
  TrainConfig c;
  c.ablation = a;
  c.model = k;
  return c;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ALERTA-Net: joint stock movement and volatility prediction", "alerta_net"};
  app.require_subcommand(1);
  CommonOptions common;
  app.add_option("--out-dir", common.out_dir,
                 std::string("Output directory (else $") + kOutputDirEnv + ", else " +
                     kDefaultOutputDir + ")");

  SynthOptions so;
  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic frames with a planted signal");
  synth->add_option("--days", so.days, "Trading days per stock");
  synth->add_option("--features", so.features, "Feature columns D");
  synth->add_option("--stocks", so.stocks, "Number of stocks");
  synth->add_option("--window", so.window, "Window length used for label bookkeeping");
  synth->add_option("--vol-lag", so.vol_lag, "Lag between a feature spike and a volatile day");
  synth->add_option("--noise", so.noise, "Probability of flipping the planted movement");
  synth->add_option("--seed", so.seed, "Random seed");
  synth->add_option("--signal-groups", so.signal_groups,
                    "Comma-separated groups carrying the signal (price,sentiment,trend,macro)");
  synth->add_option("--start-date", so.start_date, "First trading day (ISO)");

  PrepareOptions po;
  CLI::App* prepare = app.add_subcommand("prepare", "Window, label and split a directory of CSVs");
  prepare->add_option("--data-dir", po.data_dir, "Directory of per-stock CSV files")->required();
  prepare->add_option("--schema", po.schema,
                      "infer (columns of the first file), default (17-column layout), or a "
                      "comma-separated column list");
  prepare->add_option("--window", po.window, "Window length T");
  prepare->add_option("--dead-zone-low", po.dead_low, "Lower dead-zone bound (exclusive)");
  prepare->add_option("--dead-zone-high", po.dead_high, "Upper dead-zone bound (exclusive)");
  prepare->add_option("--outlier", po.outlier, "Volatility threshold on |return|");
  prepare->add_option("--train-frac", po.train_frac, "Fraction of dates for training");
  prepare->add_option("--valid-frac", po.valid_frac, "Fraction of dates for validation");

  TrainFlags tf;
  std::string checkpoint_name = "model.ckpt";
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model on a prepared dataset");
  tf.attach(train_cmd, true, true);
  train_cmd->add_option("--checkpoint", checkpoint_name, "Checkpoint file name inside the output dir");

  std::string eval_dataset, eval_checkpoint, eval_split = "test";
  double threshold = 0.5;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a prepared dataset");
  eval_cmd->add_option("--dataset", eval_dataset, "Prepared dataset (default <out>/dataset.bin)");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Checkpoint (default <out>/model.ckpt)");
  eval_cmd->add_option("--split", eval_split, "train, validation or test")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  eval_cmd->add_option("--threshold", threshold, "Probability at or above which class 1 is predicted");

  TrainFlags af;
  CLI::App* ablate = app.add_subcommand("ablate", "Compare FULL, P, S and W/O M feature subsets");
  af.attach(ablate, false, true);

  TrainFlags bf;
  CLI::App* baseline = app.add_subcommand("baseline", "Compare ALERTA-Net with a plain GRU");
  bf.attach(baseline, true, false);

  for (CLI::App* sub : {synth, prepare, train_cmd, eval_cmd, ablate, baseline}) {
    sub->add_option("--out-dir", common.out_dir, "Output directory");
  }

  std::vector<std::string> argv_store = {"alerta_net"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const fs::path out_dir = resolve_out_dir(common.out_dir);
    fs::create_directories(out_dir);
    if (synth->parsed()) return cmd_synth(so, out_dir, out);
    if (prepare->parsed()) return cmd_prepare(po, out_dir, out, err);
    if (train_cmd->parsed()) return cmd_train(tf, out_dir, checkpoint_name, out);
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_dataset, eval_checkpoint, eval_split, threshold, out_dir, out);
    }
    if (ablate->parsed()) {
      const ModelKind k = af.model ? model_kind_from_string(*af.model) : ModelKind::alerta;
      return cmd_compare("ablate", af,
                         {{"ALERTA-Net", overlay(Ablation::full, k)},
                          {"ALERTA-Net(P)", overlay(Ablation::p, k)},
                          {"ALERTA-Net(S)", overlay(Ablation::s, k)},
                          {"ALERTA-Net(W/O M)", overlay(Ablation::wo_m, k)}},
                         out_dir, out);
    }
    if (baseline->parsed()) {
      const Ablation a = bf.ablation ? ablation_from_string(*bf.ablation) : Ablation::full;
      return cmd_compare("baseline", bf,
                         {{"GRU", overlay(a, ModelKind::gru)},
                          {"ALERTA-Net", overlay(a, ModelKind::alerta)}},
                         out_dir, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace alerta
