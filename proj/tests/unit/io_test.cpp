#include <gtest/gtest.h>

#include "alerta/checkpoint.hpp"
#include "alerta/dataset_io.hpp"
#include "alerta/errors.hpp"
#include "alerta/synth.hpp"
#include "alerta/training.hpp"
#include "test_util.hpp"

namespace alerta {
namespace {

using testing::read_bytes;
using testing::TempDir;
using testing::write_text;

PreparedDataset small_dataset() {
  SynthSpec spec = make_synth_spec(5, 3);
  spec.n_days = 120;
  spec.window = 4;
  spec.vol_lag = 2;
  PreparedDataset data;
  data.window = 4;
  data.split = chrono_split(window(generate(spec), 4).samples, 0.6, 0.2);
  data.split.columns = columns_from_names(spec.columns);
  return data;
}

ModelParams small_model() {
  ModelConfig cfg;
  cfg.input_dim = 5;
  cfg.hidden = 3;
  cfg.window = 4;
  cfg.tda_normalize = true;
  cfg.feature_names = {"px_0", "sent_0", "trend_0", "macro_0", "px_1"};
  return init_params(cfg, 11);
}

TEST(Checkpoint, RoundTripIsExact) {
  TempDir dir;
  const ModelParams p = small_model();
  save_checkpoint(p, dir / "m.ckpt");
  const ModelParams q = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(p, q);
  const PreparedDataset data = small_dataset();
  const EvalReport a = evaluate(p, data.split.test, data.split.columns);
  const EvalReport b = evaluate(q, data.split.test, data.split.columns);
  EXPECT_EQ(eval_report_to_json(a), eval_report_to_json(b));
  save_checkpoint(q, dir / "n.ckpt");
  EXPECT_EQ(read_bytes(dir / "m.ckpt"), read_bytes(dir / "n.ckpt"));
}

TEST(Checkpoint, RejectsCorruptFiles) {
  TempDir dir;
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), ParseError);
  write_text(dir / "bad.ckpt", "XXXXjunk");
  EXPECT_THROW(load_checkpoint(dir / "bad.ckpt"), ParseError);

  save_checkpoint(small_model(), dir / "m.ckpt");
  std::string bytes = read_bytes(dir / "m.ckpt");
  std::string bumped = bytes;
  bumped[4] = 9;  // version field
  write_text(dir / "v.ckpt", bumped);
  try {
    load_checkpoint(dir / "v.ckpt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  write_text(dir / "t.ckpt", bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(load_checkpoint(dir / "t.ckpt"), ParseError);
}

TEST(Checkpoint, ConfigJsonRoundTrip) {
  ModelConfig cfg = small_model().config;
  cfg.kind = ModelKind::gru;
  cfg.separate_context_cell = true;
  EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);
}

TEST(Dataset, RoundTripIsExact) {
  TempDir dir;
  const PreparedDataset data = small_dataset();
  save_dataset(data, dir / "d.bin");
  const PreparedDataset back = load_dataset(dir / "d.bin");
  EXPECT_EQ(back.window, data.window);
  EXPECT_EQ(back.split.columns, data.split.columns);
  ASSERT_EQ(back.split.train.size(), data.split.train.size());
  ASSERT_EQ(back.split.test.size(), data.split.test.size());
  for (std::size_t i = 0; i < data.split.test.size(); ++i) {
    EXPECT_EQ(back.split.test[i].x, data.split.test[i].x);
    EXPECT_EQ(back.split.test[i].y_m, data.split.test[i].y_m);
    EXPECT_EQ(back.split.test[i].y_v, data.split.test[i].y_v);
    EXPECT_EQ(back.split.test[i].target_date, data.split.test[i].target_date);
  }
  EXPECT_EQ(back.split.train_range.first_date, data.split.train_range.first_date);
}

TEST(Dataset, MissingFileNamesPrepareStep) {
  TempDir dir;
  try {
    load_dataset(dir / "nope.bin");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("prepare"), std::string::npos) << e.what();
  }
}

TEST(Dataset, RowsForNames) {
  const auto cols = columns_from_names(std::vector<std::string>{"a", "px_b", "sent_c"});
  EXPECT_EQ(rows_for_names(cols, {"sent_c", "a"}), (std::vector<std::size_t>{2, 0}));
  EXPECT_THROW(rows_for_names(cols, {"zz"}), DimensionError);
}

}  // namespace
}  // namespace alerta
