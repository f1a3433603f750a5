#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alerta/matrix.hpp"

namespace alerta {

inline constexpr double kLogEpsilon = 1e-8;

/// Source family of a feature column, used to build ablation masks.
enum class FeatureGroup { price, sentiment, trend, macro, other };

std::string_view to_string(FeatureGroup g);
FeatureGroup feature_group_from_string(std::string_view s);

/// Group from the column-name prefix: px_/price_/adj_close -> price,
/// sent_/tweet_ -> sentiment, trend_ -> trend, macro_ -> macro, else other.
FeatureGroup infer_group(std::string_view column);

struct FeatureColumn {
  std::string name;
  FeatureGroup group = FeatureGroup::other;
  friend bool operator==(const FeatureColumn&, const FeatureColumn&) = default;
};

std::vector<FeatureColumn> columns_from_names(std::span<const std::string> names);

/// A 17-column reference layout (price, sentiment, trend and macro blocks).
std::vector<std::string> default_schema();

/// One stock's aligned daily series. features[d][j] is column j on dates[d].
struct FeatureFrame {
  std::string stock_id;
  std::vector<std::string> dates;
  std::vector<double> adj_close;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> features;

  std::size_t size() const { return dates.size(); }
  friend bool operator==(const FeatureFrame&, const FeatureFrame&) = default;
};

/// Reads `date, adj_close, <schema...>` (extra columns ignored). Rows are
/// sorted by date. An empty schema selects every non-key column in header
/// order. stock_id defaults to the file stem.
FeatureFrame load_frame(const std::filesystem::path& path, std::span<const std::string> schema,
                        std::string stock_id = {});

/// Writes a frame in the format load_frame reads, with round-trip precision.
void write_frame(const FeatureFrame& frame, const std::filesystem::path& path);

/// Elementwise ln(e + epsilon). Rows of `raw` are features; a negative entry
/// raises PreprocessError naming the row (by `row_names` when given).
Matrix normalize(const Matrix& raw, double epsilon = kLogEpsilon,
                 std::span<const std::string> row_names = {});

enum class Movement : std::int8_t { down = 0, up = 1, abstain = -1 };

/// Open interval of relative changes treated as "no movement".
struct DeadZone {
  double lower = -0.005;
  double upper = 0.005;
};

inline constexpr double kVolatilityThreshold = 0.05;

/// Direction of p_prev -> p_t; abstain strictly inside the dead zone. Returns
/// are rounded to 1e-12 before any threshold comparison.
Movement movement_label(double p_prev, double p_t, DeadZone zone = {});
/// 1 iff |p_t - p_prev| / p_prev >= threshold.
int volatility_label(double p_prev, double p_t, double threshold = kVolatilityThreshold);

struct WindowedSample {
  Matrix x;  // D x T, normalized, column j is day target-T+j
  Movement y_m = Movement::abstain;
  int y_v = 0;
  std::string stock_id;
  std::string target_date;

  friend bool operator==(const WindowedSample&, const WindowedSample&) = default;
};

struct WindowResult {
  std::vector<WindowedSample> samples;
  std::vector<std::string> warnings;
};

/// One sample per target index t in [T, len): features of days [t-T, t),
/// labels from adj_close[t-1] -> adj_close[t]. A frame shorter than T+1
/// yields no samples and a warning.
WindowResult window(const FeatureFrame& frame, std::size_t T, DeadZone zone = {},
                    double outlier_threshold = kVolatilityThreshold,
                    double epsilon = kLogEpsilon);

struct SplitBoundary {
  std::string first_date;
  std::string last_date;
};

struct DatasetSplit {
  std::vector<FeatureColumn> columns;
  std::vector<WindowedSample> train;
  std::vector<WindowedSample> validation;
  std::vector<WindowedSample> test;
  SplitBoundary train_range, validation_range, test_range;
};

/// Chronological split over distinct target dates: the first
/// round(train_frac * n_dates) dates go to train, the next
/// round(valid_frac * n_dates) to validation, the rest to test. Samples are
/// ordered by (date, stock) within each split.
DatasetSplit chrono_split(std::vector<WindowedSample> samples, double train_frac,
                          double valid_frac);

/// Strict YYYY-MM-DD check.
bool is_iso_date(std::string_view s);

}  // namespace alerta
