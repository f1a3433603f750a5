#pragma once

#include <filesystem>

#include "alerta/data_pipeline.hpp"

namespace alerta {

/// Output of the prepare step: windowed, labelled, split samples plus the
/// settings that produced them.
struct PreparedDataset {
  std::size_t window = 10;
  DeadZone dead_zone;
  double outlier_threshold = kVolatilityThreshold;
  double epsilon = kLogEpsilon;
  DatasetSplit split;
};

/// Binary layout: "ALDS", u32 version, JSON header (settings, columns with
/// groups, split ranges), then u64 count and per sample: u8 split tag
/// (0 train, 1 validation, 2 test), stock id, target date, i8 movement,
/// u8 volatility, matrix.
void save_dataset(const PreparedDataset& data, const std::filesystem::path& path);
PreparedDataset load_dataset(const std::filesystem::path& path);

/// Row indices of `columns` whose names appear in `names`, in `names` order.
/// Throws DimensionError naming any column the dataset lacks.
std::vector<std::size_t> rows_for_names(const std::vector<FeatureColumn>& columns,
                                        const std::vector<std::string>& names);

}  // namespace alerta
