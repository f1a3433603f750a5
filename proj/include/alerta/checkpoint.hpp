#pragma once

#include <cstdint>
#include <filesystem>

#include "alerta/model.hpp"

namespace alerta {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: "ALCK", u32 version, u64-length JSON config (D, U, T, kind, flags,
/// feature names), u64 parameter count, then per parameter: name, u64 rows,
/// u64 cols, rows*cols little-endian float64 values. Parameters appear in
/// lexicographic name order.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

}  // namespace alerta
