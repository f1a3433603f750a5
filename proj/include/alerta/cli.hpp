#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace alerta {

inline constexpr const char* kToolVersion = "0.1.0";
/// Environment variable overriding the default output directory.
inline constexpr const char* kOutputDirEnv = "ALERTA_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "alerta_out";

/// 64-bit FNV-1a, used for input fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

/// Runs one subcommand (synth, prepare, train, eval, ablate, baseline).
/// args excludes the program name. Returns the process exit code: 0 on
/// success, nonzero on any error. Warnings go to `err` and never change it.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alerta
