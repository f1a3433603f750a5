#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alerta/data_pipeline.hpp"

namespace alerta {

/// Recipe for a synthetic stock with a planted, knowable signal.
///
/// Raw features are log-normal (so the log normalization maps them back to
/// standard normals). The move from day d-1 to day d goes up iff
/// w . normalize(features[d-1]) >= 0, flipped with probability noise_flip; its
/// size is 1-3%, never inside the dead zone. When raw feature 0 on day
/// d-vol_lag exceeds its 90th percentile the move is instead 6-9%, a
/// volatility event visible only through a lagged input.
struct SynthSpec {
  std::size_t n_days = 5000;
  std::size_t window = 10;
  std::uint64_t seed = 1;
  std::vector<std::string> columns;
  std::vector<double> signal_weights;
  double noise_flip = 0.1;
  std::size_t vol_lag = 7;
  double base_price = 100.0;
  std::string stock_id = "SYN";
  std::string start_date = "2000-01-03";
};

/// D columns named round-robin px_i, sent_i, trend_i, macro_i, with N(0,1)
/// signal weights on columns whose group is listed (all groups when empty)
/// and zero elsewhere.
SynthSpec make_synth_spec(std::size_t D, std::uint64_t seed,
                          std::span<const FeatureGroup> signal_groups = {});

/// Throws ConfigError on an invalid spec.
void validate(const SynthSpec& spec);

/// Per-day bookkeeping of what the generator planted. Index d describes the
/// move from day d-1 to day d; entry 0 is unused.
struct SynthTruth {
  FeatureFrame frame;
  std::vector<bool> clean_up;
  std::vector<bool> flipped;
  std::vector<bool> volatility_event;
  double feature0_q90 = 0.0;
};

FeatureFrame generate(const SynthSpec& spec);
SynthTruth generate_with_truth(const SynthSpec& spec);

/// Accuracy ceiling for movement: 1 - noise_flip.
double bayes_rate(const SynthSpec& spec);

/// Consecutive weekdays starting at an ISO date (moved forward off a weekend).
std::vector<std::string> weekday_calendar(const std::string& start, std::size_t n);

}  // namespace alerta
