#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace alerta {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Tallies predicted vs actual {0,1} labels. Spans must have equal length.
ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual);

/// (tp + tn) / total; nullopt when there is nothing to score.
std::optional<double> accuracy(const ConfusionCounts& c);

/// Matthews correlation. Returns 0 when any marginal is empty (the usual
/// convention; reported as "mcc_zero_denominator" in evaluation metadata).
double mcc(const ConfusionCounts& c);

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Computed exactly via average ranks. nullopt unless both
/// classes are present.
std::optional<double> auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace alerta
