#include "alerta/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "alerta/errors.hpp"
#include "alerta/random.hpp"

namespace alerta {

namespace {

// Howard Hinnant's civil-calendar conversions.
long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

std::string civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04ld-%02u-%02u", y + (m <= 2), m, d);
  return buf;
}

// 0 = Monday.
int weekday(long days) { return static_cast<int>(((days % 7) + 7 + 3) % 7); }

constexpr FeatureGroup kRotation[] = {FeatureGroup::price, FeatureGroup::sentiment,
                                      FeatureGroup::trend, FeatureGroup::macro};
constexpr const char* kPrefix[] = {"px_", "sent_", "trend_", "macro_"};

}  // namespace

std::vector<std::string> weekday_calendar(const std::string& start, std::size_t n) {
  if (!is_iso_date(start)) throw ConfigError("synthetic start date '" + start + "' is not ISO");
  long day = days_from_civil(std::stol(start.substr(0, 4)),
                             static_cast<unsigned>(std::stoi(start.substr(5, 2))),
                             static_cast<unsigned>(std::stoi(start.substr(8, 2))));
  std::vector<std::string> out;
  out.reserve(n);
  while (out.size() < n) {
    if (weekday(day) < 5) out.push_back(civil_from_days(day));
    ++day;
  }
  return out;
}

SynthSpec make_synth_spec(std::size_t D, std::uint64_t seed,
                          std::span<const FeatureGroup> signal_groups) {
  SynthSpec spec;
  spec.seed = seed;
  Rng rng(derive_seed(seed, 100));
  for (std::size_t j = 0; j < D; ++j) {
    const std::size_t g = j % 4;
    spec.columns.push_back(kPrefix[g] + std::to_string(j / 4));
    const bool signal =
        signal_groups.empty() ||
        std::find(signal_groups.begin(), signal_groups.end(), kRotation[g]) != signal_groups.end();
    const double w = rng.normal();
    spec.signal_weights.push_back(signal ? w : 0.0);
  }
  return spec;
}

void validate(const SynthSpec& spec) {
  auto fail = [](const std::string& m) { throw ConfigError("synthetic spec: " + m); };
  if (spec.columns.empty()) fail("needs at least one feature column");
  if (spec.signal_weights.size() != spec.columns.size())
    fail("signal_weights has " + std::to_string(spec.signal_weights.size()) + " entries for " +
         std::to_string(spec.columns.size()) + " columns");
  if (!(spec.noise_flip >= 0.0 && spec.noise_flip < 0.5)) fail("noise_flip must be in [0, 0.5)");
  if (spec.window < 1) fail("window must be >= 1");
  if (spec.vol_lag < 1 || spec.vol_lag >= spec.window) fail("vol_lag must lie in [1, window)");
  if (spec.n_days < spec.window + 2) fail("n_days must be at least window + 2");
  if (!(spec.base_price > 0.0)) fail("base_price must be positive");
}

SynthTruth generate_with_truth(const SynthSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n_days, D = spec.columns.size();
  Rng rng(spec.seed);

  SynthTruth truth;
  FeatureFrame& f = truth.frame;
  f.stock_id = spec.stock_id;
  f.columns = spec.columns;
  f.dates = weekday_calendar(spec.start_date, n);
  f.features.assign(n, std::vector<double>(D));
  for (auto& day : f.features)
    for (double& v : day) v = std::exp(rng.normal());

  std::vector<double> f0(n);
  for (std::size_t d = 0; d < n; ++d) f0[d] = f.features[d][0];
  std::sort(f0.begin(), f0.end());
  truth.feature0_q90 = f0[static_cast<std::size_t>(0.9 * static_cast<double>(n - 1))];

  truth.clean_up.assign(n, false);
  truth.flipped.assign(n, false);
  truth.volatility_event.assign(n, false);
  f.adj_close.assign(n, spec.base_price);
  for (std::size_t d = 1; d < n; ++d) {
    const Matrix x = normalize(Matrix(D, 1, f.features[d - 1]));
    double score = 0.0;
    for (std::size_t j = 0; j < D; ++j) score += spec.signal_weights[j] * x[j];
    const bool flip = rng.bernoulli(spec.noise_flip);
    const double small = rng.uniform(0.01, 0.03);
    const double large = rng.uniform(0.06, 0.09);
    const bool vol = d >= spec.vol_lag && f.features[d - spec.vol_lag][0] > truth.feature0_q90;
    const bool up = (score >= 0.0) != flip;
    const double mag = vol ? large : small;
    truth.clean_up[d] = score >= 0.0;
    truth.flipped[d] = flip;
    truth.volatility_event[d] = vol;
    f.adj_close[d] = f.adj_close[d - 1] * (up ? 1.0 + mag : 1.0 - mag);
  }
  return truth;
}

FeatureFrame generate(const SynthSpec& spec) { return generate_with_truth(spec).frame; }

double bayes_rate(const SynthSpec& spec) {
  validate(spec);
  return 1.0 - spec.noise_flip;
}

}  // namespace alerta
