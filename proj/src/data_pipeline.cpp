#include "alerta/data_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "alerta/errors.hpp"

namespace alerta {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::price: return "price";
    case FeatureGroup::sentiment: return "sentiment";
    case FeatureGroup::trend: return "trend";
    case FeatureGroup::macro: return "macro";
    case FeatureGroup::other: return "other";
  }
  return "other";
}

FeatureGroup feature_group_from_string(std::string_view s) {
  if (s == "price") return FeatureGroup::price;
  if (s == "sentiment") return FeatureGroup::sentiment;
  if (s == "trend") return FeatureGroup::trend;
  if (s == "macro") return FeatureGroup::macro;
  if (s == "other") return FeatureGroup::other;
  throw ConfigError("unknown feature group '" + std::string(s) + "'");
}

FeatureGroup infer_group(std::string_view column) {
  if (starts_with(column, "px_") || starts_with(column, "price_") || column == "adj_close")
    return FeatureGroup::price;
  if (starts_with(column, "sent_") || starts_with(column, "tweet_")) return FeatureGroup::sentiment;
  if (starts_with(column, "trend_")) return FeatureGroup::trend;
  if (starts_with(column, "macro_")) return FeatureGroup::macro;
  return FeatureGroup::other;
}

std::vector<FeatureColumn> columns_from_names(std::span<const std::string> names) {
  std::vector<FeatureColumn> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back({n, infer_group(n)});
  return out;
}

std::vector<std::string> default_schema() {
  return {"adj_close",           "px_open",          "px_high",        "px_low",
          "px_volume",           "sent_positive",    "sent_neutral",   "sent_negative",
          "tweet_count",         "trend_stock",      "trend_market",   "trend_recession",
          "macro_fed_funds",     "macro_cpi",        "macro_unemployment",
          "macro_treasury_10y",  "macro_oil"};
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

FeatureFrame load_frame(const std::filesystem::path& path, std::span<const std::string> schema,
                        std::string stock_id) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  const std::string where = path.string();

  std::string line;
  if (!std::getline(in, line)) throw ParseError(where + ": empty file, no header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(std::string(header[i]), i);

  std::vector<std::string> wanted(schema.begin(), schema.end());
  if (wanted.empty()) {
    for (auto h : header) {
      if (h != "date" && h != "adj_close") wanted.emplace_back(h);
    }
  }
  std::vector<std::string> missing;
  for (const char* key : {"date", "adj_close"}) {
    if (!index.count(key)) missing.emplace_back(key);
  }
  for (const auto& c : wanted) {
    if (!index.count(c) && std::find(missing.begin(), missing.end(), c) == missing.end())
      missing.push_back(c);
  }
  if (!missing.empty()) {
    std::string msg = where + ": missing column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw SchemaError(msg);
  }

  const std::size_t date_col = index.at("date");
  const std::size_t price_col = index.at("adj_close");
  std::vector<std::size_t> feature_cols;
  for (const auto& c : wanted) feature_cols.push_back(index.at(c));

  struct Row {
    std::string date;
    double price;
    std::vector<double> features;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  auto parse_cell = [&](std::string_view cell, const std::string& column) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
      throw ParseError(where + ": row " + std::to_string(line_no) + ", column '" + column +
                       "': non-numeric value '" + std::string(cell) + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(where + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(header.size()));
    }
    Row row;
    row.date = std::string(cells[date_col]);
    if (!is_iso_date(row.date)) {
      throw ParseError(where + ": row " + std::to_string(line_no) + ": invalid date '" + row.date +
                       "' (expected YYYY-MM-DD)");
    }
    row.price = parse_cell(cells[price_col], "adj_close");
    if (row.price <= 0.0) {
      throw IntegrityError(where + ": row " + std::to_string(line_no) +
                           ": adj_close must be positive");
    }
    row.features.reserve(feature_cols.size());
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const double v = parse_cell(cells[feature_cols[j]], wanted[j]);
      if (v < 0.0) {
        throw PreprocessError(where + ": row " + std::to_string(line_no) + ", column '" +
                              wanted[j] + "': negative value " + format_double(v) +
                              " (log normalization needs nonnegative input; shift the series "
                              "before ingestion)");
      }
      row.features.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      throw IntegrityError(where + ": duplicate date " + rows[i].date);
    }
  }

  FeatureFrame frame;
  frame.stock_id = stock_id.empty() ? path.stem().string() : std::move(stock_id);
  frame.columns = wanted;
  frame.dates.reserve(rows.size());
  frame.adj_close.reserve(rows.size());
  frame.features.reserve(rows.size());
  for (auto& r : rows) {
    frame.dates.push_back(std::move(r.date));
    frame.adj_close.push_back(r.price);
    frame.features.push_back(std::move(r.features));
  }
  return frame;
}

void write_frame(const FeatureFrame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << "date,adj_close";
  for (const auto& c : frame.columns) out << ',' << c;
  out << '\n';
  for (std::size_t d = 0; d < frame.size(); ++d) {
    out << frame.dates[d] << ',' << format_double(frame.adj_close[d]);
    for (double v : frame.features[d]) out << ',' << format_double(v);
    out << '\n';
  }
}

Matrix normalize(const Matrix& raw, double epsilon, std::span<const std::string> row_names) {
  Matrix out(raw.rows(), raw.cols());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    for (std::size_t j = 0; j < raw.cols(); ++j) {
      const double v = raw(i, j);
      if (!(v >= 0.0)) {
        const std::string name =
            i < row_names.size() ? row_names[i] : "row " + std::to_string(i);
        throw PreprocessError("normalize: column '" + name + "' has negative or NaN entry " +
                              format_double(v) + " at step " + std::to_string(j));
      }
      out(i, j) = std::log(v + epsilon);
    }
  }
  return out;
}

namespace {

// Relative change rounded to 1e-12, so decimal quotes sitting exactly on a
// threshold (209 -> 198.55 is -5%) compare as on it despite binary rounding.
double quoted_return(double p_prev, double p_t) {
  return std::round((p_t - p_prev) / p_prev * 1e12) / 1e12;
}

}  // namespace

Movement movement_label(double p_prev, double p_t, DeadZone zone) {
  if (!(p_prev > 0.0)) throw DomainError("movement_label: previous price must be positive");
  const double r = quoted_return(p_prev, p_t);
  if (r >= zone.upper) return Movement::up;
  if (r <= zone.lower) return Movement::down;
  return Movement::abstain;
}

int volatility_label(double p_prev, double p_t, double threshold) {
  if (!(p_prev > 0.0)) throw DomainError("volatility_label: previous price must be positive");
  return std::abs(quoted_return(p_prev, p_t)) >= threshold ? 1 : 0;
}

WindowResult window(const FeatureFrame& frame, std::size_t T, DeadZone zone,
                    double outlier_threshold, double epsilon) {
  if (T == 0) throw ConfigError("window length must be at least 1");
  WindowResult result;
  const std::size_t n = frame.size();
  if (n < T + 1) {
    result.warnings.push_back("frame '" + frame.stock_id + "' has " + std::to_string(n) +
                              " days, needs at least " + std::to_string(T + 1) +
                              " for window " + std::to_string(T) + "; skipped");
    return result;
  }
  const std::size_t D = frame.columns.size();
  result.samples.reserve(n - T);
  for (std::size_t t = T; t < n; ++t) {
    Matrix raw(D, T);
    for (std::size_t j = 0; j < T; ++j) {
      const auto& day = frame.features[t - T + j];
      if (day.size() != D) {
        throw IntegrityError("frame '" + frame.stock_id + "': day " + frame.dates[t - T + j] +
                             " has " + std::to_string(day.size()) + " features, expected " +
                             std::to_string(D));
      }
      for (std::size_t i = 0; i < D; ++i) raw(i, j) = day[i];
    }
    WindowedSample s;
    s.x = normalize(raw, epsilon, frame.columns);
    s.y_m = movement_label(frame.adj_close[t - 1], frame.adj_close[t], zone);
    s.y_v = volatility_label(frame.adj_close[t - 1], frame.adj_close[t], outlier_threshold);
    s.stock_id = frame.stock_id;
    s.target_date = frame.dates[t];
    result.samples.push_back(std::move(s));
  }
  return result;
}

DatasetSplit chrono_split(std::vector<WindowedSample> samples, double train_frac,
                          double valid_frac) {
  if (!(train_frac > 0.0) || !(valid_frac > 0.0) || !(train_frac + valid_frac < 1.0)) {
    throw ConfigError("split fractions must be positive with train + validation < 1");
  }
  std::stable_sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    return a.target_date != b.target_date ? a.target_date < b.target_date
                                          : a.stock_id < b.stock_id;
  });
  std::vector<std::string> dates;
  for (const auto& s : samples) {
    if (dates.empty() || dates.back() != s.target_date) dates.push_back(s.target_date);
  }
  const auto n_dates = static_cast<double>(dates.size());
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * n_dates));
  const auto n_valid = static_cast<std::size_t>(std::llround(valid_frac * n_dates));
  if (n_train == 0 || n_valid == 0 || n_train + n_valid >= dates.size()) {
    throw ConfigError("too few samples to split: " + std::to_string(dates.size()) +
                      " distinct dates give train/validation/test = " + std::to_string(n_train) +
                      "/" + std::to_string(n_valid) + "/" +
                      std::to_string(dates.size() - std::min(dates.size(), n_train + n_valid)));
  }
  const std::string& last_train = dates[n_train - 1];
  const std::string& last_valid = dates[n_train + n_valid - 1];

  DatasetSplit split;
  for (auto& s : samples) {
    if (s.target_date <= last_train) {
      split.train.push_back(std::move(s));
    } else if (s.target_date <= last_valid) {
      split.validation.push_back(std::move(s));
    } else {
      split.test.push_back(std::move(s));
    }
  }
  auto range = [](const std::vector<WindowedSample>& v) {
    return SplitBoundary{v.front().target_date, v.back().target_date};
  };
  split.train_range = range(split.train);
  split.validation_range = range(split.validation);
  split.test_range = range(split.test);
  return split;
}

}  // namespace alerta
