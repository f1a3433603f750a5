#include "alerta/dataset_io.hpp"

#include <fstream>
#include <json.hpp>

#include "alerta/errors.hpp"
#include "binary_io.hpp"

namespace alerta {

namespace {

constexpr std::uint32_t kDatasetVersion = 1;

nlohmann::ordered_json range_json(const SplitBoundary& b) {
  return {{"first_date", b.first_date}, {"last_date", b.last_date}};
}

SplitBoundary range_from(const nlohmann::json& j) {
  return {j.at("first_date").get<std::string>(), j.at("last_date").get<std::string>()};
}

}  // namespace

void save_dataset(const PreparedDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write dataset '" + path.string() + "'");
  nlohmann::ordered_json header;
  header["window"] = data.window;
  header["dead_zone"] = {data.dead_zone.lower, data.dead_zone.upper};
  header["outlier_threshold"] = data.outlier_threshold;
  header["epsilon"] = data.epsilon;
  auto& cols = header["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : data.split.columns) {
    cols.push_back({{"name", c.name}, {"group", std::string(to_string(c.group))}});
  }
  header["train_range"] = range_json(data.split.train_range);
  header["validation_range"] = range_json(data.split.validation_range);
  header["test_range"] = range_json(data.split.test_range);

  out.write("ALDS", 4);
  io::write_u32(out, kDatasetVersion);
  io::write_string(out, header.dump());
  const auto& s = data.split;
  io::write_u64(out, s.train.size() + s.validation.size() + s.test.size());
  auto write_part = [&](const std::vector<WindowedSample>& part, std::uint8_t tag) {
    for (const auto& w : part) {
      io::write_u8(out, tag);
      io::write_string(out, w.stock_id);
      io::write_string(out, w.target_date);
      io::write_u8(out, static_cast<std::uint8_t>(static_cast<std::int8_t>(w.y_m)));
      io::write_u8(out, static_cast<std::uint8_t>(w.y_v));
      io::write_matrix(out, w.x);
    }
  };
  write_part(s.train, 0);
  write_part(s.validation, 1);
  write_part(s.test, 2);
  if (!out) throw ParseError("failed writing dataset '" + path.string() + "'");
}

PreparedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open dataset '" + path.string() +
                     "'; run the prepare command first to create it");
  }
  io::Reader r(in, "dataset '" + path.string() + "'");
  r.expect_magic("ALDS");
  const auto version = r.u32();
  if (version != kDatasetVersion) {
    throw ParseError("dataset '" + path.string() + "' has format version " +
                     std::to_string(version));
  }
  PreparedDataset data;
  try {
    const auto header = nlohmann::json::parse(r.string());
    data.window = header.at("window").get<std::size_t>();
    data.dead_zone.lower = header.at("dead_zone").at(0).get<double>();
    data.dead_zone.upper = header.at("dead_zone").at(1).get<double>();
    data.outlier_threshold = header.at("outlier_threshold").get<double>();
    data.epsilon = header.at("epsilon").get<double>();
    for (const auto& c : header.at("columns")) {
      data.split.columns.push_back({c.at("name").get<std::string>(),
                                    feature_group_from_string(c.at("group").get<std::string>())});
    }
    data.split.train_range = range_from(header.at("train_range"));
    data.split.validation_range = range_from(header.at("validation_range"));
    data.split.test_range = range_from(header.at("test_range"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("dataset '" + path.string() + "' header: " + e.what());
  }
  const auto count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto tag = r.u8();
    WindowedSample w;
    w.stock_id = r.string(4096);
    w.target_date = r.string(64);
    w.y_m = static_cast<Movement>(static_cast<std::int8_t>(r.u8()));
    w.y_v = r.u8();
    w.x = r.matrix();
    if (w.x.rows() != data.split.columns.size() || w.x.cols() != data.window) {
      throw ParseError("dataset '" + path.string() + "': sample " + std::to_string(i) +
                       " has shape " + w.x.shape());
    }
    switch (tag) {
      case 0: data.split.train.push_back(std::move(w)); break;
      case 1: data.split.validation.push_back(std::move(w)); break;
      case 2: data.split.test.push_back(std::move(w)); break;
      default: throw ParseError("dataset '" + path.string() + "': bad split tag");
    }
  }
  return data;
}

std::vector<std::size_t> rows_for_names(const std::vector<FeatureColumn>& columns,
                                        const std::vector<std::string>& names) {
  std::vector<std::size_t> rows;
  std::string missing;
  for (const auto& n : names) {
    std::size_t i = 0;
    while (i < columns.size() && columns[i].name != n) ++i;
    if (i == columns.size()) {
      missing += " " + n;
    } else {
      rows.push_back(i);
    }
  }
  if (!missing.empty()) throw DimensionError("dataset lacks feature column(s):" + missing);
  return rows;
}

}  // namespace alerta
