#include "alerta/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

#include "alerta/errors.hpp"
#include "binary_io.hpp"

namespace alerta {

std::string config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["input_dim"] = c.input_dim;
  j["hidden"] = c.hidden;
  j["window"] = c.window;
  j["model"] = to_string(c.kind);
  j["tda_normalize"] = c.tda_normalize;
  j["separate_context_cell"] = c.separate_context_cell;
  j["feature_names"] = c.feature_names;
  return j.dump();
}

ModelConfig config_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelConfig c;
    c.input_dim = j.at("input_dim").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.window = j.at("window").get<std::size_t>();
    c.kind = model_kind_from_string(j.at("model").get<std::string>());
    c.tda_normalize = j.at("tda_normalize").get<bool>();
    c.separate_context_cell = j.at("separate_context_cell").get<bool>();
    c.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint config: ") + e.what());
  }
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write checkpoint '" + path.string() + "'");
  out.write("ALCK", 4);
  io::write_u32(out, kCheckpointVersion);
  io::write_string(out, config_to_json(params.config));
  io::write_u64(out, params.store.size());
  for (const auto& [name, value] : params.store.values()) {
    io::write_string(out, name);
    io::write_matrix(out, value);
  }
  if (!out) throw ParseError("failed writing checkpoint '" + path.string() + "'");
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint '" + path.string() + "'");
  io::Reader r(in, "checkpoint '" + path.string() + "'");
  r.expect_magic("ALCK");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint '" + path.string() + "' has format version " +
                     std::to_string(version) + ", expected " +
                     std::to_string(kCheckpointVersion));
  }
  ModelParams params;
  params.config = config_from_json(r.string());
  const auto count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.string(4096);
    params.store.add(name, r.matrix());
  }
  validate_params(params);
  return params;
}

}  // namespace alerta
